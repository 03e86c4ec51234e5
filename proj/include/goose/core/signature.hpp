#pragma once

#include <bitset>
#include <cstdint>

#include "goose/core/message.hpp"
#include "goose/core/rules.hpp"

namespace goose {

inline constexpr std::bitset<kRuleCount> rule_set(std::initializer_list<int> ids) {
    std::bitset<kRuleCount> s;
    for (int r : ids) s.set(static_cast<std::size_t>(r - 1));
    return s;
}

namespace detail {

enum class SequenceBreak { Skip, UncorrelatedState, Other };

// Kind of sequence-rule break at a chain transition that fails the increment check.
inline SequenceBreak classify_sequence_break(const GooseMessage& prev, const GooseMessage& cur) {
    const std::uint64_t p = prev.sq_num, c = cur.sq_num;
    if (c >= p + 2) return SequenceBreak::Skip;
    const bool st_advanced = std::uint64_t{cur.st_num} == std::uint64_t{prev.st_num} + 1 ||
                             (cur.st_num == 0 && prev.st_num == kStNumMax);
    if (st_advanced && !data_changed(prev, cur)) return SequenceBreak::UncorrelatedState;
    return SequenceBreak::Other;
}

inline std::optional<ClassLabel> spoof_class(const FieldMask& fields) {
    if (fields.count() != 1) return std::nullopt;
    if (fields[field_bit(CriticalField::DM)]) return ClassLabel::SPDM;
    if (fields[field_bit(CriticalField::SM)]) return ClassLabel::SPSM;
    if (fields[field_bit(CriticalField::Type)]) return ClassLabel::SPType;
    if (fields[field_bit(CriticalField::Appid)]) return ClassLabel::SPAppid;
    if (fields[field_bit(CriticalField::Dataset)]) return ClassLabel::SPDataset;
    return ClassLabel::SPGoid;
}

}  // namespace detail

// Maps a window's set of violated rules to the class it signals.
inline ClassLabel signature_class(const MessageWindow& w) {
    const RuleReport report = evaluate_rules(w);
    const auto v = report.violated();
    if (v.none()) return ClassLabel::Normal;
    if (v == rule_set({2})) return ClassLabel::DI;
    if (v == rule_set({1, 8})) return ClassLabel::RE;
    if (v == rule_set({6})) return ClassLabel::DOS;
    if (v == rule_set({7})) return ClassLabel::SPTime;
    if (v == rule_set({4})) return detail::spoof_class(report.changed_fields).value_or(ClassLabel::ZeroDay);
    if (v == rule_set({1})) {
        const MessageSeverities sev = message_severities(w);
        const auto chain = chain_predecessors(w);
        bool all_skip = true, all_state = true;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (sev.severity[i][0] <= 0.0) continue;
            const auto kind = detail::classify_sequence_break(w.messages[*chain[i]], w.messages[i]);
            all_skip = all_skip && kind == detail::SequenceBreak::Skip;
            all_state = all_state && kind == detail::SequenceBreak::UncorrelatedState;
        }
        if (all_skip) return ClassLabel::PacketLoss;
        if (all_state) return ClassLabel::DI;
    }
    return ClassLabel::ZeroDay;
}

}  // namespace goose
