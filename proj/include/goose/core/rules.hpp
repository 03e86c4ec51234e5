#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "goose/core/message.hpp"

namespace goose {

inline constexpr int kRuleCount = 8;

// Timing thresholds of the burst and silence rules.
inline constexpr std::int64_t kBurstGapMicros = 10;
inline constexpr std::size_t kBurstRunLength = 10;
inline constexpr std::int64_t kSilenceGapMicros = 10 * kMicrosPerSecond;
inline constexpr std::int64_t kSilenceSaturationMicros = 30 * kMicrosPerSecond;

// Fields watched by the field-integrity rule (rule 4), in bit order.
enum class CriticalField : std::uint8_t { DM, SM, Type, Appid, Dataset, Goid };
inline constexpr std::size_t kCriticalFieldCount = 6;
using FieldMask = std::bitset<kCriticalFieldCount>;

inline constexpr std::size_t field_bit(CriticalField f) { return static_cast<std::size_t>(f); }

inline FieldMask changed_critical_fields(const GooseMessage& prev, const GooseMessage& cur) {
    FieldMask m;
    m[field_bit(CriticalField::DM)] = prev.dm != cur.dm;
    m[field_bit(CriticalField::SM)] = prev.sm != cur.sm;
    m[field_bit(CriticalField::Type)] = prev.eth_type != cur.eth_type;
    m[field_bit(CriticalField::Appid)] = prev.appid != cur.appid;
    m[field_bit(CriticalField::Dataset)] = prev.dataset_name != cur.dataset_name;
    m[field_bit(CriticalField::Goid)] = prev.goid != cur.goid;
    return m;
}

struct RuleOutcome {
    bool compliant = true;
    double severity = 0.0;
    std::optional<std::size_t> first_violation;

    friend bool operator==(const RuleOutcome&, const RuleOutcome&) = default;
};

struct RuleReport {
    std::array<RuleOutcome, kRuleCount> rules{};
    // Union of critical fields changed at rule-4 violations.
    FieldMask changed_fields;

    const RuleOutcome& rule(int rule_id) const { return rules.at(static_cast<std::size_t>(rule_id - 1)); }

    bool all_compliant() const {
        return std::all_of(rules.begin(), rules.end(), [](const RuleOutcome& r) { return r.compliant; });
    }

    // Bit (rule_id - 1) set for every violated rule.
    std::bitset<kRuleCount> violated() const {
        std::bitset<kRuleCount> v;
        for (std::size_t i = 0; i < rules.size(); ++i) v[i] = !rules[i].compliant;
        return v;
    }

    friend bool operator==(const RuleReport&, const RuleReport&) = default;
};

namespace detail {

inline void require_rule_id(int rule_id) {
    if (rule_id < 1 || rule_id > kRuleCount)
        throw std::domain_error("rule id must be in [1,8], got " + std::to_string(rule_id));
}

inline void require_non_empty(const MessageWindow& w) {
    if (w.empty()) throw std::domain_error("window '" + w.window_id + "' has no messages");
}

inline bool data_changed(const GooseMessage& prev, const GooseMessage& cur) {
    return prev.data1 != cur.data1 || prev.data2 != cur.data2;
}

inline bool sq_incremented(const GooseMessage& prev, const GooseMessage& cur) {
    return std::uint64_t{cur.sq_num} == std::uint64_t{prev.sq_num} + 1;
}

inline bool st_progression_ok(const GooseMessage& prev, const GooseMessage& cur) {
    const std::uint64_t p = prev.st_num, c = cur.st_num;
    return c == p || c == p + 1 || (c == 0 && p == kStNumMax);
}

}  // namespace detail

// For each position, the nearest earlier message with the same (dm, sm) pair.
inline std::vector<std::optional<std::size_t>> chain_predecessors(const MessageWindow& w) {
    std::vector<std::optional<std::size_t>> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = i; j-- > 0;) {
            if (w.messages[j].dm == w.messages[i].dm && w.messages[j].sm == w.messages[i].sm) {
                out[i] = j;
                break;
            }
        }
    }
    return out;
}

// Per-message severities: entry [i][r-1] is the severity of rule r at the
// transition ending at message i (or of message i alone for rule 5).
struct MessageSeverities {
    std::vector<std::array<double, kRuleCount>> severity;
    std::vector<FieldMask> changed_fields;
};

inline MessageSeverities message_severities(const MessageWindow& w) {
    detail::require_non_empty(w);
    const auto& msgs = w.messages;
    const std::size_t n = msgs.size();
    const auto chain = chain_predecessors(w);

    MessageSeverities out;
    out.severity.assign(n, std::array<double, kRuleCount>{});
    out.changed_fields.assign(n, FieldMask{});

    std::size_t burst_run = 1;
    for (std::size_t i = 0; i < n; ++i) {
        auto& s = out.severity[i];
        const GooseMessage& cur = msgs[i];

        if (chain[i]) {
            const GooseMessage& prev = msgs[*chain[i]];
            const bool changed = detail::data_changed(prev, cur);
            const bool st_same = prev.st_num == cur.st_num;
            s[0] = detail::sq_incremented(prev, cur) ? 0.0 : 1.0;
            s[1] = (changed && st_same && detail::sq_incremented(prev, cur)) ? 1.0 : 0.0;
            s[2] = detail::st_progression_ok(prev, cur) ? 0.0 : 1.0;
            s[7] = (changed && st_same && prev.sq_num == cur.sq_num) ? 1.0 : 0.0;
        }

        if (i > 0) {
            const GooseMessage& prev = msgs[i - 1];
            const FieldMask fields = changed_critical_fields(prev, cur);
            out.changed_fields[i] = fields;
            s[3] = static_cast<double>(fields.count()) / static_cast<double>(kCriticalFieldCount);

            const std::int64_t gap = micros_of_day(cur) - micros_of_day(prev);
            burst_run = gap <= kBurstGapMicros ? burst_run + 1 : 1;
            if (gap > kSilenceGapMicros) {
                s[6] = std::min(1.0, static_cast<double>(gap - kSilenceGapMicros) /
                                         static_cast<double>(kSilenceSaturationMicros));
            }
        }

        s[4] = timestamp_in_format(cur) ? 0.0 : 1.0;

        // Observed run length against the longest compliant run (threshold - 1),
        // so the first violating run already has positive severity.
        if (burst_run >= kBurstRunLength) {
            const double max_compliant = static_cast<double>(kBurstRunLength - 1);
            s[5] = std::min(1.0, static_cast<double>(burst_run) / max_compliant - 1.0);
        }
    }
    return out;
}

inline RuleReport evaluate_rules(const MessageWindow& w) {
    const MessageSeverities sev = message_severities(w);
    RuleReport report;
    for (std::size_t i = 0; i < sev.severity.size(); ++i) {
        for (std::size_t r = 0; r < kRuleCount; ++r) {
            const double v = sev.severity[i][r];
            if (v <= 0.0) continue;
            RuleOutcome& out = report.rules[r];
            if (out.compliant) out.first_violation = i;
            out.compliant = false;
            out.severity = std::max(out.severity, v);
            if (r == 3) report.changed_fields |= sev.changed_fields[i];
        }
    }
    return report;
}

// Compliance under uniform polarity: true means no anomaly for every rule.
inline RuleOutcome check_rule(int rule_id, const MessageWindow& w) {
    detail::require_rule_id(rule_id);
    return evaluate_rules(w).rule(rule_id);
}

inline double violation_severity(int rule_id, const MessageWindow& w) {
    return check_rule(rule_id, w).severity;
}

}  // namespace goose
