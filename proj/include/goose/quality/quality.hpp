#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "goose/core/message.hpp"
#include "goose/core/rules.hpp"

namespace goose::quality {

using ClassCounts = std::array<std::size_t, kClassCount>;

// Importance weight of each rule in the exponential realism penalty.
inline constexpr std::array<double, kRuleCount> kRuleImportance = {3, 3, 5, 3, 2, 1, 2, 5};

inline ClassCounts count_labels(std::span<const MessageWindow> windows) {
    ClassCounts counts{};
    for (const auto& w : windows) {
        if (!w.label) throw std::domain_error("window '" + w.window_id + "' is unlabeled");
        ++counts[class_index(*w.label)];
    }
    return counts;
}

// Half inverse imbalance ratio plus half normalized base-2 entropy, with K fixed
// at the 13-class label set. Missing classes make the ratio term zero.
inline double balance_rate(const ClassCounts& counts) {
    double total = 0;
    for (auto c : counts) total += static_cast<double>(c);
    if (total <= 0) throw std::domain_error("balance_rate: no windows counted");

    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    std::size_t nonzero = 0;
    double h = 0;
    for (auto c : counts) {
        if (c == 0) continue;
        ++nonzero;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    if (nonzero <= 1) return 0.0;
    const double entropy = h / std::log2(static_cast<double>(kClassCount));
    const double ratio = static_cast<double>(*lo) / static_cast<double>(*hi);
    return 0.5 * (ratio + entropy);
}

inline double rule_score(int rule_id, double severity) {
    if (severity <= 0.0) return 1.0;
    return std::exp(-kRuleImportance[static_cast<std::size_t>(rule_id - 1)] * severity);
}

inline double realism_product(const std::array<double, kRuleCount>& severities) {
    double rr = 1.0;
    for (int r = 1; r <= kRuleCount; ++r) rr *= rule_score(r, severities[static_cast<std::size_t>(r - 1)]);
    return rr;
}

// Whole-window product using each rule's worst (max) severity in the window.
inline double realism_rate_window(const MessageWindow& w) {
    const RuleReport report = evaluate_rules(w);
    std::array<double, kRuleCount> sev{};
    for (int r = 1; r <= kRuleCount; ++r) sev[static_cast<std::size_t>(r - 1)] = report.rule(r).severity;
    return realism_product(sev);
}

// Mean over the window's messages of each message's rule-score product.
inline double message_realism_rate(const MessageWindow& w) {
    const MessageSeverities sev = message_severities(w);
    double sum = 0;
    for (const auto& s : sev.severity) sum += realism_product(s);
    return sum / static_cast<double>(sev.severity.size());
}

enum class RealismGranularity { Message, Window };

inline double realism_rate_corpus(std::span<const MessageWindow> windows,
                                  RealismGranularity granularity = RealismGranularity::Message) {
    if (windows.empty()) throw std::domain_error("realism_rate_corpus: empty corpus");
    double sum = 0;
    for (const auto& w : windows) {
        sum += granularity == RealismGranularity::Message ? message_realism_rate(w) : realism_rate_window(w);
    }
    return sum / static_cast<double>(windows.size());
}

struct QualityReport {
    double balance_rate = 0;
    double realism_rate = 0;
    double realism_rate_worst_case = 0;
    ClassCounts per_class_counts{};
    std::array<double, kRuleCount> per_rule_mean_scores{};
    std::size_t window_count = 0;
};

inline QualityReport assess(std::span<const MessageWindow> windows) {
    if (windows.empty()) throw std::domain_error("assess: empty corpus");
    QualityReport q;
    q.window_count = windows.size();
    q.per_class_counts = count_labels(windows);
    q.balance_rate = balance_rate(q.per_class_counts);
    double rr = 0, worst = 0;
    for (const auto& w : windows) {
        const MessageSeverities sev = message_severities(w);
        double window_rr = 0;
        std::array<double, kRuleCount> rule_means{};
        for (const auto& s : sev.severity) {
            window_rr += realism_product(s);
            for (int r = 1; r <= kRuleCount; ++r) {
                rule_means[static_cast<std::size_t>(r - 1)] += rule_score(r, s[static_cast<std::size_t>(r - 1)]);
            }
        }
        const double n = static_cast<double>(sev.severity.size());
        rr += window_rr / n;
        for (std::size_t r = 0; r < kRuleCount; ++r) q.per_rule_mean_scores[r] += rule_means[r] / n;
        worst += realism_rate_window(w);
    }
    const double count = static_cast<double>(windows.size());
    q.realism_rate = rr / count;
    q.realism_rate_worst_case = worst / count;
    for (auto& s : q.per_rule_mean_scores) s /= count;
    return q;
}

inline nlohmann::json to_json(const QualityReport& q) {
    nlohmann::json counts = nlohmann::json::object();
    for (std::size_t i = 0; i < kClassCount; ++i) counts[std::string(kClassNames[i])] = q.per_class_counts[i];
    return {
        {"balance_rate", q.balance_rate},
        {"realism_rate", q.realism_rate},
        {"realism_rate_worst_case", q.realism_rate_worst_case},
        {"window_count", q.window_count},
        {"per_class_counts", counts},
        {"per_rule_mean_scores", q.per_rule_mean_scores},
    };
}

}  // namespace goose::quality
