#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "goose/aatm/features.hpp"
#include "goose/aatm/vocab.hpp"
#include "goose/core/rules.hpp"
#include "goose/quality/quality.hpp"

namespace goose::aatm {

// Weighted sum of per-rule compliance scores (1 when compliant, exp(-l_r V_r)
// otherwise), with each rule's severity taken as its worst in the window.
inline double f_protocol(const MessageWindow& w, const std::array<double, kRuleCount>& weights,
                         const std::array<double, kRuleCount>& lambdas = quality::kRuleImportance) {
    const RuleReport report = evaluate_rules(w);
    double sum = 0;
    for (std::size_t r = 0; r < kRuleCount; ++r) {
        const double v = report.rules[r].severity;
        sum += weights[r] * (v <= 0 ? 1.0 : std::exp(-lambdas[r] * v));
    }
    return sum;
}

inline double f_balance(const quality::ClassCounts& counts) {
    double total = 0;
    for (auto c : counts) total += static_cast<double>(c);
    if (total <= 0) throw std::domain_error("f_balance: no windows counted");
    const double uniform = 1.0 / static_cast<double>(kClassCount);
    double dev = 0;
    for (auto c : counts) dev += std::abs(static_cast<double>(c) / total - uniform);
    return -dev;
}

inline constexpr double kMixedFeatureCount = kNumericCount + kCategoricalCount;

// Distance between two aligned messages given a numeric vector for the first.
inline double message_distance(const NumericVector& a_num, const GooseMessage& a, const GooseMessage& b) {
    const NumericVector b_num = numeric_vector(b);
    double d = 0;
    for (std::size_t f = 0; f < kNumericCount; ++f) d += std::abs(a_num[f] - b_num[f]) / kNumericMax[f];
    for (std::size_t j = 0; j < kCategoricalCount; ++j) d += categorical_ref(a, j) != categorical_ref(b, j) ? 1.0 : 0.0;
    return d / kMixedFeatureCount;
}

// Mean per-position distance; positions present in only one window count as 1.
inline double mixed_distance(const MessageWindow& a, const MessageWindow& b) {
    const std::size_t n = std::max(a.size(), b.size());
    if (n == 0) return 0.0;
    const std::size_t common = std::min(a.size(), b.size());
    double sum = static_cast<double>(n - common);
    for (std::size_t i = 0; i < common; ++i)
        sum += message_distance(numeric_vector(a.messages[i]), a.messages[i], b.messages[i]);
    return sum / static_cast<double>(n);
}

struct NearestNeighbour {
    std::size_t index = 0;
    double distance = 0;
};

inline NearestNeighbour nearest_neighbour(const MessageWindow& candidate, std::span<const MessageWindow> corpus) {
    if (corpus.empty()) throw std::domain_error("f_novel: empty corpus");
    NearestNeighbour best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const double d = mixed_distance(candidate, corpus[i]);
        if (d < best.distance) best = {i, d};
        if (d == 0) break;
    }
    return best;
}

inline double f_novel(const MessageWindow& candidate, std::span<const MessageWindow> corpus) {
    return nearest_neighbour(candidate, corpus).distance;
}

}  // namespace goose::aatm
