#pragma once

#include <array>
#include <bitset>
#include <cmath>
#include <span>
#include <string>

#include "goose/aatm/config.hpp"
#include "goose/aatm/features.hpp"
#include "goose/aatm/objectives.hpp"
#include "goose/aatm/surrogates.hpp"
#include "goose/aatm/vocab.hpp"
#include "goose/core/rules.hpp"
#include "goose/quality/quality.hpp"

namespace goose::aatm {

// What a perturbation step should break and which features it may touch.
struct TargetSpec {
    std::bitset<kRuleCount> rules;
    std::bitset<kAxisCount> axes = std::bitset<kAxisCount>().set();
    std::bitset<kCategoricalCount> categoricals = std::bitset<kCategoricalCount>().set();
    // For rule 4: the exact set of critical fields that must differ from the predecessor.
    FieldMask spoof_fields;
};

struct PerturbationTerms {
    double alpha = 0, beta = 0, gamma = 0;
    AxisVector protocol{};  // gradient of the surrogate protocol objective
    AxisVector balance{};   // always zero: class balance is steered by the class plan
    AxisVector novelty{};   // gradient of the distance to the nearest corpus window
    AxisVector target{};    // sum of targeted compliance-surrogate gradients, masked

    AxisVector base() const {
        AxisVector d{};
        for (std::size_t a = 0; a < kAxisCount; ++a)
            d[a] = alpha * protocol[a] + beta * balance[a] + gamma * novelty[a];
        return d;
    }

    AxisVector zero(double lambda) const {
        AxisVector d = base();
        for (std::size_t a = 0; a < kAxisCount; ++a) d[a] -= lambda * target[a];
        return d;
    }
};

namespace detail {

inline constexpr std::array<std::size_t, kAxisCount> kAxisField = {
    idx(Numeric::Micro), idx(Numeric::Appid), idx(Numeric::StNum),
    idx(Numeric::SqNum), idx(Numeric::Data1), idx(Numeric::Data2)};

}  // namespace detail

// Per-field view of an axis delta; the clock offset is split into signed
// hour/minute/second/microsecond parts.
inline NumericVector to_numeric_delta(const AxisVector& d) {
    NumericVector out{};
    const double clock = d[idx(Axis::Clock)];
    const double sign = clock < 0 ? -1.0 : 1.0;
    double rest = std::abs(clock);
    constexpr std::array<double, 4> unit = {3.6e9, 6e7, 1e6, 1};
    for (std::size_t f = 0; f < 3; ++f) {
        const double whole = std::floor(rest / unit[f]);
        out[f] = sign * whole;
        rest -= whole * unit[f];
    }
    out[3] = sign * rest;
    for (std::size_t a = 1; a < kAxisCount; ++a) out[detail::kAxisField[a]] = d[a];
    return out;
}

inline PerturbationTerms numeric_perturbation(const MessageWindow& w, std::size_t focus,
                                              const GenerationConfig& cfg,
                                              const quality::ClassCounts& /*corpus_state*/,
                                              std::span<const MessageWindow> corpus,
                                              const TargetSpec& target = {}) {
    PerturbationTerms t;
    t.alpha = cfg.alpha;
    t.beta = cfg.beta;
    t.gamma = cfg.gamma;
    const FocusContext ctx = focus_context(w, focus);
    const AxisVector x = axis_vector(w.messages[focus]);

    for (int r = 1; r <= kRuleCount; ++r) {
        const auto ri = static_cast<std::size_t>(r - 1);
        const AxisVector g = compliance_gradient(r, ctx, x);
        for (std::size_t a = 0; a < kAxisCount; ++a) {
            t.protocol[a] += cfg.rule_weights[ri] * g[a];
            if (target.rules[ri] && target.axes[a]) t.target[a] += g[a];
        }
    }

    if (!corpus.empty()) {
        const MessageWindow& nn = corpus[nearest_neighbour(w, corpus).index];
        const GooseMessage& m = w.messages[focus];
        const double positions = static_cast<double>(std::max(w.size(), nn.size()));
        if (focus < nn.size()) {
            const NumericVector base = numeric_vector(m);
            const AxisVector x0 = x;
            t.novelty = central_difference(
                [&](const AxisVector& p) {
                    NumericVector v = base;
                    // Clock motion shows up in the microsecond field.
                    v[idx(Numeric::Micro)] += p[idx(Axis::Clock)] - x0[idx(Axis::Clock)];
                    for (std::size_t a = 1; a < kAxisCount; ++a) v[detail::kAxisField[a]] = p[a];
                    return message_distance(v, m, nn.messages[focus]) / positions;
                },
                x);
        }
    }
    return t;
}

struct CategoricalMutation {
    std::array<double, kCategoricalCount> m{};
    std::array<std::string, kCategoricalCount> values;
};

// m_j = gamma * novelty_j - lambda * sum over targeted rules of T[r][j] (masked).
inline CategoricalMutation categorical_mutation(const GooseMessage& msg, const GenerationConfig& cfg,
                                                const CategoricalVocab& vocab, const TargetSpec& target,
                                                const std::array<int, kCategoricalCount>& novelty, double lambda) {
    CategoricalMutation out;
    for (std::size_t j = 0; j < kCategoricalCount; ++j) {
        double pull = 0;
        if (target.categoricals[j]) {
            for (std::size_t r = 0; r < kRuleCount; ++r)
                if (target.rules[r]) pull += vocab.transition()[r][j];
        }
        out.m[j] = cfg.gamma * novelty[j] - lambda * pull;
        const std::size_t i = vocab.index_of(j, categorical_ref(msg, j));
        out.values[j] = vocab.values(j)[mutate_index(i, out.m[j], vocab.size(j))];
    }
    return out;
}

// Applies an axis delta and new categorical values to the focus message, then
// carries the realized change through every later message so that the
// perturbation stays local to the focus transition.
inline MessageWindow apply_step(const MessageWindow& w, std::size_t focus, const AxisVector& delta,
                                const std::array<std::string, kCategoricalCount>* categoricals = nullptr) {
    MessageWindow out = w;
    GooseMessage& m = out.messages.at(focus);
    const GooseMessage before = m;

    const auto old_clock = micros_of_day(before);
    const double want = static_cast<double>(old_clock) + std::round(delta[idx(Axis::Clock)]);
    const auto new_clock = static_cast<std::int64_t>(std::clamp(want, 0.0, static_cast<double>(kMicrosPerDay - 1)));

    NumericVector v = numeric_vector(before);
    for (std::size_t a = 1; a < kAxisCount; ++a) v[detail::kAxisField[a]] += delta[a];
    assign_numeric(m, v);
    set_micros_of_day(m, new_clock);
    if (categoricals) {
        for (std::size_t j = 0; j < kCategoricalCount; ++j) categorical_ref(m, j) = (*categoricals)[j];
    }

    const std::int64_t dt = new_clock - old_clock;
    const std::int64_t dappid = std::int64_t{m.appid} - std::int64_t{before.appid};
    const std::uint32_t dst = m.st_num - before.st_num;  // modulo 2^32
    const std::int64_t dsq = std::int64_t{m.sq_num} - std::int64_t{before.sq_num};
    const std::uint8_t flip1 = m.data1 ^ before.data1, flip2 = m.data2 ^ before.data2;

    for (std::size_t i = focus + 1; i < out.size(); ++i) {
        GooseMessage& s = out.messages[i];
        set_micros_of_day(s, std::clamp<std::int64_t>(micros_of_day(s) + dt, 0, kMicrosPerDay - 1));
        s.appid = static_cast<std::uint32_t>(std::clamp<std::int64_t>(s.appid + dappid, 0, kAppidMax));
        s.st_num += dst;
        s.sq_num = static_cast<std::uint32_t>(std::clamp<std::int64_t>(s.sq_num + dsq, 0, 0xFFFF'FFFFll));
        s.data1 ^= flip1;
        s.data2 ^= flip2;
        for (std::size_t j = 0; j < kCategoricalCount; ++j) {
            std::string& c = categorical_ref(s, j);
            if (c == categorical_ref(before, j)) c = categorical_ref(m, j);
        }
    }
    return out;
}

}  // namespace goose::aatm
