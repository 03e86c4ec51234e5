#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "goose/core/message.hpp"
#include "goose/core/rules.hpp"

namespace goose::aatm {

// Continuous coordinates of the message being perturbed. The four time fields
// move together as one clock position (microseconds of the day).
enum class Axis : std::uint8_t { Clock, Appid, StNum, SqNum, Data1, Data2 };
inline constexpr std::size_t kAxisCount = 6;
using AxisVector = std::array<double, kAxisCount>;

constexpr std::size_t idx(Axis a) { return static_cast<std::size_t>(a); }

// Central-difference steps: one unit for clock and counters, half for binary data.
inline constexpr AxisVector kAxisStep = {1, 1, 1, 1, 0.5, 0.5};

inline AxisVector axis_vector(const GooseMessage& m) {
    return {static_cast<double>(micros_of_day(m)), static_cast<double>(m.appid),
            static_cast<double>(m.st_num),         static_cast<double>(m.sq_num),
            static_cast<double>(m.data1),          static_cast<double>(m.data2)};
}

// Neighbours of the focus message that the pairwise rules compare against.
struct FocusContext {
    std::optional<AxisVector> chain_prev;  // same (dm, sm) predecessor
    std::optional<AxisVector> prev;        // positional predecessor
    bool categoricals_match_prev = true;   // dm, sm, type, dataset, goid equal to prev
};

inline FocusContext focus_context(const MessageWindow& w, std::size_t k) {
    if (k >= w.size()) throw std::out_of_range("focus index outside the window");
    FocusContext ctx;
    if (auto c = chain_predecessors(w)[k]) ctx.chain_prev = axis_vector(w.messages[*c]);
    if (k > 0) {
        const GooseMessage& p = w.messages[k - 1];
        const GooseMessage& m = w.messages[k];
        ctx.prev = axis_vector(p);
        ctx.categoricals_match_prev = p.dm == m.dm && p.sm == m.sm && p.eth_type == m.eth_type &&
                                      p.dataset_name == m.dataset_name && p.goid == m.goid;
    }
    return ctx;
}

struct SurrogateShape {
    double sharpness = 4.0;      // logistic slope on counter distances
    double log_gap_slope = 1.0;  // burst rule, per unit of log-gap
    double silence_slope = 1.0;  // silence rule, per second
};

namespace detail {

inline double logistic(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double bump(double x) { return std::exp(-x * x); }

// Signed amount by which the focus value moved away from the predecessor's bit.
inline double bit_flip(double prev, double cur) { return prev < 0.5 ? cur - prev : prev - cur; }

inline double st_delta(double prev, double cur) {
    double d = cur - prev;
    if (d < -2'147'483'648.0) d += 4'294'967'296.0;
    return d;
}

}  // namespace detail

// Smooth propensity in (0, 1) of rule r being violated at the focus, given the
// focus coordinates x. Rules with no applicable predecessor return 0.
inline double violation_propensity(int rule_id, const FocusContext& ctx, const AxisVector& x,
                                   const SurrogateShape& s = {}) {
    goose::detail::require_rule_id(rule_id);
    using detail::bump;
    using detail::logistic;
    const double k = s.sharpness;
    const auto changed = [&](const AxisVector& p) {
        const double flip = detail::bit_flip(p[idx(Axis::Data1)], x[idx(Axis::Data1)]) +
                            detail::bit_flip(p[idx(Axis::Data2)], x[idx(Axis::Data2)]);
        return logistic(k * (flip - 0.5));
    };
    switch (rule_id) {
        case 1: {
            if (!ctx.chain_prev) return 0.0;
            const double dsq = x[idx(Axis::SqNum)] - (*ctx.chain_prev)[idx(Axis::SqNum)];
            // Directed toward a forward skip; resets surface through rule 8.
            return logistic(k * (dsq - 1.5));
        }
        case 2:
        case 8: {
            if (!ctx.chain_prev) return 0.0;
            const auto& p = *ctx.chain_prev;
            const double dst = x[idx(Axis::StNum)] - p[idx(Axis::StNum)];
            const double dsq = x[idx(Axis::SqNum)] - p[idx(Axis::SqNum)];
            return changed(p) * bump(dst) * bump(rule_id == 2 ? dsq - 1.0 : dsq);
        }
        case 3: {
            if (!ctx.chain_prev) return 0.0;
            const double d = detail::st_delta((*ctx.chain_prev)[idx(Axis::StNum)], x[idx(Axis::StNum)]);
            // Compliant band is d in {0, 1}.
            return 1.0 - (1.0 - logistic(k * (-d - 0.5))) * (1.0 - logistic(k * (d - 1.5)));
        }
        case 4: {
            if (!ctx.prev) return 0.0;
            if (!ctx.categoricals_match_prev) return 1.0;
            const double da = x[idx(Axis::Appid)] - (*ctx.prev)[idx(Axis::Appid)];
            return logistic(k * (da - 0.5));
        }
        case 5: {
            const double t = x[idx(Axis::Clock)];
            const double day = static_cast<double>(kMicrosPerDay);
            return 1.0 - logistic(k * (t + 0.5)) * logistic(k * (day - 0.5 - t));
        }
        case 6: {
            if (!ctx.prev) return 0.0;
            const double gap = std::max(0.0, x[idx(Axis::Clock)] - (*ctx.prev)[idx(Axis::Clock)]);
            const double threshold = static_cast<double>(kBurstGapMicros) + 1.0;
            return logistic(s.log_gap_slope * (std::log(threshold) - std::log1p(gap)));
        }
        case 7: {
            if (!ctx.prev) return 0.0;
            const double gap_s = (x[idx(Axis::Clock)] - (*ctx.prev)[idx(Axis::Clock)]) / 1e6;
            return logistic(s.silence_slope * (gap_s - 10.0));
        }
    }
    return 0.0;
}

// Smooth stand-in for the compliance indicator GR_r.
inline double compliance_surrogate(int rule_id, const FocusContext& ctx, const AxisVector& x,
                                   const SurrogateShape& s = {}) {
    return 1.0 - violation_propensity(rule_id, ctx, x, s);
}

// Central finite differences of f along every axis; steps are kAxisStep * scale.
template <typename F>
AxisVector central_difference(F&& f, const AxisVector& x, double scale = 1.0) {
    AxisVector g{};
    for (std::size_t a = 0; a < kAxisCount; ++a) {
        const double h = kAxisStep[a] * scale;
        AxisVector up = x, down = x;
        up[a] += h;
        down[a] -= h;
        g[a] = (f(up) - f(down)) / (2.0 * h);
    }
    return g;
}

inline AxisVector compliance_gradient(int rule_id, const FocusContext& ctx, const AxisVector& x,
                                      double scale = 1.0, const SurrogateShape& s = {}) {
    // Differencing the small propensity keeps precision near saturation.
    AxisVector g = central_difference(
        [&](const AxisVector& p) { return violation_propensity(rule_id, ctx, p, s); }, x, scale);
    for (auto& v : g) v = -v;
    return g;
}

}  // namespace goose::aatm
