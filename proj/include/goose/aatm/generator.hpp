#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "goose/aatm/config.hpp"
#include "goose/aatm/features.hpp"
#include "goose/aatm/objectives.hpp"
#include "goose/aatm/perturbation.hpp"
#include "goose/aatm/seeds.hpp"
#include "goose/aatm/vocab.hpp"
#include "goose/core/signature.hpp"
#include "goose/ingest/csv.hpp"
#include "goose/quality/quality.hpp"

namespace goose::aatm {

class GenerationError : public std::runtime_error {
public:
    GenerationError(ClassLabel target, const std::string& what)
        : std::runtime_error("cannot generate " + std::string(to_string(target)) + " window: " + what),
          target_(target) {}
    ClassLabel target() const { return target_; }

private:
    ClassLabel target_;
};

// Perturbation plan for one window: the focus messages and what each step targets.
struct WindowPlan {
    std::vector<std::size_t> foci;
    TargetSpec spec;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::bitset<kAxisCount> axes(std::initializer_list<Axis> list) {
    std::bitset<kAxisCount> b;
    for (Axis a : list) b.set(idx(a));
    return b;
}

inline TargetSpec spoof_spec(std::size_t categorical) {
    TargetSpec s;
    s.rules = rule_set({4});
    s.axes.reset();
    s.categoricals.reset();
    s.categoricals.set(categorical);
    constexpr std::array<CriticalField, kCategoricalCount> field = {
        CriticalField::DM, CriticalField::SM, CriticalField::Type, CriticalField::Dataset, CriticalField::Goid};
    s.spoof_fields.set(field_bit(field[categorical]));
    return s;
}

inline TargetSpec rule_spec(std::bitset<kRuleCount> rules) {
    TargetSpec s;
    s.rules = rules;
    s.axes.reset();
    s.categoricals.reset();
    if (rules[0]) s.axes.set(idx(Axis::SqNum));
    if (rules[1] || rules[7]) s.axes |= axes({Axis::Data1, Axis::Data2, Axis::StNum, Axis::SqNum});
    if (rules[2]) s.axes.set(idx(Axis::StNum));
    if (rules[3]) {
        s.axes.set(idx(Axis::Appid));
        s.spoof_fields.set(field_bit(CriticalField::Appid));
    }
    if (rules[4] || rules[5] || rules[6]) s.axes.set(idx(Axis::Clock));
    return s;
}

// Zero-day shapes whose targeted rules can be broken together at one transition
// without reproducing a known class signature.
inline TargetSpec zero_day_spec(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 5);
    std::uniform_int_distribution<std::size_t> cat(0, kCategoricalCount - 1);
    switch (pick(rng)) {
        case 0: return rule_spec(rule_set({3}));
        case 1: return rule_spec(rule_set({1, 3}));
        case 2: return rule_spec(rule_set({2, 7}));
        case 3: return rule_spec(rule_set({7, 8}));
        case 4: {
            TargetSpec s = spoof_spec(cat(rng));
            std::size_t second = cat(rng);
            while (s.categoricals[second]) second = cat(rng);
            const TargetSpec t = spoof_spec(second);
            s.categoricals |= t.categoricals;
            s.spoof_fields |= t.spoof_fields;
            return s;
        }
        default: {
            TargetSpec s = rule_spec(rule_set({3}));
            const TargetSpec t = spoof_spec(cat(rng));
            s.rules |= t.rules;
            s.categoricals = t.categoricals;
            s.spoof_fields = t.spoof_fields;
            return s;
        }
    }
}

}  // namespace detail

inline WindowPlan plan_for(ClassLabel target, std::size_t window_size, const GenerationConfig& cfg,
                           std::mt19937_64& rng) {
    if (window_size < 2) throw GenerationError(target, "window needs at least 2 messages");
    WindowPlan plan;
    std::uniform_int_distribution<std::size_t> focus(1, window_size - 1);
    switch (target) {
        case ClassLabel::Normal: plan.spec = detail::rule_spec({}); break;
        case ClassLabel::DI: plan.spec = detail::rule_spec(rule_set({2})); break;
        case ClassLabel::RE: plan.spec = detail::rule_spec(rule_set({8})); break;
        case ClassLabel::SPTime: plan.spec = detail::rule_spec(rule_set({7})); break;
        case ClassLabel::PacketLoss: plan.spec = detail::rule_spec(rule_set({1})); break;
        case ClassLabel::DOS: {
            const std::size_t run = kBurstRunLength - 1;
            if (window_size < kBurstRunLength) throw GenerationError(target, "window shorter than a burst run");
            plan.spec = detail::rule_spec(rule_set({6}));
            const std::size_t start = std::uniform_int_distribution<std::size_t>(1, window_size - run)(rng);
            for (std::size_t k = 0; k < run; ++k) plan.foci.push_back(start + k);
            return plan;
        }
        case ClassLabel::SPDM: plan.spec = detail::spoof_spec(0); break;
        case ClassLabel::SPSM: plan.spec = detail::spoof_spec(1); break;
        case ClassLabel::SPType: plan.spec = detail::spoof_spec(2); break;
        case ClassLabel::SPDataset: plan.spec = detail::spoof_spec(3); break;
        case ClassLabel::SPGoid: plan.spec = detail::spoof_spec(4); break;
        case ClassLabel::SPAppid: {
            plan.spec = detail::rule_spec(rule_set({4}));
            plan.spec.axes = detail::axes({Axis::Appid});
            plan.spec.spoof_fields.set(field_bit(CriticalField::Appid));
            break;
        }
        case ClassLabel::ZeroDay:
            plan.spec = cfg.target_rules.any() ? detail::rule_spec(cfg.target_rules) : detail::zero_day_spec(rng);
            break;
    }
    plan.foci.push_back(focus(rng));
    return plan;
}

// Signed distance from satisfying every targeted rule at the focus; <= 0 means satisfied.
inline double focus_margin(const MessageWindow& w, std::size_t k, const TargetSpec& spec) {
    const MessageSeverities sev = message_severities(w);
    const auto gap = [&] {
        return k == 0 ? 0.0 : static_cast<double>(micros_of_day(w.messages[k]) - micros_of_day(w.messages[k - 1]));
    };
    double margin = -1.0;
    for (std::size_t r = 0; r < kRuleCount; ++r) {
        if (!spec.rules[r]) continue;
        double m = 1.0;
        switch (r) {
            case 3:
                m = (sev.severity[k][3] > 0 && sev.changed_fields[k] == spec.spoof_fields) ? -1.0 : 1.0;
                break;
            case 5: m = gap() - static_cast<double>(kBurstGapMicros); break;
            case 6: m = static_cast<double>(kSilenceGapMicros + 1) - gap(); break;
            default: m = sev.severity[k][r] > 0 ? -1.0 : 1.0; break;
        }
        margin = std::max(margin, m);
    }
    return margin;
}

inline bool focus_satisfied(const MessageWindow& w, std::size_t k, const TargetSpec& spec) {
    if (focus_margin(w, k, spec) > 0) return false;
    if (spec.rules[5] && micros_of_day(w.messages[k]) < micros_of_day(w.messages[k - 1])) return false;
    return true;
}

namespace detail {

// Moves the seed to a fresh clock position, counter base and data polarity;
// all rule outcomes are invariant under this shift.
inline MessageWindow rebase(const MessageWindow& seed, std::size_t length, std::mt19937_64& rng) {
    MessageWindow w;
    w.messages.assign(seed.messages.begin(), seed.messages.begin() + static_cast<std::ptrdiff_t>(length));
    const std::int64_t first = micros_of_day(w.messages.front());
    const std::int64_t span = micros_of_day(w.messages.back()) - first;
    const std::int64_t headroom = 2 * 3'600'000'000ll;
    const std::int64_t latest = std::max<std::int64_t>(0, kMicrosPerDay - 1 - span - headroom);
    const std::int64_t start = std::uniform_int_distribution<std::int64_t>(0, latest)(rng);
    const auto st_base = std::uniform_int_distribution<std::uint32_t>(1, 1'000'000)(rng);
    const auto sq_base = std::uniform_int_distribution<std::uint32_t>(0, 1'000'000)(rng);
    const auto flip = std::uniform_int_distribution<int>(0, 3)(rng);
    const std::uint32_t st0 = w.messages.front().st_num, sq0 = w.messages.front().sq_num;
    for (auto& m : w.messages) {
        set_micros_of_day(m, start + micros_of_day(m) - first);
        m.st_num = st_base + (m.st_num - st0);
        m.sq_num = sq_base + (m.sq_num - sq0);
        m.data1 ^= static_cast<std::uint8_t>(flip & 1);
        m.data2 ^= static_cast<std::uint8_t>((flip >> 1) & 1);
    }
    return w;
}

}  // namespace detail

// Runs one perturbation step at focus k, escalating the violation strength from
// the configured value to the smallest one that breaks every targeted rule.
inline std::optional<MessageWindow> perturb_focus(const MessageWindow& w, std::size_t k, const WindowPlan& plan,
                                                  const GenerationConfig& cfg, const CategoricalVocab& vocab,
                                                  const quality::ClassCounts& state,
                                                  std::span<const MessageWindow> corpus, std::mt19937_64& rng) {
    const PerturbationTerms terms = numeric_perturbation(w, k, cfg, state, corpus, plan.spec);
    std::array<int, kCategoricalCount> novelty{};
    for (auto& n : novelty) n = std::uniform_int_distribution<int>(-1, 1)(rng);

    const auto candidate = [&](double lambda) {
        const CategoricalMutation cm = categorical_mutation(w.messages[k], cfg, vocab, plan.spec, novelty, lambda);
        return apply_step(w, k, terms.zero(lambda), &cm.values);
    };
    if (plan.spec.rules.none()) return candidate(cfg.lambda_violation);

    double hi = cfg.lambda_violation > 0 ? cfg.lambda_violation : 1.0;
    MessageWindow best = candidate(hi);
    if (focus_satisfied(best, k, plan.spec)) return best;
    double lo = 0;
    int doublings = 0;
    while (focus_margin(best, k, plan.spec) > 0) {
        if (++doublings > 200) return std::nullopt;
        lo = hi;
        hi *= 2;
        best = candidate(hi);
    }
    for (int i = 0; i < 80 && hi - lo > hi * 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        MessageWindow c = candidate(mid);
        if (focus_margin(c, k, plan.spec) <= 0) {
            hi = mid;
            best = std::move(c);
        } else {
            lo = mid;
        }
    }
    if (!focus_satisfied(best, k, plan.spec)) return std::nullopt;
    return best;
}

inline MessageWindow generate_window(const MessageWindow& seed, ClassLabel target, const GenerationConfig& cfg,
                                     const CategoricalVocab& vocab, std::span<const MessageWindow> corpus,
                                     std::uint64_t stream_seed = 0, const quality::ClassCounts& state = {}) {
    if (seed.size() < cfg.window_length)
        throw GenerationError(target, "seed shorter than window_length");
    if (!evaluate_rules(seed).all_compliant()) throw GenerationError(target, "seed window is not compliant");

    std::string last_failure = "no attempt made";
    for (std::size_t attempt = 0; attempt < cfg.retry_budget; ++attempt) {
        std::mt19937_64 rng(detail::splitmix64(stream_seed ^ detail::splitmix64(attempt)));
        MessageWindow w = detail::rebase(seed, cfg.window_length, rng);
        const WindowPlan plan = plan_for(target, w.size(), cfg, rng);

        bool ok = true;
        for (std::size_t k : plan.foci) {
            auto next = perturb_focus(w, k, plan, cfg, vocab, state, corpus, rng);
            if (!next) {
                ok = false;
                last_failure = "targeted rules not reachable at focus " + std::to_string(k);
                break;
            }
            w = std::move(*next);
        }
        if (!ok) continue;
        if (!std::all_of(w.messages.begin(), w.messages.end(), is_valid_message)) {
            last_failure = "perturbed message left its valid range";
            continue;
        }
        if (const ClassLabel got = signature_class(w); got != target) {
            last_failure = "signature matched " + std::string(to_string(got));
            continue;
        }
        if (!corpus.empty() && f_novel(w, corpus) <= 0.0) {
            last_failure = "duplicate of an existing window";
            continue;
        }
        w.label = target;
        return w;
    }
    throw GenerationError(target, last_failure + " after " + std::to_string(cfg.retry_budget) + " attempts");
}

inline std::string window_id(char prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%06zu", prefix, i);
    return buf;
}

inline ingest::CorpusFile generate_corpus(const GenerationConfig& cfg, const SeedBank& seeds, CategoricalVocab vocab) {
    cfg.validate();
    const std::size_t total = cfg.plan_total();
    if (total < kClassCount) throw std::domain_error("class_plan must request at least 13 windows");
    if (seeds.templates.empty()) throw std::domain_error("seed bank is empty");
    if (cfg.transition) vocab.set_transition(*cfg.transition);

    ingest::CorpusFile out;
    out.provenance = "aatm rng_seed=" + std::to_string(cfg.rng_seed);
    quality::ClassCounts produced{};
    out.windows.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        // Next class: the one with the most windows still owed.
        std::size_t cls = 0;
        for (std::size_t c = 1; c < kClassCount; ++c) {
            if (cfg.class_plan[c] - produced[c] > cfg.class_plan[cls] - produced[cls]) cls = c;
        }
        const std::uint64_t stream = detail::splitmix64(cfg.rng_seed ^ detail::splitmix64(i + 1));
        const MessageWindow& seed = seeds.templates[stream % seeds.templates.size()];
        MessageWindow w = generate_window(seed, kAllClasses[cls], cfg, vocab, out.windows, stream, produced);
        w.window_id = window_id('w', i);
        out.windows.push_back(std::move(w));
        ++produced[cls];
    }
    return out;
}

// Convex mix of two windows: numeric fields interpolated then projected,
// categoricals and label from the parent with weight >= 0.5.
inline MessageWindow multimix_window(const MessageWindow& a, const MessageWindow& b, double weight_a) {
    if (weight_a < 0 || weight_a > 1) throw std::domain_error("mixing weight must lie in [0,1]");
    const bool a_heavy = weight_a >= 0.5;
    const MessageWindow& heavy = a_heavy ? a : b;
    const MessageWindow& light = a_heavy ? b : a;
    const double wh = a_heavy ? weight_a : 1.0 - weight_a;
    MessageWindow out = heavy;
    for (std::size_t i = 0; i < std::min(heavy.size(), light.size()); ++i) {
        const NumericVector h = numeric_vector(heavy.messages[i]);
        const NumericVector l = numeric_vector(light.messages[i]);
        NumericVector mix{};
        for (std::size_t f = 0; f < kNumericCount; ++f) mix[f] = wh * h[f] + (1.0 - wh) * l[f];
        assign_numeric(out.messages[i], mix);
    }
    return out;
}

inline ingest::CorpusFile multimix_baseline(std::span<const MessageWindow> seeds, std::size_t count,
                                            std::uint64_t rng_seed) {
    if (seeds.size() < 2) throw std::domain_error("multimix needs at least two seed windows");
    std::mt19937_64 rng(rng_seed);
    std::uniform_int_distribution<std::size_t> pick(0, seeds.size() - 1);
    std::uniform_real_distribution<double> weight(0.0, 1.0);
    ingest::CorpusFile out;
    out.provenance = "multimix rng_seed=" + std::to_string(rng_seed);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t a = pick(rng);
        std::size_t b = pick(rng);
        while (b == a) b = pick(rng);
        MessageWindow w = multimix_window(seeds[a], seeds[b], weight(rng));
        w.window_id = window_id('m', i);
        out.windows.push_back(std::move(w));
    }
    return out;
}

}  // namespace goose::aatm
