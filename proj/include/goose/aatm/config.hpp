#pragma once

#include <array>
#include <bitset>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "goose/core/message.hpp"
#include "goose/core/rules.hpp"

namespace goose::aatm {

inline constexpr std::size_t kCategoricalCount = 5;
using TransitionMatrix = std::array<std::array<double, kCategoricalCount>, kRuleCount>;

// Sequence/state rules 0.175, timestamp 0.15, identifiers and the rest 0.10.
inline constexpr std::array<double, kRuleCount> kDefaultRuleWeights = {0.175, 0.10, 0.175, 0.10,
                                                                       0.15,  0.10, 0.10,  0.10};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GenerationConfig {
    double alpha = 0.4;
    double beta = 0.3;
    double gamma = 0.3;
    double lambda_violation = 1.0;
    std::array<double, kRuleCount> rule_weights = kDefaultRuleWeights;
    // Rules eligible as deliberate-violation targets; bit (r - 1).
    std::bitset<kRuleCount> target_rules;
    std::array<std::size_t, kClassCount> class_plan{};
    std::size_t window_length = 10;
    std::uint64_t rng_seed = 0;
    std::size_t retry_budget = 32;
    // Overrides the default categorical transition matrix when set.
    std::optional<TransitionMatrix> transition;

    std::size_t plan_total() const {
        std::size_t t = 0;
        for (auto c : class_plan) t += c;
        return t;
    }

    void validate() const {
        if (std::abs(alpha + beta + gamma - 1.0) > 1e-9) throw ConfigError("alpha + beta + gamma must equal 1");
        if (alpha < 0 || beta < 0 || gamma < 0) throw ConfigError("alpha, beta, gamma must be non-negative");
        if (!(lambda_violation >= 0) || !std::isfinite(lambda_violation))
            throw ConfigError("lambda_violation must be finite and non-negative");
        for (double w : rule_weights) {
            if (!(w > 0.0 && w < 2.0)) throw ConfigError("rule weights must lie in (0, 2)");
        }
        if (window_length < 2) throw ConfigError("window_length must be at least 2");
        if (retry_budget == 0) throw ConfigError("retry_budget must be positive");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: '" + v + "'");
    }
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        const auto u = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a non-negative integer: '" + v + "'");
    }
}

}  // namespace detail

// Plain "key = value" lines; '#' starts a comment. Keys mirror the struct fields,
// plus `class_plan.<Label>` (or `class_plan.*` for every class) and
// `transition.<rule>` with five comma-separated values.
inline GenerationConfig parse_config(std::istream& in) {
    GenerationConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));

        if (key == "alpha") cfg.alpha = detail::to_double(key, value);
        else if (key == "beta") cfg.beta = detail::to_double(key, value);
        else if (key == "gamma") cfg.gamma = detail::to_double(key, value);
        else if (key == "lambda_violation") cfg.lambda_violation = detail::to_double(key, value);
        else if (key == "window_length") cfg.window_length = detail::to_uint(key, value);
        else if (key == "rng_seed") cfg.rng_seed = detail::to_uint(key, value);
        else if (key == "retry_budget") cfg.retry_budget = detail::to_uint(key, value);
        else if (key == "rule_weights") {
            const auto items = detail::split_list(value);
            if (items.size() != kRuleCount) throw ConfigError("rule_weights needs 8 values");
            for (std::size_t i = 0; i < kRuleCount; ++i) cfg.rule_weights[i] = detail::to_double(key, items[i]);
        } else if (key == "target_rules") {
            cfg.target_rules.reset();
            for (const auto& item : detail::split_list(value)) {
                const auto r = detail::to_uint(key, item);
                if (r < 1 || r > kRuleCount) throw ConfigError("target_rules entries must be in [1,8]");
                cfg.target_rules.set(r - 1);
            }
        } else if (key.rfind("class_plan.", 0) == 0) {
            const std::string name = key.substr(11);
            const auto count = detail::to_uint(key, value);
            if (name == "*") {
                cfg.class_plan.fill(count);
            } else {
                const auto label = parse_class_label(name);
                if (!label) throw ConfigError("unknown class in '" + key + "'");
                cfg.class_plan[class_index(*label)] = count;
            }
        } else if (key.rfind("transition.", 0) == 0) {
            const auto r = detail::to_uint(key, key.substr(11));
            if (r < 1 || r > kRuleCount) throw ConfigError("transition row must be a rule id in [1,8]");
            const auto items = detail::split_list(value);
            if (items.size() != kCategoricalCount) throw ConfigError(key + " needs 5 values");
            if (!cfg.transition) cfg.transition.emplace();
            for (std::size_t j = 0; j < kCategoricalCount; ++j)
                (*cfg.transition)[r - 1][j] = detail::to_double(key, items[j]);
        } else {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

inline GenerationConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    return parse_config(in);
}

// Canonical text form; parse_config(to_text(c)) reproduces c.
inline std::string to_text(const GenerationConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "alpha = " << c.alpha << "\nbeta = " << c.beta << "\ngamma = " << c.gamma
       << "\nlambda_violation = " << c.lambda_violation << "\nrule_weights = ";
    for (std::size_t i = 0; i < kRuleCount; ++i) os << (i ? ", " : "") << c.rule_weights[i];
    os << "\ntarget_rules = ";
    bool first = true;
    for (std::size_t i = 0; i < kRuleCount; ++i) {
        if (!c.target_rules[i]) continue;
        os << (first ? "" : ", ") << i + 1;
        first = false;
    }
    os << "\nwindow_length = " << c.window_length << "\nrng_seed = " << c.rng_seed
       << "\nretry_budget = " << c.retry_budget << '\n';
    for (std::size_t i = 0; i < kClassCount; ++i) os << "class_plan." << kClassNames[i] << " = " << c.class_plan[i] << '\n';
    if (c.transition) {
        for (std::size_t r = 0; r < kRuleCount; ++r) {
            os << "transition." << r + 1 << " = ";
            for (std::size_t j = 0; j < kCategoricalCount; ++j) os << (j ? ", " : "") << (*c.transition)[r][j];
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace goose::aatm
