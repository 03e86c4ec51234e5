#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "goose/aatm/config.hpp"
#include "goose/core/message.hpp"

namespace goose::aatm {

// Categorical features in mutation order.
enum class Categorical : std::uint8_t { DM, SM, Type, Dataset, Goid };

constexpr std::size_t idx(Categorical c) { return static_cast<std::size_t>(c); }

inline std::string& categorical_ref(GooseMessage& m, std::size_t j) {
    switch (j) {
        case 0: return m.dm;
        case 1: return m.sm;
        case 2: return m.eth_type;
        case 3: return m.dataset_name;
        case 4: return m.goid;
    }
    throw std::out_of_range("categorical feature index");
}

inline const std::string& categorical_ref(const GooseMessage& m, std::size_t j) {
    return categorical_ref(const_cast<GooseMessage&>(m), j);
}

// Rule 4 is the only rule a categorical change triggers directly.
inline TransitionMatrix default_transition_matrix() {
    TransitionMatrix t{};
    t[3].fill(1.0);
    return t;
}

class CategoricalVocab {
public:
    CategoricalVocab() : transition_(default_transition_matrix()) {}

    // Appends a value if absent; returns its index.
    std::size_t add(std::size_t j, const std::string& value) {
        auto& idx = index_.at(j);
        if (auto it = idx.find(value); it != idx.end()) return it->second;
        auto& vals = values_.at(j);
        idx.emplace(value, vals.size());
        vals.push_back(value);
        return vals.size() - 1;
    }

    void add_message(const GooseMessage& m) {
        for (std::size_t j = 0; j < kCategoricalCount; ++j) add(j, categorical_ref(m, j));
    }

    static CategoricalVocab from_windows(std::span<const MessageWindow> windows) {
        CategoricalVocab v;
        for (const auto& w : windows)
            for (const auto& m : w.messages) v.add_message(m);
        return v;
    }

    const std::vector<std::string>& values(std::size_t j) const { return values_.at(j); }
    std::size_t size(std::size_t j) const { return values_.at(j).size(); }

    std::size_t index_of(std::size_t j, const std::string& value) const {
        const auto& idx = index_.at(j);
        auto it = idx.find(value);
        if (it == idx.end()) throw std::domain_error("value '" + value + "' missing from vocabulary");
        return it->second;
    }

    const TransitionMatrix& transition() const { return transition_; }
    void set_transition(const TransitionMatrix& t) { transition_ = t; }

private:
    std::array<std::vector<std::string>, kCategoricalCount> values_;
    std::array<std::unordered_map<std::string, std::size_t>, kCategoricalCount> index_;
    TransitionMatrix transition_;
};

// Round half away from zero.
inline std::int64_t round_half_away(double x) { return static_cast<std::int64_t>(std::round(x)); }

// (index + Round(m)) mod size, always in [0, size).
inline std::size_t mutate_index(std::size_t index, double m, std::size_t size) {
    if (size == 0) throw std::domain_error("empty vocabulary");
    const auto n = static_cast<std::int64_t>(size);
    // fmod is exact, so huge mutations wrap without integer overflow.
    const auto step = static_cast<std::int64_t>(std::fmod(std::round(m), static_cast<double>(n)));
    const std::int64_t shifted = (static_cast<std::int64_t>(index) + step) % n;
    return static_cast<std::size_t>(shifted < 0 ? shifted + n : shifted);
}

}  // namespace goose::aatm
