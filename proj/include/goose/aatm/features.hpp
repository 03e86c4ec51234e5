#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "goose/core/message.hpp"

namespace goose::aatm {

enum class Numeric : std::uint8_t { Hour, Minute, Second, Micro, Appid, StNum, SqNum, Data1, Data2 };
inline constexpr std::size_t kNumericCount = 9;
using NumericVector = std::array<double, kNumericCount>;

constexpr std::size_t idx(Numeric f) { return static_cast<std::size_t>(f); }

// Inclusive upper bound of each field; all lower bounds are 0.
inline constexpr NumericVector kNumericMax = {23, 59, 59, 999'999, kAppidMax, 4'294'967'295.0,
                                              4'294'967'295.0, 1, 1};

inline NumericVector numeric_vector(const GooseMessage& m) {
    return {static_cast<double>(m.time_hour), static_cast<double>(m.time_minute),
            static_cast<double>(m.time_second), static_cast<double>(m.time_micro),
            static_cast<double>(m.appid), static_cast<double>(m.st_num),
            static_cast<double>(m.sq_num), static_cast<double>(m.data1),
            static_cast<double>(m.data2)};
}

// Clamp into range, round integers, wrap st_num modulo 2^32.
inline NumericVector project_numeric(const NumericVector& v) {
    constexpr double kWrap = 4'294'967'296.0;
    NumericVector out{};
    for (std::size_t f = 0; f < kNumericCount; ++f) {
        double x = std::isnan(v[f]) ? 0.0 : std::round(v[f]);
        if (f == idx(Numeric::StNum)) {
            x = std::fmod(x, kWrap);
            if (x < 0) x += kWrap;
        } else {
            x = std::clamp(x, 0.0, kNumericMax[f]);
        }
        out[f] = x + 0.0;  // normalizes -0
    }
    return out;
}

// Writes a projected vector into a message's numeric fields.
inline void assign_numeric(GooseMessage& m, const NumericVector& raw) {
    const NumericVector v = project_numeric(raw);
    m.time_hour = static_cast<std::int64_t>(v[0]);
    m.time_minute = static_cast<std::int64_t>(v[1]);
    m.time_second = static_cast<std::int64_t>(v[2]);
    m.time_micro = static_cast<std::int64_t>(v[3]);
    m.appid = static_cast<std::uint32_t>(v[4]);
    m.st_num = static_cast<std::uint32_t>(v[5]);
    m.sq_num = static_cast<std::uint32_t>(v[6]);
    m.data1 = static_cast<std::uint8_t>(v[7]);
    m.data2 = static_cast<std::uint8_t>(v[8]);
}

}  // namespace goose::aatm
