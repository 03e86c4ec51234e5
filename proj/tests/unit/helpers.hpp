#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "goose/core/message.hpp"

namespace goose::testing {

inline GooseMessage msg_at(std::int64_t clock, std::uint32_t st, std::uint32_t sq, int d1 = 0, int d2 = 0,
                           const std::string& dm = "01 00 03", const std::string& sm = "27 34 31") {
    GooseMessage m;
    set_micros_of_day(m, clock);
    m.dm = dm;
    m.sm = sm;
    m.dataset_name = "IED1CFG/LLN0$GOOSE1";
    m.goid = "IED1_GCB1";
    m.st_num = st;
    m.sq_num = sq;
    m.data1 = static_cast<std::uint8_t>(d1);
    m.data2 = static_cast<std::uint8_t>(d2);
    return m;
}

// Heartbeat stream: constant state, sq counting up, fixed gap.
inline MessageWindow periodic(std::size_t n, std::int64_t gap = kMicrosPerSecond, std::uint32_t st = 27,
                              std::uint32_t sq = 150, std::int64_t start = 10 * 3'600'000'000ll) {
    MessageWindow w;
    w.window_id = "t";
    for (std::size_t i = 0; i < n; ++i)
        w.messages.push_back(msg_at(start + static_cast<std::int64_t>(i) * gap, st, sq + static_cast<std::uint32_t>(i)));
    return w;
}

// Small-alphabet random window so that every rule fires with useful frequency.
inline MessageWindow random_window(std::mt19937_64& rng, std::size_t n) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    MessageWindow w;
    w.window_id = "r";
    std::int64_t clock = 3'600'000'000ll;
    std::uint32_t st = 10, sq = 100;
    int d1 = 0, d2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int kind = pick(0, 9);
        if (kind == 0) clock += pick(0, 10);
        else if (kind == 1) clock += 11'000'000 + pick(0, 30'000'000);
        else clock += pick(500'000, 1'500'000);
        if (pick(0, 6) == 0) st += static_cast<std::uint32_t>(pick(-1, 2));
        sq += static_cast<std::uint32_t>(pick(0, 8) == 0 ? pick(-1, 3) : 1);
        if (pick(0, 5) == 0) d1 ^= 1;
        if (pick(0, 7) == 0) d2 ^= 1;
        GooseMessage m = msg_at(clock, st, sq, d1, d2, pick(0, 9) == 0 ? "01 00 04" : "01 00 03");
        if (pick(0, 15) == 0) m.appid = 4;
        if (pick(0, 20) == 0) m.time_second = 61;
        w.messages.push_back(m);
    }
    return w;
}

// Heartbeats with occasional state changes (data flip, st+1, sq keeps counting).
inline MessageWindow compliant_window(std::mt19937_64& rng, std::size_t n) {
    auto pick = [&](long long lo, long long hi) { return std::uniform_int_distribution<long long>(lo, hi)(rng); };
    MessageWindow w;
    w.window_id = "c";
    std::int64_t clock = pick(1, 20) * 3'600'000'000ll;
    auto st = static_cast<std::uint32_t>(pick(0, 20) == 0 ? 0xFFFF'FFFEll : pick(1, 5000));
    auto sq = static_cast<std::uint32_t>(pick(0, 10000));
    int d1 = static_cast<int>(pick(0, 1)), d2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            if (pick(0, 4) == 0) {
                clock += pick(2'000, 8'000);
                if (pick(0, 1)) d1 ^= 1; else d2 ^= 1;
                ++st;
            } else {
                clock += pick(900'000, 1'100'000);
            }
            ++sq;
        }
        w.messages.push_back(msg_at(clock, st, sq, d1, d2));
    }
    return w;
}

}  // namespace goose::testing
