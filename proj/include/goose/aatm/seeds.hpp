#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "goose/aatm/vocab.hpp"
#include "goose/core/message.hpp"
#include "goose/core/rules.hpp"

namespace goose::aatm {

// Identity of one publishing device.
struct DeviceProfile {
    std::string dm;
    std::string sm;
    std::string eth_type = "88b8";
    std::uint32_t appid = 3;
    std::string dataset_name;
    std::string goid;
};

inline std::vector<DeviceProfile> default_profiles() {
    std::vector<DeviceProfile> out;
    for (int i = 0; i < 5; ++i) {
        const std::string n = std::to_string(i + 1);
        char dm[9], sm[9];
        std::snprintf(dm, sizeof dm, "01 00 %02x", 3 + i);
        std::snprintf(sm, sizeof sm, "27 34 %02x", 0x31 + i);
        out.push_back({dm, sm, "88b8", static_cast<std::uint32_t>(3 + i), "IED" + n + "CFG/LLN0$GOOSE1",
                       "IED" + n + "_GCB1"});
    }
    return out;
}

// Ethertypes offered as spoofing alternatives when the seeds only carry one.
inline constexpr std::array<const char*, 3> kAlternateEthTypes = {"88b8", "88ba", "88b9"};

struct SeedBank {
    std::vector<MessageWindow> templates;

    // Periodic heartbeat traffic with occasional state changes, one stream per
    // profile per template; every template satisfies all eight rules.
    static SeedBank synthesize(std::size_t per_profile, std::size_t window_length, std::uint64_t seed,
                               const std::vector<DeviceProfile>& profiles = default_profiles()) {
        if (window_length < 2) throw std::domain_error("seed windows need at least 2 messages");
        if (profiles.empty()) throw std::domain_error("no device profiles");
        std::mt19937_64 rng(seed);
        auto uniform = [&](std::int64_t lo, std::int64_t hi) {
            return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
        };
        SeedBank bank;
        for (std::size_t p = 0; p < profiles.size(); ++p) {
            const DeviceProfile& prof = profiles[p];
            for (std::size_t t = 0; t < per_profile; ++t) {
                MessageWindow w;
                w.window_id = "seed" + std::to_string(p) + "_" + std::to_string(t);
                w.label = ClassLabel::Normal;
                GooseMessage m;
                m.dm = prof.dm;
                m.sm = prof.sm;
                m.eth_type = prof.eth_type;
                m.appid = prof.appid;
                m.dataset_name = prof.dataset_name;
                m.goid = prof.goid;
                m.st_num = static_cast<std::uint32_t>(uniform(1, 5000));
                m.sq_num = static_cast<std::uint32_t>(uniform(0, 10000));
                m.data1 = static_cast<std::uint8_t>(uniform(0, 1));
                m.data2 = static_cast<std::uint8_t>(uniform(0, 1));
                std::int64_t clock = uniform(6, 17) * 3'600'000'000ll + uniform(0, 3'599'999'999ll);
                set_micros_of_day(m, clock);
                w.messages.push_back(m);
                for (std::size_t i = 1; i < window_length; ++i) {
                    if (uniform(0, 99) < 15) {
                        clock += uniform(2'000, 8'000);
                        if (uniform(0, 1)) m.data1 ^= 1; else m.data2 ^= 1;
                        ++m.st_num;
                    } else {
                        clock += uniform(900'000, 1'100'000);
                    }
                    ++m.sq_num;
                    set_micros_of_day(m, clock);
                    w.messages.push_back(m);
                }
                if (!evaluate_rules(w).all_compliant()) throw std::logic_error("synthesized seed is not compliant");
                bank.templates.push_back(std::move(w));
            }
        }
        return bank;
    }

    // Keeps the fully compliant windows of an existing corpus.
    static SeedBank from_windows(std::span<const MessageWindow> windows) {
        SeedBank bank;
        for (const auto& w : windows) {
            if (!w.empty() && evaluate_rules(w).all_compliant()) bank.templates.push_back(w);
        }
        if (bank.templates.empty()) throw std::domain_error("no compliant windows to seed from");
        return bank;
    }

    CategoricalVocab vocab() const {
        CategoricalVocab v = CategoricalVocab::from_windows(templates);
        for (const char* t : kAlternateEthTypes) v.add(static_cast<std::size_t>(Categorical::Type), t);
        return v;
    }
};

}  // namespace goose::aatm
