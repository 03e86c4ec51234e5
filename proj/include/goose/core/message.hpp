#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace goose {

// Closed set of window classes. Order is the canonical matrix/CSV order.
enum class ClassLabel : std::uint8_t {
    Normal,
    DI,
    DOS,
    RE,
    SPTime,
    SPDM,
    SPSM,
    SPType,
    SPAppid,
    SPDataset,
    SPGoid,
    PacketLoss,
    ZeroDay,
};

inline constexpr std::size_t kClassCount = 13;

inline constexpr std::array<ClassLabel, kClassCount> kAllClasses = {
    ClassLabel::Normal,  ClassLabel::DI,        ClassLabel::DOS,    ClassLabel::RE,
    ClassLabel::SPTime,  ClassLabel::SPDM,      ClassLabel::SPSM,   ClassLabel::SPType,
    ClassLabel::SPAppid, ClassLabel::SPDataset, ClassLabel::SPGoid, ClassLabel::PacketLoss,
    ClassLabel::ZeroDay,
};

inline constexpr std::array<std::string_view, kClassCount> kClassNames = {
    "Normal", "DI",       "DOS",        "RE",     "SP-time",    "SP-DM",   "SP-SM",
    "SP-type", "SP-appid", "SP-dataset", "SP-goid", "PacketLoss", "ZeroDay",
};

constexpr std::size_t class_index(ClassLabel c) { return static_cast<std::size_t>(c); }

constexpr std::string_view to_string(ClassLabel c) { return kClassNames[class_index(c)]; }

// Exact, case-sensitive match against the serialized names.
inline std::optional<ClassLabel> parse_class_label(std::string_view text) {
    for (std::size_t i = 0; i < kClassCount; ++i) {
        if (kClassNames[i] == text) return kAllClasses[i];
    }
    return std::nullopt;
}

// One GOOSE record: 9 numerical and 5 categorical features.
struct GooseMessage {
    std::int64_t time_hour = 0;
    std::int64_t time_minute = 0;
    std::int64_t time_second = 0;
    std::int64_t time_micro = 0;
    std::string dm = "01 00 03";
    std::string sm = "27 34 31";
    std::string eth_type = "88b8";
    std::uint32_t appid = 3;
    std::string dataset_name;
    std::string goid;
    std::uint32_t st_num = 0;
    std::uint32_t sq_num = 0;
    std::uint8_t data1 = 0;
    std::uint8_t data2 = 0;

    friend bool operator==(const GooseMessage&, const GooseMessage&) = default;
};

struct MessageWindow {
    std::vector<GooseMessage> messages;
    std::optional<ClassLabel> label;
    std::string window_id;

    std::size_t size() const { return messages.size(); }
    bool empty() const { return messages.empty(); }

    friend bool operator==(const MessageWindow&, const MessageWindow&) = default;
};

inline constexpr std::int64_t kMicrosPerSecond = 1'000'000;
inline constexpr std::int64_t kMicrosPerDay = 86'400 * kMicrosPerSecond;
inline constexpr std::uint64_t kStNumMax = 0xFFFF'FFFFull;
inline constexpr std::uint32_t kAppidMax = 0xFFFF;

// Clock position within the day; meaningful for out-of-range fields too.
constexpr std::int64_t micros_of_day(const GooseMessage& m) {
    return ((m.time_hour * 60 + m.time_minute) * 60 + m.time_second) * kMicrosPerSecond +
           m.time_micro;
}

// Writes a clock position into the four time fields. Input must lie in [0, kMicrosPerDay).
inline void set_micros_of_day(GooseMessage& m, std::int64_t t) {
    if (t < 0 || t >= kMicrosPerDay) throw std::domain_error("clock position outside the day");
    m.time_micro = t % kMicrosPerSecond;
    std::int64_t secs = t / kMicrosPerSecond;
    m.time_second = secs % 60;
    m.time_minute = (secs / 60) % 60;
    m.time_hour = secs / 3600;
}

constexpr bool timestamp_in_format(const GooseMessage& m) {
    return m.time_hour >= 0 && m.time_hour <= 23 && m.time_minute >= 0 && m.time_minute <= 59 &&
           m.time_second >= 0 && m.time_second <= 59 && m.time_micro >= 0 &&
           m.time_micro <= 999'999;
}

// Canonical hex text is lowercase, as produced by the frame decoder.
inline bool is_hex_digit(char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); }

// "xx xx xx": three space-separated two-digit hex groups.
inline bool is_mac_triplet(std::string_view s) {
    if (s.size() != 8) return false;
    for (std::size_t i = 0; i < 8; ++i) {
        if (i == 2 || i == 5) {
            if (s[i] != ' ') return false;
        } else if (!is_hex_digit(s[i])) {
            return false;
        }
    }
    return true;
}

inline bool is_eth_type_text(std::string_view s) {
    if (s.size() != 4) return false;
    for (char c : s) {
        if (!is_hex_digit(c)) return false;
    }
    return true;
}

// Text fields travel through CSV unquoted.
inline bool is_plain_text_field(std::string_view s) {
    for (char c : s) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') return false;
    }
    return true;
}

// Problems with a message's non-time invariants, empty when valid. Time fields
// are data judged by the timestamp rule and only need to be non-negative.
inline std::vector<std::string> structural_problems(const GooseMessage& m) {
    std::vector<std::string> out;
    if (m.time_hour < 0 || m.time_minute < 0 || m.time_second < 0 || m.time_micro < 0)
        out.emplace_back("negative time field");
    if (!is_mac_triplet(m.dm)) out.emplace_back("dm is not a MAC triplet");
    if (!is_mac_triplet(m.sm)) out.emplace_back("sm is not a MAC triplet");
    if (!is_eth_type_text(m.eth_type)) out.emplace_back("type is not 4 hex digits");
    if (m.appid > kAppidMax) out.emplace_back("appid exceeds 16 bits");
    if (m.data1 > 1) out.emplace_back("data1 not in {0,1}");
    if (m.data2 > 1) out.emplace_back("data2 not in {0,1}");
    if (!is_plain_text_field(m.dataset_name) || !is_plain_text_field(m.goid))
        out.emplace_back("dataset/goid contains a delimiter");
    if (m.dataset_name.size() > 0xFFFF || m.goid.size() > 0xFFFF)
        out.emplace_back("dataset/goid too long");
    return out;
}

// Full type invariants, including the calendar ranges of the time fields.
inline bool is_valid_message(const GooseMessage& m) {
    return timestamp_in_format(m) && structural_problems(m).empty();
}

}  // namespace goose
