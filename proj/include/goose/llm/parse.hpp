#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "goose/core/message.hpp"

namespace goose::llm {

struct DetectionResponse {
    std::string window_id;
    std::optional<ClassLabel> label;
    std::string reasoning;
    bool parse_ok = false;
    std::string error;
};

// Lenient class-name match: case, spaces, '-' and '_' are ignored.
inline std::optional<ClassLabel> normalize_class_name(std::string_view text) {
    const auto squash = [](std::string_view s) {
        std::string out;
        for (char c : s) {
            if (c == ' ' || c == '-' || c == '_') continue;
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        return out;
    };
    const std::string key = squash(text);
    for (std::size_t i = 0; i < kClassCount; ++i) {
        if (squash(kClassNames[i]) == key) return kAllClasses[i];
    }
    if (key == "dataintegrity" || key == "datainjection") return ClassLabel::DI;
    if (key == "replay") return ClassLabel::RE;
    return std::nullopt;
}

struct Verdict {
    std::size_t dataset = 0;  // 1-based
    std::optional<ClassLabel> label;
    std::string raw;
    std::string reasoning;
};

// Every "Dataset #n: NORMAL | ANOMALY (<class> Class)" verdict in order of appearance.
inline std::vector<Verdict> extract_verdicts(const std::string& text) {
    static const std::regex re(R"(dataset\s*#\s*(\d+)\s*:\s*(normal\b|anomaly\s*\(\s*([^()]*?)\s*(?:class\s*)?\)))",
                               std::regex::icase);
    std::vector<Verdict> out;
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        Verdict v;
        v.dataset = std::stoul(m[1].str());
        v.raw = m[2].str();
        v.label = m[3].matched ? normalize_class_name(m[3].str()) : std::optional{ClassLabel::Normal};
        if (v.label == ClassLabel::Normal && m[3].matched) v.label.reset();
        out.push_back(v);
        spans.emplace_back(static_cast<std::size_t>(m.position(0)), static_cast<std::size_t>(m.position(0) + m.length(0)));
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::size_t end = i + 1 < spans.size() ? spans[i + 1].first : text.size();
        std::string body = text.substr(spans[i].second, end - spans[i].second);
        if (auto r = body.find("Reasoning:"); r != std::string::npos) body = body.substr(r + 10);
        const auto b = body.find_first_not_of(" \t\r\n");
        const auto e = body.find_last_not_of(" \t\r\n");
        out[i].reasoning = b == std::string::npos ? "" : body.substr(b, e - b + 1);
    }
    return out;
}

// One entry per expected dataset; missing, duplicated or unrecognized verdicts
// are flagged with parse_ok = false and no label.
inline std::vector<DetectionResponse> parse_response(const std::string& text, std::size_t expected) {
    std::vector<DetectionResponse> out(expected);
    std::map<std::size_t, std::vector<Verdict>> by_index;
    for (auto& v : extract_verdicts(text)) by_index[v.dataset].push_back(std::move(v));
    for (std::size_t i = 0; i < expected; ++i) {
        DetectionResponse& r = out[i];
        auto it = by_index.find(i + 1);
        if (it == by_index.end()) {
            r.error = "no verdict for dataset #" + std::to_string(i + 1);
        } else if (it->second.size() > 1) {
            r.error = "duplicate verdicts for dataset #" + std::to_string(i + 1);
        } else if (!it->second.front().label) {
            r.error = "unrecognized verdict '" + it->second.front().raw + "'";
            r.reasoning = it->second.front().reasoning;
        } else {
            r.label = it->second.front().label;
            r.reasoning = it->second.front().reasoning;
            r.parse_ok = true;
        }
    }
    return out;
}

// All verdicts present in the text, numbered as they appear.
inline std::vector<DetectionResponse> parse_response(const std::string& text) {
    std::size_t n = 0;
    for (const auto& v : extract_verdicts(text)) n = std::max(n, v.dataset);
    return parse_response(text, n);
}

}  // namespace goose::llm
