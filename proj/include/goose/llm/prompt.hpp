#pragma once

#include <array>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "goose/core/message.hpp"
#include "goose/core/rules.hpp"

namespace goose::llm {

inline constexpr std::array<std::string_view, kRuleCount> kRuleStatements = {
    "Rule 1 (sequence): for a fixed DM/SM pair, each message's sqnum must equal the previous sqnum plus one.",
    "Rule 2 (data injection): data1 or data2 flipping while stnum is unchanged and sqnum keeps counting up "
    "indicates injected data.",
    "Rule 3 (state counter): for a fixed DM/SM pair, stnum either repeats or grows by exactly one; the only "
    "allowed decrease is the wrap from 4294967295 to 0.",
    "Rule 4 (field integrity): DM, SM, type, appid, dataset and goid must not change between consecutive "
    "messages of a stream.",
    "Rule 5 (timestamp): hour 0-23, minute 0-59, second 0-59, microsecond 0-999999.",
    "Rule 6 (flooding): ten or more consecutive messages spaced at most 10 microseconds apart indicate DOS.",
    "Rule 7 (silence): a gap of more than 10 seconds between consecutive messages indicates a timing attack "
    "(SP-time).",
    "Rule 8 (replay): data1 or data2 flipping while both stnum and sqnum stay the same indicates a replayed "
    "message (RE).",
};

inline constexpr std::string_view kRenderHeader =
    "row,time_hour,time_minute,time_second,time_micro,DM,SM,type,appid,dataset,goid,stnum,sqnum,data1,data2";

// A windowed example with its known class, re-embedded from the feedback corpus.
struct FeedbackExample {
    std::string rendering;
    ClassLabel truth = ClassLabel::Normal;
};

struct PromptBundle {
    std::string system_preamble;
    std::vector<std::string> window_renderings;
    std::string expected_output_grammar;

    std::string user_message() const {
        std::string out;
        for (std::size_t i = 0; i < window_renderings.size(); ++i) {
            out += "Dataset #" + std::to_string(i + 1) + ":\n" + window_renderings[i] + '\n';
        }
        return out + expected_output_grammar;
    }
};

// Rows in CSV column order, numbered from 1; labels are never shown.
inline std::string render_window(const MessageWindow& w) {
    std::ostringstream os;
    os << kRenderHeader << '\n';
    std::size_t row = 1;
    for (const GooseMessage& m : w.messages) {
        os << row++ << ',' << m.time_hour << ',' << m.time_minute << ',' << m.time_second << ','
           << m.time_micro << ',' << m.dm << ',' << m.sm << ',' << m.eth_type << ',' << m.appid << ','
           << m.dataset_name << ',' << m.goid << ',' << m.st_num << ',' << m.sq_num << ',' << int{m.data1}
           << ',' << int{m.data2} << '\n';
    }
    return os.str();
}

inline std::string class_list() {
    std::string out;
    for (std::size_t i = 1; i < kClassCount; ++i) out += (i > 1 ? ", " : "") + std::string(kClassNames[i]);
    return out;
}

struct PromptOptions {
    std::size_t max_batch = 5;
    std::vector<FeedbackExample> feedback;
};

inline PromptBundle build_prompt(std::span<const MessageWindow> windows, const PromptOptions& opts = {}) {
    if (windows.empty()) throw std::domain_error("build_prompt: no windows");
    if (windows.size() > opts.max_batch)
        throw std::domain_error("build_prompt: batch of " + std::to_string(windows.size()) + " exceeds limit " +
                                std::to_string(opts.max_batch));
    PromptBundle b;
    std::string& p = b.system_preamble;
    p = "You inspect IEC 61850 GOOSE traffic. Each dataset is a table of consecutive messages. "
        "Check every dataset against the following rules, tracking DM/SM pairs as separate streams:\n";
    for (auto rule : kRuleStatements) p += "- " + std::string(rule) + '\n';
    p += "Anomaly classes: " + class_list() +
         ". SP-<field> means the named field was spoofed; PacketLoss means sqnum skipped ahead; "
         "ZeroDay covers violations that fit no other class.\n";
    if (!opts.feedback.empty()) {
        p += "Previously misjudged examples with their correct class:\n";
        for (const auto& f : opts.feedback) p += f.rendering + "Correct class: " + std::string(to_string(f.truth)) + "\n";
    }
    for (const auto& w : windows) {
        if (w.empty()) throw std::domain_error("build_prompt: empty window '" + w.window_id + "'");
        b.window_renderings.push_back(render_window(w));
    }
    b.expected_output_grammar =
        "Answer with exactly " + std::to_string(windows.size()) +
        " verdict blocks, one per dataset, in this form:\n"
        "Dataset #<n>: NORMAL\n"
        "or\n"
        "Dataset #<n>: ANOMALY (<class> Class)\n"
        "followed by one line starting with 'Reasoning:'.\n";
    return b;
}

}  // namespace goose::llm
