#pragma once

#include <algorithm>
#include <chrono>
#include <fstream>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "goose/core/message.hpp"
#include "goose/llm/backend.hpp"
#include "goose/llm/parse.hpp"
#include "goose/llm/prompt.hpp"

namespace goose::llm {

struct DetectOptions {
    std::size_t batch_size = 5;
    std::size_t max_retries = 3;
    std::chrono::milliseconds initial_backoff{200};
    double backoff_factor = 2.0;
    std::size_t max_in_flight = 2;
    // Append-only JSONL audit log of every exchange; empty disables it.
    std::string transcript_path;
    std::vector<FeedbackExample> feedback;
};

namespace detail {

struct BatchResult {
    std::vector<DetectionResponse> responses;
    std::vector<nlohmann::json> transcript;
};

inline BatchResult run_batch(ChatBackend& backend, std::span<const MessageWindow> batch, std::size_t batch_no,
                             const DetectOptions& opts) {
    BatchResult out;
    PromptOptions popts;
    popts.max_batch = opts.batch_size;
    popts.feedback = opts.feedback;
    const PromptBundle prompt = build_prompt(batch, popts);
    const std::vector<ChatMessage> messages = {{"system", prompt.system_preamble}, {"user", prompt.user_message()}};

    nlohmann::json ids = nlohmann::json::array();
    for (const auto& w : batch) ids.push_back(w.window_id);

    auto backoff = opts.initial_backoff;
    std::string last_error;
    for (std::size_t attempt = 0; attempt <= opts.max_retries; ++attempt) {
        nlohmann::json entry = {{"batch", batch_no}, {"attempt", attempt}, {"windows", ids}, {"backend", backend.name()}};
        try {
            const std::string reply = backend.complete(messages);
            entry["request"] = {{"system", messages[0].content}, {"user", messages[1].content}};
            entry["response"] = reply;
            out.transcript.push_back(std::move(entry));
            out.responses = parse_response(reply, batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i) out.responses[i].window_id = batch[i].window_id;
            return out;
        } catch (const TransportError& e) {
            last_error = e.what();
            entry["error"] = last_error;
            out.transcript.push_back(std::move(entry));
            if (attempt < opts.max_retries) {
                std::this_thread::sleep_for(backoff);
                backoff = std::chrono::milliseconds(static_cast<long long>(backoff.count() * opts.backoff_factor));
            }
        }
    }
    for (const auto& w : batch) {
        DetectionResponse r;
        r.window_id = w.window_id;
        r.error = "transport failure: " + last_error;
        out.responses.push_back(std::move(r));
    }
    return out;
}

}  // namespace detail

// One response per window, in input order. Batches run concurrently up to
// max_in_flight; transcripts are written in batch order.
inline std::vector<DetectionResponse> detect(ChatBackend& backend, std::span<const MessageWindow> windows,
                                             const DetectOptions& opts = {}) {
    if (opts.batch_size == 0) throw std::domain_error("batch_size must be positive");
    std::vector<std::span<const MessageWindow>> batches;
    for (std::size_t i = 0; i < windows.size(); i += opts.batch_size)
        batches.push_back(windows.subspan(i, std::min(opts.batch_size, windows.size() - i)));

    std::vector<detail::BatchResult> results(batches.size());
    const std::size_t lanes = backend.order_sensitive() ? 1 : std::max<std::size_t>(1, opts.max_in_flight);
    for (std::size_t start = 0; start < batches.size(); start += lanes) {
        std::vector<std::future<detail::BatchResult>> wave;
        for (std::size_t b = start; b < std::min(batches.size(), start + lanes); ++b) {
            wave.push_back(std::async(std::launch::async, [&, b] { return detail::run_batch(backend, batches[b], b, opts); }));
        }
        for (std::size_t i = 0; i < wave.size(); ++i) results[start + i] = wave[i].get();
    }

    std::vector<DetectionResponse> out;
    out.reserve(windows.size());
    std::ofstream log;
    if (!opts.transcript_path.empty()) {
        log.open(opts.transcript_path, std::ios::app);
        if (!log) throw std::runtime_error("cannot open transcript " + opts.transcript_path);
    }
    for (auto& r : results) {
        if (log) {
            for (const auto& e : r.transcript) log << e.dump() << '\n';
        }
        for (auto& d : r.responses) out.push_back(std::move(d));
    }
    return out;
}

// Appends misclassified windows to a JSONL feedback corpus.
inline std::size_t append_feedback(const std::string& path, std::span<const MessageWindow> windows,
                                   std::span<const DetectionResponse> responses) {
    if (windows.size() != responses.size()) throw std::domain_error("feedback: size mismatch");
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open feedback file " + path);
    std::size_t written = 0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows[i];
        if (!w.label || (responses[i].parse_ok && responses[i].label == w.label)) continue;
        nlohmann::json j = {{"window_id", w.window_id},
                            {"truth", std::string(to_string(*w.label))},
                            {"predicted", responses[i].label ? std::string(to_string(*responses[i].label)) : ""},
                            {"rendering", render_window(w)}};
        out << j.dump() << '\n';
        ++written;
    }
    return written;
}

inline std::vector<FeedbackExample> load_feedback(const std::string& path, std::size_t limit = 5) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open feedback file " + path);
    std::vector<FeedbackExample> out;
    std::string line;
    while (std::getline(in, line) && out.size() < limit) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        const auto truth = parse_class_label(j.at("truth").get<std::string>());
        if (!truth) throw std::domain_error("feedback: unknown class");
        out.push_back({j.at("rendering").get<std::string>(), *truth});
    }
    return out;
}

}  // namespace goose::llm
