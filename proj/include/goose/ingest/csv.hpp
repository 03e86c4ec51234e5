#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "goose/core/message.hpp"

namespace goose::ingest {

inline constexpr std::string_view kCsvHeader =
    "window_id,label,time_hour,time_minute,time_second,time_micro,DM,SM,type,appid,dataset,goid,"
    "stnum,sqnum,data1,data2";
inline constexpr std::size_t kCsvColumns = 16;

struct CorpusFile {
    std::vector<MessageWindow> windows;
    // Not serialized to CSV; import records the source name here.
    std::string provenance;
};

class ImportError : public std::runtime_error {
public:
    ImportError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

inline void write_csv_row(std::ostream& os, const MessageWindow& w, const GooseMessage& m) {
    os << w.window_id << ',' << (w.label ? to_string(*w.label) : std::string_view{}) << ','
       << m.time_hour << ',' << m.time_minute << ',' << m.time_second << ',' << m.time_micro << ','
       << m.dm << ',' << m.sm << ',' << m.eth_type << ',' << m.appid << ',' << m.dataset_name << ','
       << m.goid << ',' << m.st_num << ',' << m.sq_num << ',' << int{m.data1} << ',' << int{m.data2}
       << '\n';
}

inline void export_csv(const CorpusFile& corpus, std::ostream& os) {
    std::unordered_set<std::string> seen;
    os << kCsvHeader << '\n';
    for (const MessageWindow& w : corpus.windows) {
        if (w.window_id.empty() || !is_plain_text_field(w.window_id))
            throw std::domain_error("export_csv: invalid window_id '" + w.window_id + "'");
        if (!seen.insert(w.window_id).second)
            throw std::domain_error("export_csv: duplicate window_id '" + w.window_id + "'");
        if (w.empty()) throw std::domain_error("export_csv: empty window '" + w.window_id + "'");
        for (const GooseMessage& m : w.messages) {
            if (auto p = structural_problems(m); !p.empty())
                throw std::domain_error("export_csv: window '" + w.window_id + "': " + p.front());
            write_csv_row(os, w, m);
        }
    }
}

inline std::string export_csv_string(const CorpusFile& corpus) {
    std::ostringstream os;
    export_csv(corpus, os);
    return os.str();
}

inline void export_csv_file(const CorpusFile& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    export_csv(corpus, out);
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

template <typename T>
T parse_uint(std::string_view text, std::uint64_t max, std::size_t line, const char* column) {
    std::uint64_t v = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end)
        throw ImportError(line, std::string(column) + ": not a non-negative integer: '" + std::string(text) + "'");
    if (v > max) throw ImportError(line, std::string(column) + ": out of range: " + std::string(text));
    return static_cast<T>(v);
}

}  // namespace detail

// Rows sharing a window_id must be contiguous; a window's label must not vary.
inline CorpusFile import_csv(std::istream& is, std::string provenance = {}) {
    CorpusFile corpus;
    corpus.provenance = std::move(provenance);
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(is, line)) throw ImportError(1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw ImportError(1, "header does not match the canonical column list");

    std::unordered_set<std::string> closed;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cols = detail::split_commas(line);
        if (cols.size() != kCsvColumns)
            throw ImportError(lineno, "expected 16 columns, got " + std::to_string(cols.size()));

        const std::string id(cols[0]);
        if (id.empty()) throw ImportError(lineno, "empty window_id");
        std::optional<ClassLabel> label;
        if (!cols[1].empty()) {
            label = parse_class_label(cols[1]);
            if (!label) throw ImportError(lineno, "unknown label '" + std::string(cols[1]) + "'");
        }

        GooseMessage m;
        constexpr std::uint64_t kTimeMax = 0x7FFF'FFFF;
        m.time_hour = detail::parse_uint<std::int64_t>(cols[2], kTimeMax, lineno, "time_hour");
        m.time_minute = detail::parse_uint<std::int64_t>(cols[3], kTimeMax, lineno, "time_minute");
        m.time_second = detail::parse_uint<std::int64_t>(cols[4], kTimeMax, lineno, "time_second");
        m.time_micro = detail::parse_uint<std::int64_t>(cols[5], kTimeMax, lineno, "time_micro");
        m.dm = cols[6];
        m.sm = cols[7];
        m.eth_type = cols[8];
        m.appid = detail::parse_uint<std::uint32_t>(cols[9], kAppidMax, lineno, "appid");
        m.dataset_name = cols[10];
        m.goid = cols[11];
        m.st_num = detail::parse_uint<std::uint32_t>(cols[12], kStNumMax, lineno, "stnum");
        m.sq_num = detail::parse_uint<std::uint32_t>(cols[13], kStNumMax, lineno, "sqnum");
        m.data1 = detail::parse_uint<std::uint8_t>(cols[14], 1, lineno, "data1");
        m.data2 = detail::parse_uint<std::uint8_t>(cols[15], 1, lineno, "data2");
        if (auto p = structural_problems(m); !p.empty()) throw ImportError(lineno, p.front());

        auto& windows = corpus.windows;
        if (windows.empty() || windows.back().window_id != id) {
            if (!windows.empty()) closed.insert(windows.back().window_id);
            if (closed.contains(id)) throw ImportError(lineno, "window_id '" + id + "' is not contiguous");
            windows.push_back(MessageWindow{{}, label, id});
        } else if (windows.back().label != label) {
            throw ImportError(lineno, "label changes inside window '" + id + "'");
        }
        windows.back().messages.push_back(std::move(m));
    }
    return corpus;
}

inline CorpusFile import_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return import_csv(in, path);
}

}  // namespace goose::ingest
