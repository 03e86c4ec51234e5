#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "goose/core/message.hpp"
#include "goose/core/signature.hpp"
#include "goose/ingest/csv.hpp"
#include "goose/ingest/hash.hpp"

namespace goose::detect {

inline ClassLabel classify_window(const MessageWindow& w) { return signature_class(w); }

struct BinaryConfusion {
    std::uint64_t tp = 0, fn = 0, fp = 0, tn = 0;

    std::uint64_t total() const { return tp + fn + fp + tn; }
    friend bool operator==(const BinaryConfusion&, const BinaryConfusion&) = default;
};

// Rows are truth, columns are prediction, both in ClassLabel order.
using MulticlassConfusion = std::array<std::array<std::uint64_t, kClassCount>, kClassCount>;

namespace detail {

inline void require_same_length(std::size_t a, std::size_t b) {
    if (a != b) throw std::domain_error("prediction and truth sequences differ in length");
    if (a == 0) throw std::domain_error("empty label sequences");
}

}  // namespace detail

// Anomaly is the positive class; every non-Normal label collapses to it.
inline BinaryConfusion binary_confusion(std::span<const ClassLabel> pred, std::span<const ClassLabel> truth) {
    detail::require_same_length(pred.size(), truth.size());
    BinaryConfusion cm;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] != ClassLabel::Normal, t = truth[i] != ClassLabel::Normal;
        if (t && p) ++cm.tp;
        else if (t) ++cm.fn;
        else if (p) ++cm.fp;
        else ++cm.tn;
    }
    return cm;
}

inline MulticlassConfusion multiclass_confusion(std::span<const ClassLabel> pred, std::span<const ClassLabel> truth) {
    detail::require_same_length(pred.size(), truth.size());
    MulticlassConfusion cm{};
    for (std::size_t i = 0; i < pred.size(); ++i) ++cm[class_index(truth[i])][class_index(pred[i])];
    return cm;
}

struct Metrics {
    double tpr = 0, fpr = 0, fnr = 0, precision = 0, accuracy = 0, f1 = 0;
    double markedness = 0, informedness = 0, mcc = 0;
    // Names of metrics whose denominator was zero and were set to 0.
    std::vector<std::string> degenerate;
};

namespace detail {

inline double ratio(double num, double den, const char* name, std::vector<std::string>& flags) {
    if (den == 0) {
        flags.emplace_back(name);
        return 0.0;
    }
    return num / den;
}

inline void require_total(const BinaryConfusion& cm) {
    if (cm.total() == 0) throw std::domain_error("confusion matrix is empty");
}

}  // namespace detail

inline Metrics standard_metrics(const BinaryConfusion& cm) {
    detail::require_total(cm);
    Metrics m;
    const double tp = static_cast<double>(cm.tp), fn = static_cast<double>(cm.fn);
    const double fp = static_cast<double>(cm.fp), tn = static_cast<double>(cm.tn);
    m.tpr = detail::ratio(tp, tp + fn, "tpr", m.degenerate);
    m.fpr = detail::ratio(fp, fp + tn, "fpr", m.degenerate);
    m.fnr = detail::ratio(fn, fn + tp, "fnr", m.degenerate);
    m.precision = detail::ratio(tp, tp + fp, "precision", m.degenerate);
    m.accuracy = (tp + tn) / static_cast<double>(cm.total());
    m.f1 = detail::ratio(2 * m.precision * m.tpr, m.precision + m.tpr, "f1", m.degenerate);
    return m;
}

inline Metrics advanced_metrics(const BinaryConfusion& cm) {
    detail::require_total(cm);
    Metrics m;
    const double tp = static_cast<double>(cm.tp), fn = static_cast<double>(cm.fn);
    const double fp = static_cast<double>(cm.fp), tn = static_cast<double>(cm.tn);
    std::vector<std::string> scratch;
    const double precision = detail::ratio(tp, tp + fp, "precision", scratch);
    const double npv = detail::ratio(tn, tn + fn, "npv", scratch);
    const double tpr = detail::ratio(tp, tp + fn, "tpr", scratch);
    const double tnr = detail::ratio(tn, tn + fp, "tnr", scratch);
    if (!scratch.empty()) {
        if (tp + fp == 0 || tn + fn == 0) m.degenerate.emplace_back("markedness");
        if (tp + fn == 0 || tn + fp == 0) m.degenerate.emplace_back("informedness");
    }
    m.markedness = (tp + fp == 0 || tn + fn == 0) ? 0.0 : precision + npv - 1.0;
    m.informedness = (tp + fn == 0 || tn + fp == 0) ? 0.0 : tpr + tnr - 1.0;
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    m.mcc = detail::ratio(tp * tn - fp * fn, std::sqrt(den), "mcc", m.degenerate);
    return m;
}

inline Metrics all_metrics(const BinaryConfusion& cm) {
    Metrics s = standard_metrics(cm);
    const Metrics a = advanced_metrics(cm);
    s.markedness = a.markedness;
    s.informedness = a.informedness;
    s.mcc = a.mcc;
    s.degenerate.insert(s.degenerate.end(), a.degenerate.begin(), a.degenerate.end());
    return s;
}

struct MetricsReport {
    std::string detector;
    std::string corpus_hash;
    BinaryConfusion binary;
    MulticlassConfusion multiclass{};
    Metrics metrics;
};

inline nlohmann::json to_json(const MetricsReport& r) {
    const Metrics& m = r.metrics;
    nlohmann::json j = {
        {"detector", r.detector},
        {"corpus_hash", r.corpus_hash},
        {"binary_confusion", {{"tp", r.binary.tp}, {"fn", r.binary.fn}, {"fp", r.binary.fp}, {"tn", r.binary.tn}}},
        {"multiclass_confusion", r.multiclass},
        {"metrics",
         {{"tpr", m.tpr},
          {"fpr", m.fpr},
          {"fnr", m.fnr},
          {"precision", m.precision},
          {"accuracy", m.accuracy},
          {"f1", m.f1},
          {"markedness", m.markedness},
          {"informedness", m.informedness},
          {"mcc", m.mcc}}},
    };
    return j;
}

// Reads the shared report schema; unknown extra fields are ignored.
inline MetricsReport report_from_json(const nlohmann::json& j) {
    MetricsReport r;
    try {
        r.detector = j.at("detector").get<std::string>();
        r.corpus_hash = j.at("corpus_hash").get<std::string>();
        const auto& b = j.at("binary_confusion");
        r.binary = {b.at("tp").get<std::uint64_t>(), b.at("fn").get<std::uint64_t>(),
                    b.at("fp").get<std::uint64_t>(), b.at("tn").get<std::uint64_t>()};
        const auto& mc = j.at("multiclass_confusion");
        if (mc.size() != kClassCount) throw std::domain_error("multiclass_confusion must be 13x13");
        for (std::size_t t = 0; t < kClassCount; ++t) {
            if (mc[t].size() != kClassCount) throw std::domain_error("multiclass_confusion must be 13x13");
            for (std::size_t p = 0; p < kClassCount; ++p) r.multiclass[t][p] = mc[t][p].get<std::uint64_t>();
        }
        const auto& m = j.at("metrics");
        r.metrics.tpr = m.at("tpr").get<double>();
        r.metrics.fpr = m.at("fpr").get<double>();
        r.metrics.fnr = m.at("fnr").get<double>();
        r.metrics.precision = m.at("precision").get<double>();
        r.metrics.accuracy = m.at("accuracy").get<double>();
        r.metrics.f1 = m.at("f1").get<double>();
        r.metrics.markedness = m.at("markedness").get<double>();
        r.metrics.informedness = m.at("informedness").get<double>();
        r.metrics.mcc = m.at("mcc").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw std::domain_error(std::string("malformed metrics report: ") + e.what());
    }
    return r;
}

inline MetricsReport make_report(std::string detector, std::string corpus_hash, std::span<const ClassLabel> pred,
                                 std::span<const ClassLabel> truth) {
    MetricsReport r;
    r.detector = std::move(detector);
    r.corpus_hash = std::move(corpus_hash);
    r.binary = binary_confusion(pred, truth);
    r.multiclass = multiclass_confusion(pred, truth);
    r.metrics = all_metrics(r.binary);
    return r;
}

inline std::vector<ClassLabel> truth_labels(const ingest::CorpusFile& corpus) {
    std::vector<ClassLabel> out;
    out.reserve(corpus.windows.size());
    for (const auto& w : corpus.windows) {
        if (!w.label) throw std::domain_error("window '" + w.window_id + "' is unlabeled");
        out.push_back(*w.label);
    }
    return out;
}

using Detector = std::function<ClassLabel(const MessageWindow&)>;

inline MetricsReport evaluate_detector(const std::string& name, const Detector& detector,
                                       const ingest::CorpusFile& corpus) {
    const std::vector<ClassLabel> truth = truth_labels(corpus);
    std::vector<ClassLabel> pred;
    pred.reserve(truth.size());
    for (const auto& w : corpus.windows) pred.push_back(detector(w));
    return make_report(name, ingest::corpus_hash(corpus), pred, truth);
}

// Fraction of each truth class predicted exactly; nullopt for absent classes.
inline std::array<std::optional<double>, kClassCount> per_class_accuracy(const MulticlassConfusion& cm) {
    std::array<std::optional<double>, kClassCount> out;
    for (std::size_t t = 0; t < kClassCount; ++t) {
        std::uint64_t row = 0;
        for (auto v : cm[t]) row += v;
        if (row) out[t] = static_cast<double>(cm[t][t]) / static_cast<double>(row);
    }
    return out;
}

inline constexpr std::array<const char*, 9> kMetricNames = {"tpr", "fpr", "fnr", "precision", "accuracy",
                                                            "f1", "markedness", "informedness", "mcc"};

inline std::array<double, 9> metric_values(const Metrics& m) {
    return {m.tpr, m.fpr, m.fnr, m.precision, m.accuracy, m.f1, m.markedness, m.informedness, m.mcc};
}

inline bool lower_is_better(std::size_t metric) { return metric == 1 || metric == 2; }

struct Comparison {
    std::vector<std::string> detectors;
    // values[metric][report]
    std::array<std::vector<double>, 9> values;
    // Index of the single best report per metric; nullopt when tied.
    std::array<std::optional<std::size_t>, 9> best;
    bool mixed_corpora = false;
};

inline Comparison compare_reports(std::span<const MetricsReport> reports) {
    if (reports.size() < 2) throw std::domain_error("compare_reports needs at least two reports");
    Comparison c;
    for (const auto& r : reports) {
        c.detectors.push_back(r.detector);
        if (r.corpus_hash != reports.front().corpus_hash) c.mixed_corpora = true;
        const auto v = metric_values(r.metrics);
        for (std::size_t m = 0; m < v.size(); ++m) c.values[m].push_back(v[m]);
    }
    for (std::size_t m = 0; m < c.values.size(); ++m) {
        const auto& col = c.values[m];
        std::size_t best = 0;
        for (std::size_t i = 1; i < col.size(); ++i) {
            if (lower_is_better(m) ? col[i] < col[best] : col[i] > col[best]) best = i;
        }
        const auto ties = std::count(col.begin(), col.end(), col[best]);
        if (ties == 1) c.best[m] = best;
    }
    return c;
}

// Fixed-width table with the best value per metric marked by '*'.
inline std::string format_comparison(const Comparison& c) {
    std::string out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-14s", "metric");
    out += buf;
    for (const auto& d : c.detectors) {
        std::snprintf(buf, sizeof buf, " %14.14s", d.c_str());
        out += buf;
    }
    out += '\n';
    for (std::size_t m = 0; m < c.values.size(); ++m) {
        std::snprintf(buf, sizeof buf, "%-14s", kMetricNames[m]);
        out += buf;
        for (std::size_t i = 0; i < c.values[m].size(); ++i) {
            std::snprintf(buf, sizeof buf, " %13.4f%c", c.values[m][i], c.best[m] == i ? '*' : ' ');
            out += buf;
        }
        out += '\n';
    }
    if (c.mixed_corpora) out += "warning: reports were computed on different corpora\n";
    return out;
}

inline nlohmann::json to_json(const Comparison& c) {
    nlohmann::json j;
    j["detectors"] = c.detectors;
    j["mixed_corpora"] = c.mixed_corpora;
    for (std::size_t m = 0; m < c.values.size(); ++m) {
        j["metrics"][kMetricNames[m]] = {{"values", c.values[m]},
                                         {"best", c.best[m] ? nlohmann::json(*c.best[m]) : nlohmann::json()}};
    }
    return j;
}

}  // namespace goose::detect
