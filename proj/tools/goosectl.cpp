// goosectl: command-line front end for the GOOSE toolkit.
#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "goose/goose.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) throw UsageError("no such file: " + path);
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_manifest(const std::string& out, const std::string& subcommand, nlohmann::json fields) {
    fields["subcommand"] = subcommand;
    fields["tool_version"] = kToolVersion;
    fields["created_utc"] = utc_now();
    std::ofstream m(out + ".manifest.json");
    if (!m) throw std::runtime_error("cannot write manifest for " + out);
    m << fields.dump(2) << '\n';
}

goose::ingest::CorpusFile load_csv(const std::string& path) {
    require_file(path);
    return goose::ingest::import_csv_file(path);
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

// --- subcommands -----------------------------------------------------------

struct IngestArgs {
    std::string pcap, out;
    std::size_t window_length = 10;
};

int run_ingest(const IngestArgs& a) {
    using namespace goose;
    require_file(a.pcap);
    if (a.window_length == 0) throw UsageError("--window-length must be positive");
    const auto frames = ingest::read_pcap_file(a.pcap);
    const auto goose_frames = ingest::filter_goose(frames);
    std::cerr << frames.size() << " frames read, " << goose_frames.frames.size() << " GOOSE frames";
    if (goose_frames.truncated) std::cerr << ", " << goose_frames.truncated << " truncated";
    std::cerr << '\n';

    ingest::CorpusFile corpus;
    corpus.provenance = a.pcap;
    std::vector<std::string> errors;
    std::vector<GooseMessage> msgs;
    for (std::size_t i = 0; i < goose_frames.frames.size(); ++i) {
        try {
            msgs.push_back(ingest::decode_frame(goose_frames.frames[i]));
        } catch (const ingest::DecodeError& e) {
            errors.push_back("GOOSE frame " + std::to_string(i) + ": " + e.what());
        }
    }
    for (std::size_t i = 0; i < msgs.size(); i += a.window_length) {
        MessageWindow w;
        w.window_id = aatm::window_id('c', i / a.window_length);
        const auto end = std::min(msgs.size(), i + a.window_length);
        w.messages.assign(msgs.begin() + static_cast<std::ptrdiff_t>(i), msgs.begin() + static_cast<std::ptrdiff_t>(end));
        corpus.windows.push_back(std::move(w));
    }
    ingest::export_csv_file(corpus, a.out);
    write_manifest(a.out, "ingest",
                   {{"inputs", {a.pcap}}, {"outputs", {a.out}}, {"corpus_hash", ingest::corpus_hash(corpus)},
                    {"messages", msgs.size()}, {"decode_errors", errors}});
    for (const auto& e : errors) std::cerr << "error: " << e << '\n';
    return errors.empty() ? 0 : kExitData;
}

struct ExportArgs {
    std::string csv, out;
    bool vlan = false;
};

int run_export_pcap(const ExportArgs& a) {
    using namespace goose;
    const auto corpus = load_csv(a.csv);
    std::vector<ingest::RawFrame> frames;
    ingest::EncodeOptions opts;
    opts.vlan = a.vlan;
    for (const auto& w : corpus.windows)
        for (const auto& m : w.messages) {
            if (!is_valid_message(m)) throw DataError("window '" + w.window_id + "' has an out-of-range timestamp");
            frames.push_back(ingest::encode_frame(m, opts));
        }
    ingest::write_pcap_file(a.out, frames);
    write_manifest(a.out, "export-pcap",
                   {{"inputs", {a.csv}}, {"outputs", {a.out}}, {"corpus_hash", ingest::corpus_hash(corpus)}});
    std::cerr << frames.size() << " frames written\n";
    return 0;
}

struct SeedsArgs {
    std::string out;
    std::uint64_t seed = 1;
    std::size_t per_profile = 8;
    std::size_t window_length = 10;
};

int run_seeds(const SeedsArgs& a) {
    using namespace goose;
    auto bank = aatm::SeedBank::synthesize(a.per_profile, a.window_length, a.seed);
    ingest::CorpusFile corpus{bank.templates, "seedbank"};
    ingest::export_csv_file(corpus, a.out);
    write_manifest(a.out, "seeds",
                   {{"outputs", {a.out}}, {"rng_seed", a.seed}, {"corpus_hash", ingest::corpus_hash(corpus)}});
    return 0;
}

struct GenerateArgs {
    std::string config, seeds, out;
    std::optional<std::uint64_t> seed;
    std::string baseline = "aatm";
    std::size_t count = 0;
};

int run_generate(const GenerateArgs& a) {
    using namespace goose;
    require_file(a.config);
    aatm::GenerationConfig cfg = aatm::load_config_file(a.config);
    if (a.seed) cfg.rng_seed = *a.seed;

    aatm::SeedBank bank;
    if (a.seeds.empty()) {
        bank = aatm::SeedBank::synthesize(8, cfg.window_length, cfg.rng_seed);
    } else {
        const auto seeds = load_csv(a.seeds);
        bank = a.baseline == "multimix" ? aatm::SeedBank{seeds.windows} : aatm::SeedBank::from_windows(seeds.windows);
    }

    ingest::CorpusFile corpus;
    if (a.baseline == "multimix") {
        const std::size_t count = a.count ? a.count : cfg.plan_total();
        if (count == 0) throw UsageError("multimix needs --count or a non-empty class_plan");
        corpus = aatm::multimix_baseline(bank.templates, count, cfg.rng_seed);
    } else if (a.baseline == "aatm") {
        if (cfg.plan_total() == 0) throw UsageError("class_plan requests no windows");
        if (cfg.plan_total() < kClassCount) throw UsageError("class_plan must request at least 13 windows");
        corpus = aatm::generate_corpus(cfg, bank, bank.vocab());
    } else {
        throw UsageError("unknown --baseline '" + a.baseline + "'");
    }
    ingest::export_csv_file(corpus, a.out);

    const auto q = quality::assess(corpus.windows);
    std::cout << "windows " << corpus.windows.size() << "  BR " << q.balance_rate << "  RR " << q.realism_rate << '\n';
    write_manifest(a.out, "generate",
                   {{"config", a.config},
                    {"inputs", a.seeds.empty() ? nlohmann::json::array() : nlohmann::json{a.seeds}},
                    {"outputs", {a.out}},
                    {"rng_seed", cfg.rng_seed},
                    {"engine", a.baseline},
                    {"corpus_hash", ingest::corpus_hash(corpus)}});
    return 0;
}

struct ValidateArgs {
    std::string csv, out;
};

int run_validate(const ValidateArgs& a) {
    using namespace goose;
    const auto corpus = load_csv(a.csv);
    if (corpus.windows.empty()) throw DataError("corpus has no windows");
    const auto q = quality::assess(corpus.windows);
    nlohmann::json j = quality::to_json(q);
    j["corpus_hash"] = ingest::corpus_hash(corpus);
    std::cout << "windows " << q.window_count << '\n'
              << "balance_rate " << q.balance_rate << '\n'
              << "realism_rate " << q.realism_rate << '\n'
              << "realism_rate_worst_case " << q.realism_rate_worst_case << '\n';
    if (!a.out.empty()) {
        write_json(a.out, j);
        write_manifest(a.out, "validate", {{"inputs", {a.csv}}, {"outputs", {a.out}}, {"corpus_hash", j["corpus_hash"]}});
    }
    return 0;
}

struct DetectArgs {
    std::string csv, out, engine = "rules", backend_url, model = "default", mock, transcript, feedback;
    std::size_t batch_size = 5;
    std::size_t in_flight = 2;
};

int run_detect(const DetectArgs& a) {
    using namespace goose;
    auto corpus = load_csv(a.csv);
    int status = 0;
    if (a.engine == "rules") {
        for (auto& w : corpus.windows) w.label = detect::classify_window(w);
    } else if (a.engine == "llm") {
        std::unique_ptr<llm::ChatBackend> backend;
        if (!a.mock.empty()) {
            require_file(a.mock);
            backend = std::make_unique<llm::MockBackend>(llm::MockBackend::from_file(a.mock));
        } else if (!a.backend_url.empty()) {
            llm::HttpBackendConfig cfg;
            cfg.base_url = a.backend_url;
            cfg.model = a.model;
            backend = std::make_unique<llm::HttpChatBackend>(cfg);
        } else {
            throw UsageError("llm engine needs --mock or --backend-url");
        }
        llm::DetectOptions opts;
        opts.batch_size = a.batch_size;
        opts.max_in_flight = a.in_flight;
        opts.transcript_path = a.transcript.empty() ? a.out + ".transcript.jsonl" : a.transcript;
        if (!a.feedback.empty() && std::filesystem::exists(a.feedback)) opts.feedback = llm::load_feedback(a.feedback);
        const auto responses = llm::detect(*backend, corpus.windows, opts);
        if (!a.feedback.empty()) llm::append_feedback(a.feedback, corpus.windows, responses);
        for (std::size_t i = 0; i < responses.size(); ++i) {
            corpus.windows[i].label = responses[i].label;
            if (!responses[i].parse_ok) {
                std::cerr << "unparsed: " << corpus.windows[i].window_id << ": " << responses[i].error << '\n';
                status = kExitData;
            }
        }
    } else {
        throw UsageError("unknown engine '" + a.engine + "' (expected rules or llm)");
    }
    ingest::export_csv_file(corpus, a.out);
    std::map<std::string, std::size_t> counts;
    for (const auto& w : corpus.windows) ++counts[w.label ? std::string(to_string(*w.label)) : "(unparsed)"];
    for (const auto& [k, v] : counts) std::cout << k << ' ' << v << '\n';
    write_manifest(a.out, "detect",
                   {{"inputs", {a.csv}}, {"outputs", {a.out}}, {"engine", a.engine}, {"model", a.model},
                    {"corpus_hash", ingest::corpus_hash(corpus)}});
    return status;
}

struct EvaluateArgs {
    std::string pred, truth, out, detector = "detector";
};

int run_evaluate(const EvaluateArgs& a) {
    using namespace goose;
    const auto pred = load_csv(a.pred);
    const auto truth = load_csv(a.truth);
    std::map<std::string, ClassLabel> by_id;
    for (const auto& w : pred.windows) {
        if (!w.label) throw DataError("prediction for '" + w.window_id + "' is missing");
        by_id[w.window_id] = *w.label;
    }
    std::vector<ClassLabel> p, t;
    for (const auto& w : truth.windows) {
        if (!w.label) throw DataError("truth window '" + w.window_id + "' is unlabeled");
        auto it = by_id.find(w.window_id);
        if (it == by_id.end()) throw DataError("no prediction for window '" + w.window_id + "'");
        p.push_back(it->second);
        t.push_back(*w.label);
    }
    if (p.size() != pred.windows.size()) throw DataError("predictions contain windows absent from truth");
    const auto report = detect::make_report(a.detector, ingest::corpus_hash(truth), p, t);
    write_json(a.out, detect::to_json(report));
    const auto& m = report.metrics;
    std::cout << "tpr " << m.tpr << "  fpr " << m.fpr << "  accuracy " << m.accuracy << "  f1 " << m.f1 << "  mcc "
              << m.mcc << '\n';
    for (const auto& d : m.degenerate) std::cerr << "note: " << d << " has a zero denominator, reported as 0\n";
    write_manifest(a.out, "evaluate",
                   {{"inputs", {a.pred, a.truth}}, {"outputs", {a.out}}, {"corpus_hash", report.corpus_hash}});
    return 0;
}

struct CompareArgs {
    std::vector<std::string> reports;
    std::string out;
};

int run_compare(const CompareArgs& a) {
    using namespace goose;
    std::vector<detect::MetricsReport> reports;
    for (const auto& path : a.reports) {
        require_file(path);
        std::ifstream in(path);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ": " + e.what());
        }
        reports.push_back(detect::report_from_json(j));
    }
    if (reports.size() < 2) throw UsageError("compare needs at least two reports");
    const auto c = detect::compare_reports(reports);
    std::cout << detect::format_comparison(c);
    if (!a.out.empty()) {
        write_json(a.out, detect::to_json(c));
        write_manifest(a.out, "compare", {{"inputs", a.reports}, {"outputs", {a.out}}});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GOOSE traffic toolkit: ingest, generate, validate, detect, evaluate"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "Decode GOOSE frames from a pcap into CSV windows");
    ingest->add_option("pcap", ingest_args.pcap, "Input capture")->required();
    ingest->add_option("--out", ingest_args.out, "Output CSV")->required();
    ingest->add_option("--window-length", ingest_args.window_length, "Messages per window");

    ExportArgs export_args;
    auto* exporter = app.add_subcommand("export-pcap", "Encode a CSV corpus as GOOSE frames");
    exporter->add_option("csv", export_args.csv, "Input CSV")->required();
    exporter->add_option("--out", export_args.out, "Output pcap")->required();
    exporter->add_flag("--vlan", export_args.vlan, "Insert an 802.1Q tag");

    SeedsArgs seeds_args;
    auto* seeds = app.add_subcommand("seeds", "Synthesize a bank of compliant seed windows");
    seeds->add_option("--out", seeds_args.out, "Output CSV")->required();
    seeds->add_option("--seed", seeds_args.seed, "RNG seed");
    seeds->add_option("--per-profile", seeds_args.per_profile, "Windows per device profile");
    seeds->add_option("--window-length", seeds_args.window_length, "Messages per window");

    GenerateArgs gen_args;
    std::uint64_t gen_seed = 0;
    auto* generate = app.add_subcommand("generate", "Generate a labeled corpus");
    generate->add_option("--config", gen_args.config, "Generation config (key = value)")->required();
    generate->add_option("--seeds", gen_args.seeds, "Seed windows CSV (default: synthesized)");
    generate->add_option("--out", gen_args.out, "Output CSV")->required();
    auto* gen_seed_opt = generate->add_option("--seed", gen_seed, "Overrides rng_seed");
    generate->add_option("--engine", gen_args.baseline, "aatm or multimix");
    generate->add_option("--count", gen_args.count, "Window count for multimix");

    ValidateArgs val_args;
    auto* validate = app.add_subcommand("validate", "Report balance and realism rates");
    validate->add_option("csv", val_args.csv, "Input CSV")->required();
    validate->add_option("--out", val_args.out, "Optional JSON report");

    DetectArgs det_args;
    auto* det = app.add_subcommand("detect", "Label windows with a detector");
    det->add_option("csv", det_args.csv, "Input CSV")->required();
    det->add_option("--out", det_args.out, "Output CSV with predicted labels")->required();
    det->add_option("--engine", det_args.engine, "rules or llm");
    det->add_option("--backend-url", det_args.backend_url, "Chat-completion base URL");
    det->add_option("--model", det_args.model, "Model name sent to the backend");
    det->add_option("--mock", det_args.mock, "Scripted replies instead of a live backend");
    det->add_option("--batch-size", det_args.batch_size, "Windows per prompt");
    det->add_option("--in-flight", det_args.in_flight, "Concurrent requests");
    det->add_option("--transcript", det_args.transcript, "JSONL transcript path");
    det->add_option("--feedback", det_args.feedback, "Feedback corpus (JSONL), read and appended");

    EvaluateArgs eval_args;
    auto* evaluate = app.add_subcommand("evaluate", "Score predictions against truth");
    evaluate->add_option("pred", eval_args.pred, "Predicted-label CSV")->required();
    evaluate->add_option("truth", eval_args.truth, "Truth-label CSV")->required();
    evaluate->add_option("--out", eval_args.out, "Output JSON report")->required();
    evaluate->add_option("--detector", eval_args.detector, "Detector name in the report");

    CompareArgs cmp_args;
    auto* compare = app.add_subcommand("compare", "Compare metric reports side by side");
    compare->add_option("reports", cmp_args.reports, "Report JSON files")->required();
    compare->add_option("--out", cmp_args.out, "Optional JSON comparison");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*ingest) return run_ingest(ingest_args);
        if (*exporter) return run_export_pcap(export_args);
        if (*seeds) return run_seeds(seeds_args);
        if (*generate) {
            if (*gen_seed_opt) gen_args.seed = gen_seed;
            return run_generate(gen_args);
        }
        if (*validate) return run_validate(val_args);
        if (*det) return run_detect(det_args);
        if (*evaluate) return run_evaluate(eval_args);
        if (*compare) return run_compare(cmp_args);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const goose::aatm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
