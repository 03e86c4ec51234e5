// Generates a small corpus, scores it, and runs the rule-based detector on it.
// Usage: goose_sample [config] [out.csv]
#include <iostream>
#include <string>

#include "goose/goose.hpp"

int main(int argc, char** argv) {
    using namespace goose;
    try {
        aatm::GenerationConfig cfg;
        if (argc > 1) {
            cfg = aatm::load_config_file(argv[1]);
        } else {
            cfg.class_plan.fill(5);
        }
        const auto bank = aatm::SeedBank::synthesize(8, cfg.window_length, cfg.rng_seed);
        const auto corpus = aatm::generate_corpus(cfg, bank, bank.vocab());
        if (argc > 2) ingest::export_csv_file(corpus, argv[2]);

        const auto q = quality::assess(corpus.windows);
        std::cout << "windows " << q.window_count << "\nBR " << q.balance_rate << "\nRR " << q.realism_rate
                  << " (worst case " << q.realism_rate_worst_case << ")\n";

        const auto report = detect::evaluate_detector("rules", detect::classify_window, corpus);
        std::cout << "accuracy " << report.metrics.accuracy << "  mcc " << report.metrics.mcc << '\n';
        const auto per_class = detect::per_class_accuracy(report.multiclass);
        for (std::size_t c = 0; c < kClassCount; ++c)
            if (per_class[c]) std::cout << "  " << to_string(kAllClasses[c]) << ' ' << *per_class[c] << '\n';
        std::cout << "corpus hash " << report.corpus_hash << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
