#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "goose/aatm/generator.hpp"
#include "goose/ingest/csv.hpp"
#include "goose/quality/quality.hpp"
#include "helpers.hpp"

using namespace goose;
using namespace goose::aatm;

namespace {

const SeedBank& bank() {
    static const SeedBank b = SeedBank::synthesize(4, 10, 17);
    return b;
}

std::array<double, kRuleCount> uniform_weights() {
    std::array<double, kRuleCount> w;
    w.fill(0.125);
    return w;
}

quality::ClassCounts counts_of(std::initializer_list<std::pair<ClassLabel, std::size_t>> list) {
    quality::ClassCounts c{};
    for (auto [label, n] : list) c[class_index(label)] = n;
    return c;
}

}  // namespace

// Objectives ---------------------------------------------------------------

TEST(FProtocol, CompliantWindowScoresWeightSum) {
    const auto w = goose::testing::periodic(10);
    EXPECT_DOUBLE_EQ(f_protocol(w, uniform_weights()), 1.0);
    double sum = 0;
    for (double x : kDefaultRuleWeights) sum += x;
    EXPECT_NEAR(sum, 1.0, 1e-15);
    EXPECT_NEAR(f_protocol(w, kDefaultRuleWeights), 1.0, 1e-15);
}

TEST(FProtocol, SingleBurstViolation) {
    const auto w = goose::testing::periodic(40, 0);
    EXPECT_NEAR(f_protocol(w, uniform_weights()), 1 - 0.125 * (1 - std::exp(-1.0)), 1e-15);
    EXPECT_NEAR(f_protocol(w, uniform_weights()), 0.921, 5e-4);
}

TEST(FBalance, HandValues) {
    quality::ClassCounts uniform;
    uniform.fill(3);
    EXPECT_NEAR(f_balance(uniform), 0.0, 1e-15);
    const auto two = counts_of({{ClassLabel::Normal, 80}, {ClassLabel::DI, 20}});
    EXPECT_NEAR(f_balance(two), -(std::abs(0.8 - 1.0 / 13) + std::abs(0.2 - 1.0 / 13) + 11.0 / 13), 1e-15);
    EXPECT_NEAR(f_balance(two), -1.692, 5e-4);
    const auto one = counts_of({{ClassLabel::RE, 9}});
    EXPECT_NEAR(f_balance(one), -24.0 / 13, 1e-15);
    EXPECT_THROW(f_balance(quality::ClassCounts{}), std::domain_error);
}

TEST(FNovel, DistancesAndErrors) {
    const auto a = goose::testing::periodic(10);
    const std::vector<MessageWindow> corpus = {a, goose::testing::periodic(10, 7)};
    EXPECT_EQ(f_novel(a, corpus), 0.0);
    auto b = a;
    for (auto& m : b.messages) m.goid = "OTHER";
    EXPECT_NEAR(f_novel(b, corpus), 1.0 / 14, 1e-15);
    const auto single = goose::testing::periodic(1);
    auto single_b = single;
    single_b.messages[0].dm = "01 00 09";
    const std::vector<MessageWindow> one = {single};
    EXPECT_NEAR(f_novel(single_b, one), 1.0 / 14, 1e-15);
    EXPECT_THROW(f_novel(a, {}), std::domain_error);
}

TEST(FNovel, PositiveUnlessIdentical) {
    std::mt19937_64 rng(3);
    std::vector<MessageWindow> corpus;
    for (int i = 0; i < 10; ++i) corpus.push_back(goose::testing::compliant_window(rng, 8));
    for (int t = 0; t < 200; ++t) {
        auto w = corpus[rng() % corpus.size()];
        EXPECT_EQ(f_novel(w, corpus), 0.0);
        w.messages[rng() % w.size()].sq_num += 1;
        EXPECT_GT(f_novel(w, corpus), 0.0);
    }
}

// Numeric side -------------------------------------------------------------

TEST(ProjectNumeric, Examples) {
    NumericVector v = numeric_vector(goose::testing::msg_at(5 * 3'600'000'000ll + 123, 9, 10, 1, 0));
    EXPECT_EQ(project_numeric(v), v);
    NumericVector s = v;
    s[idx(Numeric::Second)] = 61.4;
    EXPECT_EQ(project_numeric(s)[idx(Numeric::Second)], 59);
    NumericVector st = v;
    st[idx(Numeric::StNum)] = 4'294'967'296.0 + 5;
    EXPECT_EQ(project_numeric(st)[idx(Numeric::StNum)], 5);
    st[idx(Numeric::StNum)] = -1;
    EXPECT_EQ(project_numeric(st)[idx(Numeric::StNum)], 4'294'967'295.0);
}

TEST(ProjectNumeric, IdempotentAndInRange) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e10, 1e10);
    for (int t = 0; t < 5000; ++t) {
        NumericVector v;
        for (auto& x : v) x = u(rng);
        const auto p = project_numeric(v);
        EXPECT_EQ(project_numeric(p), p);
        GooseMessage m;
        m.dataset_name = "d";
        assign_numeric(m, p);
        EXPECT_TRUE(is_valid_message(m));
    }
}

TEST(NumericPerturbation, EmptyTargetGivesBase) {
    const auto w = bank().templates[0];
    GenerationConfig cfg;
    const auto t = numeric_perturbation(w, 4, cfg, {}, {}, TargetSpec{});
    EXPECT_EQ(t.zero(7.0), t.base());
    for (double b : t.balance) EXPECT_EQ(b, 0.0);
}

TEST(NumericPerturbation, RuleOneTargetPushesSequenceAway) {
    const auto w = goose::testing::periodic(10);
    GenerationConfig cfg;
    TargetSpec spec;
    spec.rules = rule_set({1});
    const std::vector<MessageWindow> corpus = {goose::testing::periodic(10, 900'000)};
    const auto t = numeric_perturbation(w, 5, cfg, {}, corpus, spec);
    const auto sq = idx(Axis::SqNum);
    EXPECT_LT(t.target[sq], 0.0);
    EXPECT_GT(t.zero(1.0)[sq], t.base()[sq]);
}

TEST(NumericPerturbation, LinearInLambda) {
    const auto w = bank().templates[3];
    GenerationConfig cfg;
    TargetSpec spec;
    spec.rules = rule_set({1, 3, 7});
    const std::vector<MessageWindow> corpus = {bank().templates[1]};
    const auto t = numeric_perturbation(w, 6, cfg, {}, corpus, spec);
    const auto base = t.base();
    const auto one = t.zero(1.5), two = t.zero(3.0);
    for (std::size_t a = 0; a < kAxisCount; ++a) EXPECT_NEAR(two[a] - base[a], 2 * (one[a] - base[a]), 1e-12);
}

TEST(Surrogates, FiniteDifferenceConvergence) {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 300; ++t) {
        const auto& w = bank().templates[rng() % bank().templates.size()];
        const std::size_t k = 1 + rng() % (w.size() - 1);
        const auto ctx = focus_context(w, k);
        const auto x = axis_vector(w.messages[k]);
        for (int r = 1; r <= kRuleCount; ++r) {
            const auto g1 = compliance_gradient(r, ctx, x, 0.5);
            const auto g2 = compliance_gradient(r, ctx, x, 0.25);
            for (std::size_t a = 0; a < kAxisCount; ++a) {
                const double h = kAxisStep[a] * 0.5;
                EXPECT_LE(std::abs(g1[a] - g2[a]), 2.0 * h * h + 1e-9) << "rule " << r << " axis " << a;
            }
        }
    }
}

TEST(Surrogates, PropensityStaysInUnitInterval) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int t = 0; t < 2000; ++t) {
        const auto& w = bank().templates[rng() % bank().templates.size()];
        const std::size_t k = rng() % w.size();
        const auto ctx = focus_context(w, k);
        auto x = axis_vector(w.messages[k]);
        for (auto& v : x) v += u(rng);
        for (int r = 1; r <= kRuleCount; ++r) {
            const double p = violation_propensity(r, ctx, x);
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
        }
    }
    EXPECT_THROW(violation_propensity(9, FocusContext{}, AxisVector{}), std::domain_error);
}

// Categorical side ---------------------------------------------------------

TEST(CategoricalMutation, IndexExamples) {
    EXPECT_EQ(mutate_index(0, 1.5, 3), 2u);
    EXPECT_EQ(mutate_index(0, 2.5, 3), 0u);
    EXPECT_EQ(mutate_index(1, 0.0, 3), 1u);
    EXPECT_EQ(mutate_index(0, -0.5, 3), 2u);
    EXPECT_EQ(round_half_away(-2.5), -3);
    EXPECT_THROW(mutate_index(0, 1, 0), std::domain_error);
}

TEST(CategoricalMutation, WrapFuzz) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> small(-50, 50), huge(-1e18, 1e18);
    for (int t = 0; t < 20000; ++t) {
        const std::size_t n = 1 + rng() % 9;
        const std::size_t i = rng() % n;
        const double m = t % 2 ? small(rng) : huge(rng);
        EXPECT_LT(mutate_index(i, m, n), n);
    }
}

TEST(CategoricalMutation, TransitionDrivesDeviceAddress) {
    CategoricalVocab vocab;
    for (const char* dm : {"01 00 03", "01 00 04", "01 00 05"}) vocab.add(idx(Categorical::DM), dm);
    GooseMessage m = goose::testing::msg_at(0, 1, 1);
    vocab.add_message(m);
    TransitionMatrix t{};
    t[3][idx(Categorical::DM)] = -1.0;
    vocab.set_transition(t);
    GenerationConfig cfg;
    TargetSpec spec;
    spec.rules = rule_set({4});
    const std::array<int, kCategoricalCount> none{};
    auto out = categorical_mutation(m, cfg, vocab, spec, none, 1.5);
    EXPECT_DOUBLE_EQ(out.m[idx(Categorical::DM)], 1.5);
    EXPECT_EQ(out.values[idx(Categorical::DM)], "01 00 05");
    out = categorical_mutation(m, cfg, vocab, spec, none, 2.5);
    EXPECT_EQ(out.values[idx(Categorical::DM)], "01 00 03");
    out = categorical_mutation(m, cfg, vocab, TargetSpec{}, none, 2.5);
    for (std::size_t j = 0; j < kCategoricalCount; ++j) EXPECT_EQ(out.values[j], categorical_ref(m, j));

    GooseMessage stranger = m;
    stranger.goid = "NOT_IN_VOCAB";
    EXPECT_THROW(categorical_mutation(stranger, cfg, vocab, spec, none, 1.0), std::domain_error);
}

TEST(CategoricalVocab, IndexMapInverse) {
    const auto v = bank().vocab();
    for (std::size_t j = 0; j < kCategoricalCount; ++j) {
        ASSERT_GT(v.size(j), 0u);
        for (std::size_t k = 0; k < v.size(j); ++k) EXPECT_EQ(v.index_of(j, v.values(j)[k]), k);
    }
}

// Generation ---------------------------------------------------------------

TEST(GenerateWindow, EveryClassMatchesItsSignature) {
    GenerationConfig cfg;
    const auto vocab = bank().vocab();
    std::vector<MessageWindow> corpus;
    for (std::size_t c = 0; c < kClassCount; ++c) {
        for (std::uint64_t s = 0; s < 6; ++s) {
            const auto& seed = bank().templates[(c + s) % bank().templates.size()];
            const auto w = generate_window(seed, kAllClasses[c], cfg, vocab, corpus, 1000 * c + s);
            ASSERT_EQ(w.label, kAllClasses[c]);
            EXPECT_EQ(signature_class(w), kAllClasses[c]);
            EXPECT_EQ(w.size(), cfg.window_length);
            for (const auto& m : w.messages) EXPECT_TRUE(is_valid_message(m));
            corpus.push_back(w);
        }
    }
}

TEST(GenerateWindow, ClassSpecificShapes) {
    GenerationConfig cfg;
    const auto vocab = bank().vocab();
    const auto& seed = bank().templates[2];
    const auto normal = generate_window(seed, ClassLabel::Normal, cfg, vocab, {}, 1);
    EXPECT_TRUE(evaluate_rules(normal).all_compliant());
    EXPECT_EQ(quality::realism_rate_window(normal), 1.0);

    const auto di = generate_window(seed, ClassLabel::DI, cfg, vocab, {}, 2);
    EXPECT_EQ(evaluate_rules(di).violated(), rule_set({2}));

    const auto sp = generate_window(seed, ClassLabel::SPTime, cfg, vocab, {}, 3);
    EXPECT_FALSE(check_rule(7, sp).compliant);
    bool long_gap = false;
    for (std::size_t i = 1; i < sp.size(); ++i)
        long_gap |= micros_of_day(sp.messages[i]) - micros_of_day(sp.messages[i - 1]) > 10 * kMicrosPerSecond;
    EXPECT_TRUE(long_gap);

    const auto zd = generate_window(seed, ClassLabel::ZeroDay, cfg, vocab, {}, 4);
    EXPECT_TRUE(evaluate_rules(zd).violated().any());
}

TEST(GenerateWindow, NormalWithoutViolationPressure) {
    GenerationConfig cfg;
    cfg.lambda_violation = 0;
    const auto vocab = bank().vocab();
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto w = generate_window(bank().templates[s], ClassLabel::Normal, cfg, vocab, {}, s);
        EXPECT_EQ(quality::realism_rate_window(w), 1.0);
    }
}

TEST(GenerateWindow, ConfiguredTargetRulesShapeZeroDay) {
    GenerationConfig cfg;
    cfg.target_rules = rule_set({3, 7});
    const auto vocab = bank().vocab();
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto w = generate_window(bank().templates[s], ClassLabel::ZeroDay, cfg, vocab, {}, 50 + s);
        EXPECT_EQ(evaluate_rules(w).violated(), rule_set({3, 7}));
    }
}

TEST(GenerateWindow, RejectsBadSeeds) {
    GenerationConfig cfg;
    const auto vocab = bank().vocab();
    auto broken = bank().templates[0];
    broken.messages[5].sq_num += 4;
    EXPECT_THROW(generate_window(broken, ClassLabel::DI, cfg, vocab, {}), GenerationError);
    auto shorter = bank().templates[0];
    shorter.messages.resize(4);
    try {
        generate_window(shorter, ClassLabel::DOS, cfg, vocab, {});
        FAIL();
    } catch (const GenerationError& e) {
        EXPECT_EQ(e.target(), ClassLabel::DOS);
    }
}

TEST(GenerateCorpus, CountsFollowPlanAndLabelsAreConsistent) {
    GenerationConfig cfg;
    const std::array<std::size_t, kClassCount> table = {350, 401, 419, 396, 334, 348, 325, 430, 349, 348, 428, 331, 541};
    for (std::size_t c = 0; c < kClassCount; ++c) cfg.class_plan[c] = (table[c] + 12) / 25;
    cfg.rng_seed = 99;
    const auto corpus = generate_corpus(cfg, bank(), bank().vocab());
    const auto counts = quality::count_labels(corpus.windows);
    EXPECT_EQ(counts, cfg.class_plan);
    for (const auto& w : corpus.windows) EXPECT_EQ(signature_class(w), *w.label) << w.window_id;
    EXPECT_NEAR(quality::balance_rate(counts), quality::balance_rate(cfg.class_plan), 0);
}

TEST(GenerateCorpus, DeterministicUnderFixedSeed) {
    GenerationConfig cfg;
    cfg.class_plan.fill(2);
    cfg.rng_seed = 5;
    const auto a = ingest::export_csv_string(generate_corpus(cfg, bank(), bank().vocab()));
    const auto b = ingest::export_csv_string(generate_corpus(cfg, bank(), bank().vocab()));
    EXPECT_EQ(a, b);
    cfg.rng_seed = 6;
    EXPECT_NE(a, ingest::export_csv_string(generate_corpus(cfg, bank(), bank().vocab())));
}

TEST(GenerateCorpus, SingleClassAndSmallPlans) {
    GenerationConfig cfg;
    cfg.class_plan[class_index(ClassLabel::Normal)] = 13;
    const auto corpus = generate_corpus(cfg, bank(), bank().vocab());
    EXPECT_EQ(quality::balance_rate(quality::count_labels(corpus.windows)), 0.0);
    cfg.class_plan[class_index(ClassLabel::Normal)] = 12;
    EXPECT_THROW(generate_corpus(cfg, bank(), bank().vocab()), std::domain_error);
}

// Multimix -----------------------------------------------------------------

TEST(Multimix, EndpointsAndMidpoint) {
    auto a = goose::testing::periodic(4, kMicrosPerSecond, 27, 100);
    auto b = goose::testing::periodic(4, kMicrosPerSecond, 27, 200);
    a.label = ClassLabel::DI;
    b.label = ClassLabel::RE;
    b.messages[0].goid = "B";
    EXPECT_EQ(multimix_window(a, b, 1.0), a);
    EXPECT_EQ(multimix_window(a, b, 0.0), b);
    const auto mid = multimix_window(a, b, 0.5);
    EXPECT_EQ(mid.messages[0].sq_num, 150u);
    EXPECT_EQ(mid.label, ClassLabel::DI);
    EXPECT_EQ(mid.messages[0].goid, a.messages[0].goid);
    EXPECT_THROW(multimix_window(a, b, 1.5), std::domain_error);
    const std::vector<MessageWindow> one = {a};
    EXPECT_THROW(multimix_baseline(one, 3, 1), std::domain_error);
}

TEST(Multimix, InheritsSkewedBalance) {
    GenerationConfig cfg;
    const auto vocab = bank().vocab();
    std::vector<MessageWindow> skewed;
    for (std::uint64_t s = 0; s < 24; ++s) {
        const ClassLabel c = s < 16 ? ClassLabel::Normal : s < 21 ? ClassLabel::DI : ClassLabel::DOS;
        skewed.push_back(generate_window(bank().templates[s % bank().templates.size()], c, cfg, vocab, {}, s));
    }
    const auto mixed = multimix_baseline(skewed, 130, 4);
    EXPECT_EQ(mixed.windows.size(), 130u);
    cfg.class_plan.fill(10);
    const auto aatm = generate_corpus(cfg, SeedBank::from_windows(skewed), vocab);
    EXPECT_LT(quality::balance_rate(quality::count_labels(mixed.windows)),
              quality::balance_rate(quality::count_labels(aatm.windows)));
}

// Config -------------------------------------------------------------------

TEST(Config, ParseRoundTrip) {
    std::istringstream in(
        "# sample\nalpha = 0.5\nbeta = 0.25\ngamma = 0.25\nlambda_violation = 2\n"
        "target_rules = 1, 7\nclass_plan.* = 3\nclass_plan.ZeroDay = 9\nwindow_length = 12\n"
        "rng_seed = 42\ntransition.4 = 1, 1, 0.5, 1, 1\n");
    const auto cfg = parse_config(in);
    EXPECT_EQ(cfg.alpha, 0.5);
    EXPECT_EQ(cfg.target_rules, rule_set({1, 7}));
    EXPECT_EQ(cfg.class_plan[class_index(ClassLabel::ZeroDay)], 9u);
    EXPECT_EQ(cfg.plan_total(), 12u * 3 + 9);
    ASSERT_TRUE(cfg.transition);
    EXPECT_EQ((*cfg.transition)[3][2], 0.5);
    std::istringstream again(to_text(cfg));
    const auto back = parse_config(again);
    EXPECT_EQ(to_text(back), to_text(cfg));
    EXPECT_EQ(back.rule_weights, cfg.rule_weights);
}

TEST(Config, Rejections) {
    auto bad = [](const std::string& text) {
        std::istringstream in(text);
        EXPECT_THROW(parse_config(in), ConfigError) << text;
    };
    bad("alpha = 0.5\n");
    bad("rule_weights = 1,1,1,1,1,1,1,2\n");
    bad("window_length = 1\n");
    bad("mystery = 3\n");
    bad("class_plan.dos = 3\n");
    bad("target_rules = 9\n");
    bad("alpha 0.4\n");
    bad("lambda_violation = abc\n");
    EXPECT_THROW(load_config_file("/nonexistent/goose.conf"), ConfigError);
}
