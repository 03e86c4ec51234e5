#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "goose/ingest/csv.hpp"
#include "goose/ingest/hash.hpp"
#include "goose/ingest/pcap.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

// Runs goosectl with stderr folded into the captured output.
RunResult goosectl(const std::string& args) {
    const std::string cmd = std::string(GOOSECTL_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) throw std::runtime_error("popen failed");
    RunResult r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    fs::path dir;

    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / ("goosectl_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string path(const std::string& name) const { return (dir / name).string(); }

    void write(const std::string& name, const std::string& text) const {
        std::ofstream out(dir / name);
        out << text;
    }
};

const std::string kFixtures = GOOSE_FIXTURES;

}  // namespace

TEST_F(CliTest, HelpAndVersion) {
    EXPECT_EQ(goosectl("--help").code, 0);
    EXPECT_EQ(goosectl("generate --help").code, 0);
    const auto v = goosectl("--version");
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find("0.1.0"), std::string::npos);
    EXPECT_EQ(goosectl("").code, 1);
    EXPECT_EQ(goosectl("frobnicate").code, 1);
}

TEST_F(CliTest, FullPipeline) {
    write("gen.conf", "rng_seed = 11\nwindow_length = 10\nclass_plan.* = 2\n");
    ASSERT_EQ(goosectl("seeds --out " + path("seeds.csv") + " --seed 5 --per-profile 4").code, 0);

    auto r = goosectl("generate --config " + path("gen.conf") + " --seeds " + path("seeds.csv") + " --out " +
                      path("corpus.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto corpus = goose::ingest::import_csv_file(path("corpus.csv"));
    EXPECT_EQ(corpus.windows.size(), 26u);

    const auto manifest = nlohmann::json::parse(slurp(path("corpus.csv.manifest.json")));
    EXPECT_EQ(manifest.at("rng_seed"), 11);
    EXPECT_EQ(manifest.at("corpus_hash"), goose::ingest::corpus_hash(corpus));
    EXPECT_EQ(manifest.at("subcommand"), "generate");

    r = goosectl("validate " + path("corpus.csv") + " --out " + path("quality.json"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto q = nlohmann::json::parse(slurp(path("quality.json")));
    EXPECT_NEAR(q.at("balance_rate").get<double>(), 1.0, 1e-12);

    r = goosectl("detect " + path("corpus.csv") + " --out " + path("pred.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    r = goosectl("evaluate " + path("pred.csv") + " " + path("corpus.csv") + " --out " + path("rules.json") +
                 " --detector rules");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto report = nlohmann::json::parse(slurp(path("rules.json")));
    EXPECT_EQ(report.at("detector"), "rules");
    EXPECT_EQ(report.at("corpus_hash"), goose::ingest::corpus_hash(corpus));
    EXPECT_GE(report.at("metrics").at("accuracy").get<double>(), 0.9);

    r = goosectl("compare " + path("rules.json") + " " + kFixtures + "/reference_reports/genai.json --out " + path("cmp.json"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("different corpora"), std::string::npos);
}

TEST_F(CliTest, CompareMarksBestDetector) {
    const std::string refs = kFixtures + "/reference_reports/";
    const auto r = goosectl("compare " + refs + "fnn.json " + refs + "rnn.json " + refs + "svm.json " + refs + "genai.json");
    ASSERT_EQ(r.code, 0) << r.out;
    std::istringstream lines(r.out);
    std::string line;
    bool saw_mcc = false;
    while (std::getline(lines, line)) {
        if (line.rfind("mcc", 0) == 0) {
            saw_mcc = true;
            EXPECT_NE(line.find("0.9450*"), std::string::npos) << line;
        }
    }
    EXPECT_TRUE(saw_mcc);
    EXPECT_EQ(goosectl("compare " + refs + "fnn.json").code, 1);
}

TEST_F(CliTest, SameSeedIsByteIdentical) {
    write("gen.conf", "rng_seed = 3\nclass_plan.* = 1\n");
    ASSERT_EQ(goosectl("generate --config " + path("gen.conf") + " --out " + path("a.csv")).code, 0);
    ASSERT_EQ(goosectl("generate --config " + path("gen.conf") + " --out " + path("b.csv")).code, 0);
    ASSERT_EQ(goosectl("generate --config " + path("gen.conf") + " --seed 4 --out " + path("c.csv")).code, 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(CliTest, UsageErrorsExitOne) {
    write("empty.conf", "rng_seed = 3\n");
    write("small.conf", "class_plan.DOS = 5\n");
    write("bad.conf", "alpha = -1\nclass_plan.* = 1\n");
    EXPECT_EQ(goosectl("generate --config " + path("empty.conf") + " --out " + path("x.csv")).code, 1);
    EXPECT_EQ(goosectl("generate --config " + path("small.conf") + " --out " + path("x.csv")).code, 1);
    EXPECT_EQ(goosectl("generate --config " + path("bad.conf") + " --out " + path("x.csv")).code, 1);
    EXPECT_EQ(goosectl("generate --config " + path("missing.conf") + " --out " + path("x.csv")).code, 1);
    write("ok.conf", "class_plan.* = 1\n");
    EXPECT_EQ(goosectl("generate --config " + path("ok.conf") + " --engine gan --out " + path("x.csv")).code, 1);
    EXPECT_EQ(goosectl("detect " + kFixtures + "/box_windows.csv --engine magic --out " + path("x.csv")).code, 1);
    EXPECT_EQ(goosectl("detect " + kFixtures + "/box_windows.csv --engine llm --out " + path("x.csv")).code, 1);
    EXPECT_EQ(goosectl("validate " + path("nope.csv")).code, 1);
    EXPECT_FALSE(fs::exists(path("x.csv")));
}

TEST_F(CliTest, DataErrorsExitTwo) {
    write("broken.csv", "window_id,label\nw,DOS\n");
    EXPECT_EQ(goosectl("validate " + path("broken.csv")).code, 2);
    write("bad.json", "{not json");
    EXPECT_EQ(goosectl("compare " + path("bad.json") + " " + kFixtures + "/reference_reports/fnn.json").code, 2);
}

TEST_F(CliTest, MockLlmDetectsBoxWindows) {
    const auto r = goosectl("detect " + kFixtures + "/box_windows.csv --engine llm --mock " + kFixtures +
                            "/box_mock.txt --batch-size 5 --out " + path("pred.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto pred = goose::ingest::import_csv_file(path("pred.csv"));
    ASSERT_EQ(pred.windows.size(), 3u);
    EXPECT_EQ(pred.windows[0].label, goose::ClassLabel::DI);
    EXPECT_EQ(pred.windows[1].label, goose::ClassLabel::Normal);
    EXPECT_EQ(pred.windows[2].label, goose::ClassLabel::DOS);
    EXPECT_TRUE(fs::exists(path("pred.csv.transcript.jsonl")));
    const auto manifest = nlohmann::json::parse(slurp(path("pred.csv.manifest.json")));
    EXPECT_EQ(manifest.at("engine"), "llm");
}

TEST_F(CliTest, RulesEngineOnBoxWindows) {
    const auto r = goosectl("detect " + kFixtures + "/box_windows.csv --out " + path("pred.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto pred = goose::ingest::import_csv_file(path("pred.csv"));
    ASSERT_EQ(pred.windows.size(), 3u);
    EXPECT_EQ(pred.windows[0].label, goose::ClassLabel::DI);
    EXPECT_EQ(pred.windows[1].label, goose::ClassLabel::Normal);
    EXPECT_EQ(pred.windows[2].label, goose::ClassLabel::DOS);
}

TEST_F(CliTest, PcapRoundTrip) {
    ASSERT_EQ(goosectl("export-pcap " + kFixtures + "/box_windows.csv --vlan --out " + path("box.pcap")).code, 0);
    const auto r = goosectl("ingest " + path("box.pcap") + " --window-length 8 --out " + path("back.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto orig = goose::ingest::import_csv_file(kFixtures + "/box_windows.csv");
    const auto back = goose::ingest::import_csv_file(path("back.csv"));
    std::size_t n = 0, k = 0;
    for (const auto& w : orig.windows) n += w.messages.size();
    ASSERT_EQ(back.windows.size(), (n + 7) / 8);
    for (const auto& ow : orig.windows)
        for (const auto& m : ow.messages) {
            const auto& got = back.windows[k / 8].messages[k % 8];
            EXPECT_EQ(got, m) << "message " << k;
            ++k;
        }
}

TEST_F(CliTest, PcapWithoutGooseGivesHeaderOnly) {
    ASSERT_EQ(goosectl("ingest " + path("none.pcap") + " --out " + path("x.csv")).code, 1);

    goose::ingest::write_pcap_file(path("empty.pcap"), std::vector<goose::ingest::RawFrame>{});
    auto r = goosectl("ingest " + path("empty.pcap") + " --out " + path("empty.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(goose::ingest::import_csv_file(path("empty.csv")).windows.empty());

    // A single IPv4 frame: ethertype 0x0800.
    goose::ingest::RawFrame f;
    f.bytes.assign(60, 0);
    f.bytes[12] = 0x08;
    f.bytes[13] = 0x00;
    goose::ingest::write_pcap_file(path("ipv4.pcap"), std::vector<goose::ingest::RawFrame>{f});
    r = goosectl("ingest " + path("ipv4.pcap") + " --out " + path("ipv4.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(goose::ingest::import_csv_file(path("ipv4.csv")).windows.empty());
    EXPECT_NE(r.out.find("0 GOOSE frames"), std::string::npos);
}
