#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "regime/cli/commands.hpp"
#include "regime/cli/config.hpp"
#include "regime/csv.hpp"
#include "regime/errors.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace regime;
using namespace regime::cli;

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("regime_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    RunResult run(const std::string& args) const {
        const auto out = dir_ / "stdout.txt";
        const auto err = dir_ / "stderr.txt";
        const std::string cmd = "cd '" + dir_.string() + "' && '" REGIME_CLI_BINARY "' " + args + " > '" +
                                out.string() + "' 2> '" + err.string() + "'";
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
    }

    fs::path dir_;
};

TEST(Config, DefaultsFileAndOverrides) {
    const auto& spec = command_spec("density");
    const json d = resolve_config(spec, json::object(), {});
    EXPECT_EQ(d["command"], "density");
    EXPECT_EQ(d["nu"], 1.0);
    EXPECT_EQ(d["sigma"], 0.2);
    EXPECT_TRUE(d["x_min"].is_null());
    const json f = resolve_config(spec, json{{"command", "density"}, {"nu", 2}, {"t", 0.5}}, {{"t", "3"}});
    EXPECT_EQ(f["nu"], 2.0);
    EXPECT_TRUE(f["nu"].is_number_float());
    EXPECT_EQ(f["t"], 3.0);
    EXPECT_EQ(f["compare_fp"], false);
    const json b = resolve_config(spec, json::object(), {{"compare_fp", "true"}, {"n_points", "11"}});
    EXPECT_EQ(b["compare_fp"], true);
    EXPECT_EQ(b["n_points"], 11);
    const json l = resolve_config(command_spec("default-prob"), json::object(), {{"horizons", "1,2.5,10"}});
    EXPECT_EQ(l["horizons"], json::array({1.0, 2.5, 10.0}));
}

TEST(Config, Rejections) {
    const auto& spec = command_spec("density");
    EXPECT_THROW(resolve_config(spec, json{{"bogus", 1}}, {}), Error);
    EXPECT_THROW(resolve_config(spec, json::object(), {{"bogus", "1"}}), Error);
    EXPECT_THROW(resolve_config(spec, json{{"command", "simulate"}}, {}), Error);
    EXPECT_THROW(resolve_config(spec, json{{"nu", "fast"}}, {}), Error);
    EXPECT_THROW(resolve_config(spec, json::object(), {{"nu", "fast"}}), Error);
    EXPECT_THROW(resolve_config(spec, json::object(), {{"n_points", "2.5"}}), Error);
    EXPECT_THROW(command_spec("nonexistent"), Error);
    EXPECT_EQ(flag_name("x_star"), "x-star");
    EXPECT_EQ(flag_name("nu"), "nu");
}

TEST(Config, EveryCommandHasUniqueKeys) {
    for (const auto& spec : command_specs()) {
        std::set<std::string> keys;
        for (const auto& f : spec.fields) EXPECT_TRUE(keys.insert(f.key).second) << spec.name << "." << f.key;
        EXPECT_NO_THROW(resolve_config(spec, json::object(), {}));
    }
}

TEST(ExitCodes, Mapping) {
    EXPECT_EQ(exit_code(ErrorKind::Validation), 2);
    EXPECT_EQ(exit_code(ErrorKind::Parse), 3);
    EXPECT_EQ(exit_code(ErrorKind::Io), 3);
    EXPECT_EQ(exit_code(ErrorKind::EmptyResult), 5);
    EXPECT_EQ(exit_code(ErrorKind::UniverseTooSmall), 6);
}

TEST_F(CliTest, DensityWritesNormalizedGrid) {
    const auto r = run("density --nu 1 --sigma 1 --x-star 0 --x0 0 --t 1 --n-points 5 --x-min -2 --x-max 2");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("normalization,1"), std::string::npos) << r.out;
    const auto table = csv::read(dir_ / "density.csv");
    ASSERT_EQ(table.header, (std::vector<std::string>{"x", "closed_form"}));
    ASSERT_EQ(table.rows.size(), 5u);
    EXPECT_EQ(table.rows[2][0], "0");
    EXPECT_NEAR(csv::to_double(table.rows[2][1], "p"), 0.241971, 1e-6);
    EXPECT_TRUE(fs::exists(dir_ / "density.csv.config.json"));
}

TEST_F(CliTest, DensityOracleColumnsAndTolerance) {
    auto r = run("density --compare-fp --x-min -1 --x-max 1 --n-points 21");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto table = csv::read(dir_ / "density.csv");
    EXPECT_EQ(table.header, (std::vector<std::string>{"x", "closed_form", "fp"}));
    r = run("density --compare-fp --fp-dx 0.05 --fp-tolerance 1e-9 --x-min -1 --x-max 1 --n-points 21");
    EXPECT_EQ(r.code, 4) << r.out << r.err;
}

TEST_F(CliTest, ValidationFailures) {
    EXPECT_EQ(run("density --t 0").code, 2);
    EXPECT_EQ(run("density --t -1").code, 2);
    EXPECT_EQ(run("density --no-such-flag 1").code, 2);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("default-prob --s0 -5").code, 2);
    std::ofstream(dir_ / "bad.json") << R"({"command": "density", "nu": 1, "colour": "red"})";
    const auto r = run("density --config bad.json");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("colour"), std::string::npos);
    std::ofstream(dir_ / "broken.json") << "{ not json";
    EXPECT_EQ(run("density --config broken.json").code, 2);
    EXPECT_EQ(run("density --config missing.json").code, 3);
}

TEST_F(CliTest, DefaultProbTable) {
    const auto r = run("default-prob --horizons 25,100,400");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = csv::read(dir_ / "default_prob.csv");
    ASSERT_EQ(t.rows.size(), 3u);
    const auto col = t.column("finite_prob");
    const auto lim = t.column("asymptotic_prob");
    for (const auto& row : t.rows) EXPECT_NEAR(csv::to_double(row[lim], "a"), 1.0 / 3.25, 1e-15);
    EXPECT_NEAR(csv::to_double(t.rows[2][col], "f"), 1.0 / 3.25, 0.005);
    EXPECT_EQ(t.rows[0][t.column("validity")], "outside");
    EXPECT_EQ(t.rows[2][t.column("validity")], "ok");
}

TEST_F(CliTest, SimulateAndFpCheck) {
    auto r = run("simulate --n-paths 4 --dt 0.25 --horizon 1 --store-paths");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = csv::read(dir_ / "ensemble.csv");
    EXPECT_EQ(t.rows.size(), 4u * 5u);
    r = run("fp-check --dx 0.01 --dt 2e-4 --tolerance 0.05");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("max_rel_error"), std::string::npos);
    EXPECT_EQ(run("fp-check --dx 0.01 --dt 2e-4").code, 4);
    EXPECT_EQ(run("fp-check --x-min 0 --x-max 1").code, 2);
}

TEST_F(CliTest, PipelineRerunIsByteIdentical) {
    ASSERT_EQ(run("synth-universe --n-names 20 --n-days 126 --out-dir a").code, 0);
    ASSERT_EQ(run("extract --manifest a/manifest.csv --out a_sig.csv").code, 0);
    ASSERT_EQ(run("backtest --manifest a/manifest.csv --signals a_sig.csv --truth a/truth.csv --out-dir a_bt").code,
              0);

    ASSERT_EQ(run("synth-universe --config a/config.json --out-dir b").code, 0);
    ASSERT_EQ(run("extract --config a_sig.csv.config.json --manifest b/manifest.csv --out b_sig.csv").code, 0);
    ASSERT_EQ(run("backtest --config a_bt/config.json --manifest b/manifest.csv --signals b_sig.csv "
                  "--truth b/truth.csv --out-dir b_bt")
                  .code,
              0);
    EXPECT_EQ(slurp(dir_ / "a_sig.csv"), slurp(dir_ / "b_sig.csv"));
    for (const auto& e : fs::recursive_directory_iterator(dir_ / "a")) {
        if (!e.is_regular_file() || e.path().filename() == "config.json" || e.path().filename() == "manifest.csv")
            continue;
        const auto rel = fs::relative(e.path(), dir_ / "a");
        EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / rel)) << rel;
    }
    std::size_t weight_files = 0;
    for (const auto& e : fs::directory_iterator(dir_ / "a_bt" / "weights")) {
        EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b_bt" / "weights" / e.path().filename()));
        ++weight_files;
    }
    EXPECT_GT(weight_files, 3u);
    const json ra = json::parse(slurp(dir_ / "a_bt" / "report.json"));
    const json rb = json::parse(slurp(dir_ / "b_bt" / "report.json"));
    EXPECT_EQ(ra, rb);
    EXPECT_GT(ra["spearman_true_vs_extracted"].get<double>(), 0.95);
}

TEST_F(CliTest, SpreadRescalingGivesIdenticalWeights) {
    ASSERT_EQ(run("synth-universe --n-names 20 --n-days 126 --out-dir u").code, 0);
    fs::copy(dir_ / "u", dir_ / "u7", fs::copy_options::recursive);
    for (const auto& e : fs::directory_iterator(dir_ / "u7" / "spreads")) {
        const auto t = csv::read(e.path());
        std::ofstream out(e.path());
        out << "date,price,spread_bps\n";
        for (const auto& row : t.rows) {
            out << row[0] << ',' << row[1] << ',' << csv::format_double(7.0 * csv::to_double(row[2], "z")) << '\n';
        }
    }
    ASSERT_EQ(run("extract --manifest u/manifest.csv --out s1.csv").code, 0);
    ASSERT_EQ(run("extract --manifest u7/manifest.csv --out s7.csv").code, 0);
    ASSERT_EQ(run("backtest --manifest u/manifest.csv --signals s1.csv --out-dir b1").code, 0);
    ASSERT_EQ(run("backtest --manifest u7/manifest.csv --signals s7.csv --out-dir b7").code, 0);
    for (const auto& e : fs::directory_iterator(dir_ / "b1" / "weights")) {
        EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b7" / "weights" / e.path().filename()));
    }
}

TEST_F(CliTest, DataErrorsMapToExitCodes) {
    std::ofstream(dir_ / "empty.csv") << "name,price_file,spread_file\n";
    EXPECT_EQ(run("extract --manifest empty.csv --out s.csv").code, 5);
    EXPECT_EQ(run("extract --manifest nowhere.csv --out s.csv").code, 3);

    ASSERT_EQ(run("synth-universe --n-names 9 --n-days 63 --out-dir small").code, 0);
    ASSERT_EQ(run("extract --manifest small/manifest.csv --out small.csv").code, 0);
    const auto r = run("backtest --manifest small/manifest.csv --signals small.csv --out-dir bt");
    EXPECT_EQ(r.code, 6) << r.err;
}

TEST_F(CliTest, CorruptFilesAreIsolatedPerName) {
    ASSERT_EQ(run("synth-universe --n-names 12 --n-days 63 --out-dir u").code, 0);
    std::ofstream(dir_ / "u" / "spreads" / "N003.csv") << "date,price,spread_bps\n2021-01-04,abc,12\n";
    {
        std::ofstream f(dir_ / "u" / "spreads" / "N007.csv");
        f << "date,price,spread_bps\n";
        for (int i = 0; i < 30; ++i) f << "2021-01-" << (i < 10 ? "0" : "") << i + 1 << ",50,-3\n";
    }
    const auto r = run("extract --manifest u/manifest.csv --out s.csv");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("N003"), std::string::npos);
    EXPECT_NE(r.err.find("N007"), std::string::npos);
    EXPECT_NE(r.out.find("failed_names,2"), std::string::npos) << r.out;
    const auto t = csv::read(dir_ / "s.csv");
    for (const auto& row : t.rows) {
        EXPECT_NE(row[0], "N003");
        EXPECT_NE(row[0], "N007");
    }
    // 10 names remain, enough for a decile book
    EXPECT_EQ(run("backtest --manifest u/manifest.csv --signals s.csv --out-dir bt").code, 0);
}

}  // namespace
