#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hasprof/cli.hpp"
#include "hasprof/config.hpp"

using namespace hasprof;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "hasprof");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("hasprof_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) ++n;
  }
  return n;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  Config cfg;
  cfg.profiler.rate.a = 0.05;
  cfg.profiler.burst.h_n = 4;
  cfg.generator.jitter = 0.2;
  cfg.thresholds.max_nrmse_mq_hq = 0.03;
  const auto back = config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));
  EXPECT_DOUBLE_EQ(back.profiler.rate.a, 0.05);
  EXPECT_EQ(back.profiler.burst.h_n, 4);
}

TEST(Config, MissingKeysKeepDefaults) {
  const auto cfg = config_from_json(json::parse(R"({"rate": {"c": 0.7}})"));
  EXPECT_DOUBLE_EQ(cfg.profiler.rate.c, 0.7);
  EXPECT_DOUBLE_EQ(cfg.profiler.rate.delta_t, 0.1);
  EXPECT_DOUBLE_EQ(cfg.profiler.burst.h_s, 20000.0);
}

TEST(Config, UnknownKeyIsNamed) {
  try {
    config_from_json(json::parse(R"({"rate": {"alpha": 0.1}})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rate.alpha"), std::string::npos) << e.what();
  }
}

TEST(Config, WrongTypeIsNamed) {
  try {
    config_from_json(json::parse(R"({"rate": {"a": "small"}})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rate.a"), std::string::npos) << e.what();
  }
}

TEST(Config, InvariantViolationIsConfigError) {
  EXPECT_THROW(config_from_json(json::parse(R"({"rate": {"c": 0.5}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"burst": {"h_r": 1.0}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"burst": {"h_n": 0}})")), ConfigError);
}

TEST(Config, ScenarioRoundTrip) {
  const auto spec = scenario_preset("AQ", 9);
  const auto back = scenario_from_json(to_json(spec));
  EXPECT_EQ(to_json(back), to_json(spec));
  EXPECT_EQ(generate(back).trace, generate(spec).trace);
}

TEST(Config, MalformedScenario) {
  EXPECT_THROW(scenario_from_json(json::parse(R"({"name": "x"})")), ConfigError);
  EXPECT_THROW(scenario_from_json(json::parse(R"({"encode_rates": 3})")), ConfigError);
  EXPECT_THROW(scenario_from_json(json::parse(R"({"encode_rates": [{"rate": 1000, "speed": 1}]})")),
               ConfigError);
  EXPECT_THROW(scenario_from_json(json::parse(R"({"encode_rates": [{"rate": -5}]})")), ConfigError);
}

TEST(Cli, GenerateIsDeterministic) {
  TempDir dir;
  ASSERT_EQ(run({"generate", "MQ", "--seed", "3", "-o", dir / "a.csv"}).code, kExitOk);
  ASSERT_EQ(run({"generate", "MQ", "--seed", "3", "-o", dir / "b.csv"}).code, kExitOk);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(slurp(dir / "a.labels.csv"), slurp(dir / "b.labels.csv"));
  ASSERT_EQ(run({"generate", "MQ", "--seed", "4", "-o", dir / "c.csv"}).code, kExitOk);
  EXPECT_NE(slurp(dir / "a.csv"), slurp(dir / "c.csv"));
}

TEST(Cli, GenerateQcWritesFourLabels) {
  TempDir dir;
  const auto r = run({"generate", "QC", "--seed", "2", "-o", dir / "qc.csv", "--labels", dir / "qc_l.csv"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_GE(line_count(dir / "qc_l.csv"), 4u);
}

TEST(Cli, GenerateFromSpecFile) {
  TempDir dir;
  std::ofstream(dir / "spec.json") << to_json(scenario_preset("MQ", 1)).dump(2);
  const auto r = run({"generate", "--spec", dir / "spec.json", "-o", dir / "t.csv"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_GT(line_count(dir / "t.csv"), 1000u);
}

TEST(Cli, GenerateNeedsExactlyOneSource) {
  EXPECT_EQ(run({"generate"}).code, kExitUsage);
  EXPECT_EQ(run({"generate", "MQ", "--spec", "x.json"}).code, kExitUsage);
}

TEST(Cli, UnknownScenarioListsPresets) {
  TempDir dir;
  const auto r = run({"generate", "XQ", "-o", dir / "x.csv"});
  EXPECT_EQ(r.code, kExitUsage);
  for (const char* name : {"MQ", "HQ", "QC", "AQ", "BULK"}) {
    EXPECT_NE(r.err.find(name), std::string::npos) << r.err;
  }
}

TEST(Cli, AnalyzeMqIsVideoStream) {
  TempDir dir;
  ASSERT_EQ(run({"generate", "MQ", "--seed", "5", "-o", dir / "mq.csv"}).code, kExitOk);
  const auto r = run({"analyze", dir / "mq.csv", "-o", dir / "mq.json", "--debug-dir", dir / "dbg"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("video stream: yes"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("unit:"), std::string::npos);
  const auto doc = json::parse(slurp(dir / "mq.json"));
  EXPECT_EQ(doc.at("video_streams").get<int>(), 1);
  const auto& session = doc.at("flows").at(0).at("sessions").at(0);
  EXPECT_TRUE(session.at("verdict").at("is_video_stream").get<bool>());
  bool rate_csv = false;
  for (const auto& e : fs::directory_iterator(dir / "dbg")) {
    rate_csv |= e.path().string().ends_with(".rate.csv");
  }
  EXPECT_TRUE(rate_csv);

  const auto rep = run({"report", dir / "mq.json"});
  ASSERT_EQ(rep.code, kExitOk) << rep.err;
  EXPECT_EQ(rep.out.rfind("unit: ", 0), 0u) << rep.out;
  EXPECT_NE(rep.out.find("steady_state"), std::string::npos) << rep.out;
}

TEST(Cli, AnalyzeBulkIsNotVideoStream) {
  TempDir dir;
  ASSERT_EQ(run({"generate", "BULK", "--seed", "5", "-o", dir / "bulk.csv"}).code, kExitOk);
  const auto r = run({"analyze", dir / "bulk.csv", "-o", dir / "bulk.json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("video stream: no"), std::string::npos) << r.out;
  EXPECT_EQ(json::parse(slurp(dir / "bulk.json")).at("video_streams").get<int>(), 0);
}

TEST(Cli, MissingTraceNamesPath) {
  const auto r = run({"analyze", "/nonexistent/trace.csv", "-o", "/tmp/never.json"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("/nonexistent/trace.csv"), std::string::npos) << r.err;
}

TEST(Cli, InvalidParameterIsUsageError) {
  TempDir dir;
  ASSERT_EQ(run({"generate", "MQ", "-o", dir / "mq.csv"}).code, kExitOk);
  const auto r = run({"analyze", dir / "mq.csv", "-o", dir / "r.json", "--c", "0.5"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("c"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "r.json"));
}

TEST(Cli, MissingSubcommandIsUsageError) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST(Cli, EvaluateZeroRunsIsUsageError) {
  EXPECT_EQ(run({"evaluate", "MQ", "-n", "0"}).code, kExitUsage);
}

TEST(Cli, EvaluateMqPasses) {
  TempDir dir;
  const auto r = run({"evaluate", "MQ", "-n", "50", "-o", dir / "mq_eval.json", "--cdf-dir", dir / "cdf"});
  ASSERT_EQ(r.code, kExitOk) << r.out << r.err;
  const auto doc = json::parse(slurp(dir / "mq_eval.json"));
  bool saw_nrmse = false;
  for (const auto& c : doc.at("thresholds")) {
    EXPECT_TRUE(c.at("passed").get<bool>()) << c.dump();
    if (c.at("metric").get<std::string>().find("nrmse") != std::string::npos) {
      EXPECT_LE(c.at("value").get<double>(), 0.02);
      saw_nrmse = true;
    }
  }
  EXPECT_TRUE(saw_nrmse);
  EXPECT_TRUE(fs::exists(dir / "cdf/MQ_steady1_r_hat.csv"));
  const auto rep = run({"report", dir / "mq_eval.json"});
  ASSERT_EQ(rep.code, kExitOk) << rep.err;
  EXPECT_NE(rep.out.find("nrmse"), std::string::npos) << rep.out;
}

TEST(Cli, ThresholdFailureExitsOneAndNamesMetric) {
  TempDir dir;
  std::ofstream(dir / "strict.json") << R"({"thresholds": {"max_nrmse_mq_hq": 1e-9}})";
  const auto r = run({"evaluate", "MQ", "-n", "2", "--config", dir / "strict.json"});
  EXPECT_EQ(r.code, kExitAcceptance);
  EXPECT_NE(r.err.find("nrmse"), std::string::npos) << r.err;
}

// Per-phase diagonal target on the throttled scenario.
TEST(Cli, EvaluateAqDiagonalPerPhase) {
  const auto rep = batch_report("AQ", 50, ProfilerParams{});
  for (const auto phase : {Phase::filling, Phase::steady_state, Phase::other}) {
    const auto d = rep.confusion.diagonal_percent(phase);
    ASSERT_TRUE(d.has_value());
    EXPECT_GE(*d, 98.0) << "phase " << phase_index(phase);
  }
}

TEST(Cli, InstalledBinaryRuns) {
  const char* bin = std::getenv("HASPROF_BIN");
  if (bin == nullptr) GTEST_SKIP() << "HASPROF_BIN not set";
  TempDir dir;
  const std::string cmd = std::string("\"") + bin + "\" generate HQ --seed 2 -o \"" + (dir / "hq.csv") +
                          "\" > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_GT(line_count(dir / "hq.csv"), 1000u);
  const std::string bad = std::string("\"") + bin + "\" evaluate MQ -n 0 > /dev/null 2>&1";
  const int status = std::system(bad.c_str());
  EXPECT_EQ(WEXITSTATUS(status), kExitUsage);
}
