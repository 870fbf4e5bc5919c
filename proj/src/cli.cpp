#include "hasprof/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "hasprof/config.hpp"
#include "hasprof/report_json.hpp"

namespace hasprof {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::optional<double> delta_t, a, c, h_t, h_d, h_r, h_s, match_tolerance;
  std::optional<int> h_n;
  std::string config_path;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file");
    app->add_option("--delta-t", delta_t, "rate bin width (s)");
    app->add_option("--a", a, "low-pass attenuation factor");
    app->add_option("--c", c, "rate-change threshold factor");
    app->add_option("--h-t", h_t, "burst IAT threshold (s)");
    app->add_option("--h-d", h_d, "burst duration threshold (s)");
    app->add_option("--h-r", h_r, "burst rate ratio threshold");
    app->add_option("--h-s", h_s, "minimum burst size (bytes)");
    app->add_option("--h-n", h_n, "consecutive steady bursts required");
    app->add_option("--match-tolerance", match_tolerance, "fusion time tolerance (s)");
  }

  Config resolve() const {
    Config cfg = config_path.empty() ? Config{} : load_config(config_path);
    auto& p = cfg.profiler;
    if (delta_t) p.rate.delta_t = *delta_t;
    if (a) p.rate.a = *a;
    if (c) p.rate.c = *c;
    if (h_t) p.burst.h_t = *h_t;
    if (h_d) p.burst.h_d = *h_d;
    if (h_r) p.burst.h_r = *h_r;
    if (h_s) p.burst.h_s = *h_s;
    if (h_n) p.burst.h_n = *h_n;
    if (match_tolerance) p.fusion.match_tolerance = *match_tolerance;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return cfg;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  fn(out);
}

std::string flow_slug(const FlowKey& flow) {
  std::string s = flow.src + "_" + flow.dst + (flow.dst_port ? "_" + std::to_string(*flow.dst_port) : "");
  for (auto& ch : s) {
    if (ch == ':' || ch == '/') ch = '-';
  }
  return s;
}

int cmd_analyze(const std::string& input, const std::string& output, const std::string& debug_dir,
                const Config& cfg, std::ostream& out) {
  const auto trace = normalize(read_trace_file(input));
  json flows = json::array();
  std::size_t streams = 0;
  for (const auto& [flow, sub] : demux(trace)) {
    json sessions = json::array();
    const auto parts = split_sessions(sub, cfg.profiler.fusion.silence_timeout);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const auto report = profile(parts[i], cfg.profiler);
      streams += report.verdict.is_video_stream ? 1 : 0;
      sessions.push_back(to_json(report));
      if (!debug_dir.empty()) {
        const auto stem = fs::path(debug_dir) / (flow_slug(flow) + "_s" + std::to_string(i + 1));
        write_stream(stem.string() + ".rate.csv", [&](std::ostream& o) { write_rate_csv(o, report.rate); });
        write_stream(stem.string() + ".bursts.csv",
                     [&](std::ostream& o) { write_burst_csv(o, report.bursts); });
        if (report.buffer) {
          write_stream(stem.string() + ".buffer.csv",
                       [&](std::ostream& o) { write_buffer_csv(o, *report.buffer); });
        }
      }
      out << to_string(flow) << " session " << i + 1 << ": " << report.segments.size()
          << " segments, video stream: " << (report.verdict.is_video_stream ? "yes" : "no");
      if (report.rates.session) {
        out << ", rate " << std::fixed << std::setprecision(1) << *report.rates.session << " B/s ("
            << to_kbps(*report.rates.session) << " Kbps)" << std::defaultfloat << std::setprecision(6);
      }
      out << '\n';
    }
    flows.push_back({{"flow", {{"src", flow.src}, {"dst", flow.dst},
                               {"dst_port", flow.dst_port ? json(*flow.dst_port) : json(nullptr)}}},
                     {"sessions", sessions}});
  }
  const json doc = {{"unit", kUnitNote},
                    {"input", input},
                    {"config", to_json(cfg)},
                    {"video_streams", streams},
                    {"flows", flows}};
  write_text(output, doc.dump(2) + "\n");
  out << "unit: " << kUnitNote << '\n';
  return kExitOk;
}

int cmd_generate(const std::string& scenario, const std::string& spec_path, std::uint64_t seed,
                 bool seed_given, const std::string& output, std::string labels_path,
                 const Config& cfg, std::ostream& out) {
  LabeledTrace labeled;
  if (!spec_path.empty()) {
    auto spec = load_scenario(spec_path);
    if (seed_given) spec.rng_seed = seed;
    labeled = generate(spec);
  } else {
    labeled = generate_named(scenario, seed, cfg.generator);
  }
  if (labels_path.empty()) {
    labels_path = (fs::path(output).parent_path() / fs::path(output).stem()).string() + ".labels.csv";
  }
  write_stream(output, [&](std::ostream& o) { write_trace(o, labeled.trace); });
  write_stream(labels_path, [&](std::ostream& o) { write_labels(o, labeled.labels); });
  out << "wrote " << labeled.trace.size() << " packets to " << output << " and "
      << labeled.labels.size() << " labels to " << labels_path << '\n';
  return kExitOk;
}

int cmd_evaluate(const std::string& scenario, std::size_t runs, std::uint64_t seed,
                 const std::string& output, const std::string& cdf_dir, const Config& cfg,
                 std::ostream& out, std::ostream& err) {
  if (runs < 1) throw UsageError("--runs must be >= 1");
  const auto report = batch_report(scenario, runs, cfg.profiler, cfg.generator, seed);
  const auto checks = check_thresholds(report, cfg.thresholds);
  auto doc = to_json(report);
  doc["thresholds"] = to_json(checks);
  if (!output.empty()) write_text(output, doc.dump(2) + "\n");
  if (!cdf_dir.empty()) {
    for (std::size_t k = 0; k < report.steady_pairs.size(); ++k) {
      std::vector<double> hat;
      std::vector<double> truth;
      for (const auto& p : report.steady_pairs[k]) {
        hat.push_back(p.r_hat);
        truth.push_back(p.r_true);
      }
      const auto base = fs::path(cdf_dir) / (report.scenario + "_steady" + std::to_string(k + 1));
      write_stream(base.string() + "_r_hat.csv", [&](std::ostream& o) { write_cdf_csv(o, empirical_cdf(hat)); });
      write_stream(base.string() + "_r_true.csv",
                   [&](std::ostream& o) { write_cdf_csv(o, empirical_cdf(truth)); });
    }
  }
  out << "scenario " << report.scenario << ", " << report.runs << " runs\n";
  int code = kExitOk;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.metric << " = " << c.value
        << (c.upper_bound ? " (max " : " (min ") << c.threshold << ")\n";
    if (!c.passed) {
      err << "acceptance threshold violated: " << c.metric << '\n';
      code = kExitAcceptance;
    }
  }
  return code;
}

void print_profile_summary(const json& session, std::ostream& out) {
  for (const auto& seg : session.at("segments")) {
    out << "  " << std::left << std::setw(13) << seg.at("phase").get<std::string>() << std::right
        << std::fixed << std::setprecision(2) << std::setw(10) << seg.at("t_start").get<double>()
        << " -> " << std::setw(10) << seg.at("t_end").get<double>() << "  "
        << std::setw(12) << seg.at("volume").get<std::uint64_t>() << " B  " << std::setprecision(1)
        << seg.at("mean_rate").get<double>() << " B/s (" << seg.at("mean_rate_kbps").get<double>()
        << " Kbps)\n"
        << std::defaultfloat << std::setprecision(6);
  }
  const auto& est = session.at("rate_estimate").at("session");
  out << "  video stream: " << (session.at("verdict").at("is_video_stream").get<bool>() ? "yes" : "no");
  if (!est.is_null()) {
    out << ", encoding rate estimate " << std::fixed << std::setprecision(1)
        << est.at("bytes_per_s").get<double>() << " B/s (" << est.at("kbps").get<double>()
        << " Kbps)" << std::defaultfloat << std::setprecision(6);
  }
  out << '\n';
}

int cmd_report(const std::string& input, std::ostream& out) {
  std::ifstream in(input);
  if (!in) throw std::runtime_error("cannot open report file '" + input + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(input + ": " + e.what());
  }
  out << "unit: " << doc.value("unit", std::string(kUnitNote)) << '\n';
  if (doc.contains("flows")) {
    for (const auto& flow : doc.at("flows")) {
      const auto& f = flow.at("flow");
      out << "flow " << f.at("src").get<std::string>() << " -> " << f.at("dst").get<std::string>();
      if (!f.at("dst_port").is_null()) out << ":" << f.at("dst_port").get<int>();
      out << '\n';
      for (const auto& session : flow.at("sessions")) print_profile_summary(session, out);
    }
    return kExitOk;
  }
  if (doc.contains("scenario")) {
    out << "scenario " << doc.at("scenario").get<std::string>() << ", "
        << doc.at("runs").get<std::size_t>() << " runs\n";
    const auto& pct = doc.at("confusion").at("percent");
    const char* names[] = {"filling", "steady_state", "other"};
    out << "confusion (% of true time)   filling  steady_state  other\n";
    for (std::size_t i = 0; i < 3; ++i) {
      out << "  " << std::left << std::setw(26) << names[i] << std::right << std::fixed
          << std::setprecision(2);
      for (std::size_t j = 0; j < 3; ++j) out << std::setw(10) << pct[i][j].get<double>();
      out << '\n' << std::defaultfloat << std::setprecision(6);
    }
    for (const auto& phase : doc.at("steady_phases")) {
      out << "steady phase " << phase.at("steady_phase").get<int>() << ": nrmse ";
      if (phase.at("nrmse").is_null()) {
        out << "n/a";
      } else {
        out << phase.at("nrmse").get<double>();
      }
      out << " over " << phase.at("pairs").get<std::size_t>() << " runs\n";
    }
    if (doc.contains("thresholds")) {
      for (const auto& c : doc.at("thresholds")) {
        out << (c.at("passed").get<bool>() ? "PASS " : "FAIL ") << c.at("metric").get<std::string>()
            << " = " << c.at("value").get<double>() << '\n';
      }
    }
    return kExitOk;
  }
  throw std::runtime_error(input + ": not an analyze or evaluate report");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase identification and rate estimation for adaptive-streaming packet flows",
               "hasprof"};
  app.require_subcommand(1);

  Overrides analyze_ov;
  std::string analyze_in;
  std::string analyze_out = "report.json";
  std::string debug_dir;
  auto* analyze = app.add_subcommand("analyze", "Profile every flow of a packet trace");
  analyze->add_option("trace", analyze_in, "packet trace CSV")->required();
  analyze->add_option("-o,--output", analyze_out, "JSON report path");
  analyze->add_option("--debug-dir", debug_dir, "write rate/burst/buffer CSV dumps here");
  analyze_ov.attach(analyze);

  Overrides generate_ov;
  std::string scenario;
  std::string spec_path;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "trace.csv";
  std::string labels_out;
  auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic labeled trace");
  generate_cmd->add_option("scenario", scenario, "preset: MQ, HQ, QC, AQ or BULK");
  generate_cmd->add_option("--spec", spec_path, "scenario JSON file instead of a preset");
  auto* seed_opt = generate_cmd->add_option("--seed", gen_seed, "RNG seed");
  generate_cmd->add_option("-o,--output", gen_out, "trace CSV path");
  generate_cmd->add_option("--labels", labels_out, "label CSV path (default <output stem>.labels.csv)");
  generate_ov.attach(generate_cmd);

  Overrides evaluate_ov;
  std::string eval_scenario;
  long long eval_runs = 50;
  std::uint64_t eval_seed = 1;
  std::string eval_out;
  std::string cdf_dir;
  auto* evaluate = app.add_subcommand("evaluate", "Batch-score the profiler on a preset");
  evaluate->add_option("scenario", eval_scenario, "preset: MQ, HQ, QC, AQ or BULK")->required();
  evaluate->add_option("-n,--runs", eval_runs, "number of generated traces");
  evaluate->add_option("--seed", eval_seed, "first seed");
  evaluate->add_option("-o,--output", eval_out, "aggregate JSON report path");
  evaluate->add_option("--cdf-dir", cdf_dir, "write empirical CDF CSVs here");
  evaluate_ov.attach(evaluate);

  std::string report_in;
  auto* report = app.add_subcommand("report", "Summarize an analyze or evaluate JSON report");
  report->add_option("report", report_in, "JSON report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  try {
    if (*analyze) {
      return cmd_analyze(analyze_in, analyze_out, debug_dir, analyze_ov.resolve(), out);
    }
    if (*generate_cmd) {
      if (scenario.empty() == spec_path.empty()) {
        throw UsageError("give exactly one of a scenario name or --spec");
      }
      return cmd_generate(scenario, spec_path, gen_seed, seed_opt->count() > 0, gen_out, labels_out,
                          generate_ov.resolve(), out);
    }
    if (*evaluate) {
      if (eval_runs < 1) throw UsageError("--runs must be >= 1");
      return cmd_evaluate(eval_scenario, static_cast<std::size_t>(eval_runs), eval_seed, eval_out,
                          cdf_dir, evaluate_ov.resolve(), out, err);
    }
    if (*report) {
      return cmd_report(report_in, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace hasprof
