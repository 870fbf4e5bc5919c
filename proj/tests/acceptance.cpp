// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "hasprof/eval.hpp"

using namespace hasprof;

namespace {

constexpr std::size_t kRuns = 50;

int failures = 0;

void verdict(bool ok, const std::string& name, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
  if (!ok) ++failures;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

void diagonal_criterion(const ProfilerParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (const char* name : {"MQ", "HQ"}) {
    const auto rep = batch_report(name, kRuns, params);
    for (const auto phase : {Phase::filling, Phase::steady_state}) {
      const auto d = rep.confusion.diagonal_percent(phase);
      ok = ok && d.has_value() && *d >= 98.0;
      detail += std::string(name) + " " + (phase == Phase::filling ? "filling" : "steady") + " " +
                (d ? fmt(*d, 2) : std::string("n/a")) + "% ";
    }
    // `other` only occurs as slivers around boundaries in these scenarios.
    if (const auto d = rep.confusion.diagonal_percent(Phase::other)) {
      ok = ok && *d >= 98.0;
      detail += std::string(name) + " other " + fmt(*d, 2) + "% ";
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok = ok && secs < 30.0;
  verdict(ok, "phase identification MQ/HQ diagonal >= 98% per phase in < 30 s",
          detail + "(" + fmt(secs, 2) + " s)");
}

void pattern_criterion(const char* name, const std::string& title, const ProfilerParams& params) {
  const auto rep = batch_report(name, kRuns, params);
  verdict(rep.pattern_ok_runs >= 48, title,
          std::to_string(rep.pattern_ok_runs) + "/" + std::to_string(kRuns) + " runs");
}

void nrmse_criterion(const ProfilerParams& params) {
  bool ok = true;
  std::string detail;
  for (const auto& [name, limit] : {std::pair{"MQ", 0.02}, {"HQ", 0.02}, {"QC", 0.035}}) {
    const auto rep = batch_report(name, kRuns, params);
    const auto& v = rep.nrmse_by_phase.empty() ? std::optional<double>{} : rep.nrmse_by_phase[0];
    ok = ok && v.has_value() && *v <= limit;
    detail += std::string(name) + " " + (v ? fmt(*v) : std::string("n/a")) + " (<= " + fmt(limit, 3) + ") ";
  }
  verdict(ok, "rate estimation NRMSE MQ/HQ <= 0.02, QC first steady <= 0.035", detail);
}

void bulk_criterion(const ProfilerParams& params) {
  const auto rep = batch_report("BULK", kRuns, params);
  const auto negatives = rep.runs - rep.video_stream_runs;
  verdict(negatives == kRuns, "negative control: bulk never a video stream",
          std::to_string(negatives) + "/" + std::to_string(kRuns) + " runs");
}

void buffer_criterion(const ProfilerParams& params) {
  const double target = GeneratorDefaults{}.buffer_target;
  double lo = INFINITY;
  double hi = -INFINITY;
  std::size_t checked = 0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= kRuns; ++seed) {
    const auto lt = generate_named("MQ", seed);
    const auto rep = profile(lt.trace, params);
    if (!rep.buffer || !rep.verdict.first_steady) {
      ok = false;
      continue;
    }
    const auto& steady = rep.segments[*rep.verdict.first_steady];
    for (const auto& s : rep.buffer->samples) {
      if (s.t < steady.t_start || s.t > steady.t_end) continue;
      lo = std::min(lo, s.buffered / target);
      hi = std::max(hi, s.buffered / target);
      ++checked;
    }
  }
  ok = ok && checked > 0 && lo >= 0.9 && hi <= 1.1;
  verdict(ok, "MQ steady-state buffer within +-10% of 18 MB",
          "level/target in [" + fmt(lo, 3) + ", " + fmt(hi, 3) + "] over " + std::to_string(checked) +
              " samples");
}

void property_criterion(const std::string& unit_tests) {
  if (unit_tests.empty()) {
    verdict(false, "property suites green", "unit test binary not given (--unit-tests PATH)");
    return;
  }
  const std::string cmd = "\"" + unit_tests + "\" --gtest_filter='*Property*' --gtest_brief=1 > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  verdict(status == 0, "property suites green", status == 0 ? "all passed" : "failures, rerun with --gtest_filter=*Property*");
}

}  // namespace

int main(int argc, char** argv) {
  std::string unit_tests;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--unit-tests" && i + 1 < argc) {
      unit_tests = argv[++i];
    } else {
      std::cerr << "usage: hasprof_acceptance [--unit-tests PATH]\n";
      return 2;
    }
  }
  const ProfilerParams params;
  diagonal_criterion(params);
  pattern_criterion("QC", "QC: exactly 2 filling and 2 steady segments in >= 48/50 runs", params);
  pattern_criterion("AQ", "AQ: throttled window other, then a filling segment in >= 48/50 runs", params);
  nrmse_criterion(params);
  bulk_criterion(params);
  property_criterion(unit_tests);
  buffer_criterion(params);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
  return failures == 0 ? 0 : 1;
}
