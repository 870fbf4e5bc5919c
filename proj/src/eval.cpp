#include "hasprof/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hasprof {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

void check_tiling(std::span<const PhaseLabel> labels, double tolerance, const char* which) {
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (std::abs(labels[i].t_start - labels[i - 1].t_end) > tolerance) {
      throw std::invalid_argument(std::string(which) + " labels do not tile their span");
    }
  }
}

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

std::size_t phase_index(Phase phase) {
  switch (phase) {
    case Phase::filling:
      return 0;
    case Phase::steady_state:
      return 1;
    case Phase::other:
      return 2;
  }
  return 2;
}

double ConfusionMatrix::total() const {
  double sum = 0.0;
  for (const auto& row : seconds) {
    for (const double v : row) sum += v;
  }
  return sum;
}

double ConfusionMatrix::row_total(Phase truth) const {
  const auto& row = seconds[phase_index(truth)];
  return row[0] + row[1] + row[2];
}

std::array<std::array<double, 3>, 3> ConfusionMatrix::percent() const {
  std::array<std::array<double, 3>, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    const double row = seconds[i][0] + seconds[i][1] + seconds[i][2];
    if (row <= 0.0) continue;
    for (std::size_t j = 0; j < 3; ++j) out[i][j] = 100.0 * seconds[i][j] / row;
  }
  return out;
}

std::optional<double> ConfusionMatrix::diagonal_percent(Phase phase) const {
  const double row = row_total(phase);
  if (row <= 0.0) return std::nullopt;
  const auto i = phase_index(phase);
  return 100.0 * seconds[i][i] / row;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) seconds[i][j] += other.seconds[i][j];
  }
  return *this;
}

std::vector<PhaseLabel> to_labels(std::span<const PhaseSegment> segments) {
  std::vector<PhaseLabel> labels;
  labels.reserve(segments.size());
  for (const auto& s : segments) labels.push_back({s.t_start, s.t_end, s.phase});
  return labels;
}

ConfusionMatrix confusion(std::span<const PhaseLabel> predicted, std::span<const PhaseLabel> truth,
                          double tolerance) {
  ConfusionMatrix m;
  if (predicted.empty() && truth.empty()) {
    return m;
  }
  if (predicted.empty() || truth.empty() ||
      std::abs(predicted.front().t_start - truth.front().t_start) > tolerance ||
      std::abs(predicted.back().t_end - truth.back().t_end) > tolerance) {
    throw std::invalid_argument("predicted and true labels cover different spans");
  }
  check_tiling(predicted, tolerance, "predicted");
  check_tiling(truth, tolerance, "true");

  std::size_t i = 0;
  std::size_t j = 0;
  while (i < truth.size() && j < predicted.size()) {
    const auto& t = truth[i];
    const auto& p = predicted[j];
    m.seconds[phase_index(t.phase)][phase_index(p.phase)] +=
        overlap(t.t_start, t.t_end, p.t_start, p.t_end);
    if (t.t_end < p.t_end) {
      ++i;
    } else {
      ++j;
    }
  }
  return m;
}

ConfusionMatrix confusion(std::span<const PhaseSegment> predicted,
                          std::span<const PhaseLabel> truth, double tolerance) {
  const auto labels = to_labels(predicted);
  return confusion(std::span<const PhaseLabel>(labels), truth, tolerance);
}

double nrmse(std::span<const RatePair> pairs) {
  if (pairs.empty()) {
    throw std::invalid_argument("nrmse needs at least one rate pair");
  }
  double sq = 0.0;
  double truth = 0.0;
  for (const auto& p : pairs) {
    if (!(p.r_true > 0.0)) {
      throw std::invalid_argument("true rates must be positive");
    }
    sq += (p.r_hat - p.r_true) * (p.r_hat - p.r_true);
    truth += p.r_true;
  }
  const auto n = static_cast<double>(pairs.size());
  return std::sqrt(sq / n) / (truth / n);
}

std::vector<CdfPoint> empirical_cdf(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<CdfPoint> out;
  out.reserve(values.size());
  const auto n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.push_back({values[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

std::vector<std::optional<RatePair>> match_steady_rates(const ProfileReport& report,
                                                        const LabeledTrace& truth) {
  std::vector<std::optional<RatePair>> out;
  for (std::size_t k = 0; k < truth.labels.size(); ++k) {
    const auto& label = truth.labels[k];
    if (label.phase != Phase::steady_state) continue;
    std::optional<RatePair> best;
    double best_overlap = 0.0;
    for (const auto& est : report.rates.per_segment) {
      const auto& seg = report.segments[est.segment];
      const double ov = overlap(label.t_start, label.t_end, seg.t_start, seg.t_end);
      if (ov > best_overlap) {
        best_overlap = ov;
        best = RatePair{est.rate, truth.label_rates[k]};
      }
    }
    out.push_back(best);
  }
  return out;
}

bool scenario_pattern_ok(std::string_view scenario, const ProfileReport& report,
                         const LabeledTrace& truth) {
  const auto name = upper(scenario);
  const auto& stats = report.stats;
  const auto fillings = stats[phase_index(Phase::filling)].count;
  const auto steadies = stats[phase_index(Phase::steady_state)].count;
  if (name == "MQ" || name == "HQ") {
    return fillings == 1 && steadies == 1 && report.verdict.is_video_stream;
  }
  if (name == "QC") {
    return fillings == 2 && steadies == 2;
  }
  if (name == "AQ") {
    if (truth.throttles.empty()) return false;
    for (const auto& w : truth.throttles) {
      double other = 0.0;
      for (const auto& seg : report.segments) {
        if (seg.phase == Phase::other) other += overlap(w.t_start, w.t_end, seg.t_start, seg.t_end);
      }
      const bool covered = other >= 0.9 * (w.t_end - w.t_start);
      const bool refilled = std::any_of(report.segments.begin(), report.segments.end(),
                                        [&](const PhaseSegment& s) {
                                          return s.phase == Phase::filling && s.t_start >= w.t_start;
                                        });
      if (!covered || !refilled) return false;
    }
    return true;
  }
  if (name == "BULK") {
    return !report.verdict.is_video_stream;
  }
  return false;
}

BatchReport batch_report(std::string_view scenario, std::size_t runs,
                         const ProfilerParams& params, const GeneratorDefaults& generator,
                         std::uint64_t base_seed) {
  if (runs < 1) {
    throw std::invalid_argument("batch needs at least one run");
  }
  params.validate();
  generator.validate();
  BatchReport report;
  report.scenario = upper(scenario);
  report.runs = runs;
  report.base_seed = base_seed;
  for (std::size_t r = 0; r < runs; ++r) {
    const auto seed = base_seed + r;
    const auto labeled = generate_named(scenario, seed, generator);
    const auto prof = profile(labeled.trace, params);

    RunResult run;
    run.seed = seed;
    run.confusion = confusion(std::span<const PhaseSegment>(prof.segments),
                              std::span<const PhaseLabel>(labeled.labels));
    run.filling_segments = prof.stats[phase_index(Phase::filling)].count;
    run.steady_segments = prof.stats[phase_index(Phase::steady_state)].count;
    run.is_video_stream = prof.verdict.is_video_stream;
    run.pattern_ok = scenario_pattern_ok(scenario, prof, labeled);
    run.steady_rates = match_steady_rates(prof, labeled);

    report.confusion += run.confusion;
    report.pattern_ok_runs += run.pattern_ok ? 1 : 0;
    report.video_stream_runs += run.is_video_stream ? 1 : 0;
    for (std::size_t k = 0; k < run.steady_rates.size(); ++k) {
      if (report.steady_pairs.size() <= k) {
        report.steady_pairs.resize(k + 1);
        report.steady_missing.resize(k + 1, 0);
      }
      if (run.steady_rates[k]) {
        report.steady_pairs[k].push_back(*run.steady_rates[k]);
      } else {
        ++report.steady_missing[k];
      }
    }
    report.per_run.push_back(std::move(run));
  }
  for (const auto& pairs : report.steady_pairs) {
    report.nrmse_by_phase.push_back(pairs.empty() ? std::nullopt
                                                  : std::optional<double>(nrmse(pairs)));
  }
  return report;
}

std::vector<ThresholdCheck> check_thresholds(const BatchReport& report,
                                             const AcceptanceThresholds& thresholds) {
  std::vector<ThresholdCheck> checks;
  const auto add = [&](std::string metric, double value, double threshold, bool upper_bound) {
    const bool passed = upper_bound ? value <= threshold : value >= threshold;
    checks.push_back({std::move(metric), value, threshold, upper_bound, passed});
  };
  const auto first_nrmse = [&]() {
    // A scenario without any identified steady phase fails the rate gate.
    return report.nrmse_by_phase.empty() || !report.nrmse_by_phase.front()
               ? std::numeric_limits<double>::infinity()
               : *report.nrmse_by_phase.front();
  };
  const double pattern =
      static_cast<double>(report.pattern_ok_runs) / static_cast<double>(report.runs);
  const auto& name = report.scenario;
  if (name == "MQ" || name == "HQ") {
    for (const auto phase : {Phase::filling, Phase::steady_state, Phase::other}) {
      if (const auto diag = report.confusion.diagonal_percent(phase)) {
        add("diagonal_percent." + std::string(to_string(phase)), *diag,
            thresholds.min_diagonal_percent, false);
      }
    }
    add("nrmse.steady_1", first_nrmse(), thresholds.max_nrmse_mq_hq, true);
  } else if (name == "QC") {
    add("pattern_fraction", pattern, thresholds.min_pattern_fraction, false);
    add("nrmse.steady_1", first_nrmse(), thresholds.max_nrmse_qc_first, true);
  } else if (name == "AQ") {
    add("pattern_fraction", pattern, thresholds.min_pattern_fraction, false);
  } else if (name == "BULK") {
    add("negative_fraction", pattern, thresholds.min_negative_fraction, false);
  }
  return checks;
}

}  // namespace hasprof
