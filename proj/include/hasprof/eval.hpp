#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hasprof/phase_profiler.hpp"
#include "hasprof/synth_gen.hpp"
#include "hasprof/trace_io.hpp"

namespace hasprof {

std::size_t phase_index(Phase phase);

// Rows are the true phase, columns the identified phase; entries in seconds.
struct ConfusionMatrix {
  std::array<std::array<double, 3>, 3> seconds{};

  double total() const;
  double row_total(Phase truth) const;
  // Row-normalized percentages; rows without true time are all zero.
  std::array<std::array<double, 3>, 3> percent() const;
  // Absent when the phase never occurs in the ground truth.
  std::optional<double> diagonal_percent(Phase phase) const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

std::vector<PhaseLabel> to_labels(std::span<const PhaseSegment> segments);

// Interval intersection of two tilings of the same span. Throws
// std::invalid_argument when the spans differ by more than `tolerance`.
ConfusionMatrix confusion(std::span<const PhaseLabel> predicted, std::span<const PhaseLabel> truth,
                          double tolerance = 1e-6);
ConfusionMatrix confusion(std::span<const PhaseSegment> predicted,
                          std::span<const PhaseLabel> truth, double tolerance = 1e-6);

struct RatePair {
  double r_hat = 0.0;
  double r_true = 0.0;
};

// sqrt(mean((r_hat - r_true)^2)) / mean(r_true). Throws on empty input or a
// non-positive true rate.
double nrmse(std::span<const RatePair> pairs);

struct CdfPoint {
  double value = 0.0;
  double quantile = 0.0;
};

std::vector<CdfPoint> empirical_cdf(std::vector<double> values);

// Pairs the k-th true steady-state phase with the identified steady segment
// overlapping it most. Entry k is absent when nothing overlaps.
std::vector<std::optional<RatePair>> match_steady_rates(const ProfileReport& report,
                                                        const LabeledTrace& truth);

struct RunResult {
  std::uint64_t seed = 0;
  ConfusionMatrix confusion;
  std::size_t filling_segments = 0;
  std::size_t steady_segments = 0;
  bool is_video_stream = false;
  bool pattern_ok = false;  // scenario-specific shape check, see below
  std::vector<std::optional<RatePair>> steady_rates;
};

// Shape expected for each preset: MQ/HQ one filling then one steady segment;
// QC exactly two of each; AQ the throttled window >= 90% other with a filling
// segment after it; BULK no video stream.
bool scenario_pattern_ok(std::string_view scenario, const ProfileReport& report,
                         const LabeledTrace& truth);

struct BatchReport {
  std::string scenario;
  std::size_t runs = 0;
  std::uint64_t base_seed = 1;
  ConfusionMatrix confusion;
  std::vector<RunResult> per_run;
  std::size_t pattern_ok_runs = 0;
  std::size_t video_stream_runs = 0;
  // Index k holds the k-th steady-state phase of every run.
  std::vector<std::vector<RatePair>> steady_pairs;
  std::vector<std::size_t> steady_missing;
  std::vector<std::optional<double>> nrmse_by_phase;
};

BatchReport batch_report(std::string_view scenario, std::size_t runs,
                         const ProfilerParams& params, const GeneratorDefaults& generator = {},
                         std::uint64_t base_seed = 1);

struct AcceptanceThresholds {
  double min_diagonal_percent = 98.0;
  double max_nrmse_mq_hq = 0.02;
  double max_nrmse_qc_first = 0.035;
  double min_pattern_fraction = 0.96;
  double min_negative_fraction = 1.0;
};

struct ThresholdCheck {
  std::string metric;
  double value = 0.0;
  double threshold = 0.0;
  bool upper_bound = false;  // true: value must not exceed threshold
  bool passed = false;
};

// The gate applied per scenario: MQ/HQ diagonal and NRMSE; QC pattern and
// first-phase NRMSE; AQ pattern; BULK negative control.
std::vector<ThresholdCheck> check_thresholds(const BatchReport& report,
                                             const AcceptanceThresholds& thresholds);

}  // namespace hasprof
