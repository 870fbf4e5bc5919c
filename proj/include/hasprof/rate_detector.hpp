#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hasprof/trace_io.hpp"

namespace hasprof {

struct RateParams {
  double delta_t = 0.1;  // bin width, seconds
  double a = 0.02;       // attenuation factor of the low-pass filter
  double c = 0.6;        // change-threshold factor

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Time for the smoothed rate to cross c of a full step (and 1-c of a full
// drop): delta_t * ln(1-c) / ln(1-a).
double step_delay(const RateParams& params);

enum class RateDirection { increase, decrease };

struct RateChange {
  std::size_t bin = 0;  // 1-based bin index
  RateDirection direction = RateDirection::increase;
  double time = 0.0;    // start time of the bin
};

// Per-bin streaming rate. `rho[i]` is bin i+1, covering
// [origin + i*delta_t, origin + (i+1)*delta_t). Bins run from the first
// packet up to `horizon_end` (default: the last packet).
std::vector<double> aggregate(std::span<const PacketRecord> records, const RateParams& params,
                              std::optional<double> horizon_end = std::nullopt);

// r_t = (1-a) r_{t-1} + a rho_t. `initial` is r_0; when absent the filter is
// seeded with the first observation so r_1 = rho_1.
std::vector<double> smooth(std::span<const double> rho, const RateParams& params,
                           std::optional<double> initial = std::nullopt);

// Threshold flag on the smoothed rate, f_0 = -1. Rises to +1 when the rate
// exceeds c times its running maximum, falls back to -1 below (1-c) times it.
class RateChangeDetector {
 public:
  explicit RateChangeDetector(double c) : c_(c) {}

  // Returns the flag for the next bin.
  int update(double r_smooth);

  int flag() const { return flag_; }
  double running_max() const { return running_max_; }

 private:
  double c_;
  int flag_ = -1;
  double running_max_ = 0.0;
  bool seen_ = false;
};

struct ChangeDetection {
  std::vector<int> flag;
  std::vector<double> running_max;
  std::vector<RateChange> changes;  // `time` relative to bin 1 start
};

ChangeDetection detect_changes(std::span<const double> r_smooth, const RateParams& params);

struct RateSeries {
  double origin = 0.0;
  double delta_t = 0.1;
  std::vector<double> rho;
  std::vector<double> r_smooth;
  std::vector<double> r_smooth_max;
  std::vector<int> flag;
  std::vector<RateChange> changes;  // absolute times

  std::size_t bins() const { return rho.size(); }
};

// Full rate-method pipeline on one ordered flow. `trailing` extends the bins
// past the last packet so the decay after the final burst is visible.
RateSeries analyze_rate(std::span<const PacketRecord> records, const RateParams& params,
                        double trailing = 0.0);

}  // namespace hasprof
