#include "hasprof/rate_detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hasprof {

double step_delay(const RateParams& params) {
  return params.delta_t * std::log(1.0 - params.c) / std::log(1.0 - params.a);
}

void RateParams::validate() const {
  if (!(delta_t > 0.0) || !std::isfinite(delta_t)) {
    throw std::invalid_argument("rate.delta_t must be > 0");
  }
  if (!(a > 0.0 && a <= 1.0)) {
    throw std::invalid_argument("rate.a must be in (0, 1]");
  }
  // c <= 0.5 would allow both threshold conditions at once.
  if (!(c > 0.5 && c < 1.0)) {
    throw std::invalid_argument("rate.c must be in (0.5, 1)");
  }
}

std::vector<double> aggregate(std::span<const PacketRecord> records, const RateParams& params,
                              std::optional<double> horizon_end) {
  if (records.empty()) {
    return {};
  }
  const double origin = records.front().t_arrival;
  double end = records.back().t_arrival;
  if (horizon_end && *horizon_end > end) {
    end = *horizon_end;
  }
  // Bins are half-open, so a packet exactly on the last edge needs its own bin.
  const auto bins = static_cast<std::size_t>(std::floor((end - origin) / params.delta_t)) + 1;
  std::vector<double> bytes(bins, 0.0);
  for (const auto& rec : records) {
    auto idx = static_cast<std::size_t>(std::floor((rec.t_arrival - origin) / params.delta_t));
    idx = std::min(idx, bins - 1);
    bytes[idx] += static_cast<double>(rec.payload_size);
  }
  for (auto& b : bytes) {
    b /= params.delta_t;
  }
  return bytes;
}

std::vector<double> smooth(std::span<const double> rho, const RateParams& params,
                           std::optional<double> initial) {
  std::vector<double> out;
  out.reserve(rho.size());
  if (rho.empty()) {
    return out;
  }
  double prev = initial.value_or(rho.front());
  for (const double x : rho) {
    prev = (1.0 - params.a) * prev + params.a * x;
    out.push_back(prev);
  }
  return out;
}

int RateChangeDetector::update(double r_smooth) {
  running_max_ = seen_ ? std::max(running_max_, r_smooth) : r_smooth;
  seen_ = true;
  if (flag_ == -1 && r_smooth > c_ * running_max_) {
    flag_ = 1;
  } else if (flag_ == 1 && r_smooth < (1.0 - c_) * running_max_) {
    flag_ = -1;
  }
  return flag_;
}

ChangeDetection detect_changes(std::span<const double> r_smooth, const RateParams& params) {
  ChangeDetection out;
  out.flag.reserve(r_smooth.size());
  out.running_max.reserve(r_smooth.size());
  RateChangeDetector detector(params.c);
  int prev = detector.flag();
  for (std::size_t i = 0; i < r_smooth.size(); ++i) {
    const int f = detector.update(r_smooth[i]);
    out.flag.push_back(f);
    out.running_max.push_back(detector.running_max());
    if (f != prev) {
      out.changes.push_back({i + 1, f == 1 ? RateDirection::increase : RateDirection::decrease,
                             static_cast<double>(i) * params.delta_t});
    }
    prev = f;
  }
  return out;
}

RateSeries analyze_rate(std::span<const PacketRecord> records, const RateParams& params,
                        double trailing) {
  RateSeries series;
  series.delta_t = params.delta_t;
  if (records.empty()) {
    return series;
  }
  series.origin = records.front().t_arrival;
  series.rho = aggregate(records, params, records.back().t_arrival + trailing);
  series.r_smooth = smooth(series.rho, params);
  auto detection = detect_changes(series.r_smooth, params);
  series.flag = std::move(detection.flag);
  series.r_smooth_max = std::move(detection.running_max);
  series.changes = std::move(detection.changes);
  for (auto& change : series.changes) {
    change.time += series.origin;
  }
  return series;
}

}  // namespace hasprof
