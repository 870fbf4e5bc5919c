#pragma once

#include <iosfwd>
#include <string_view>

#include <json.hpp>

#include "hasprof/eval.hpp"
#include "hasprof/phase_profiler.hpp"

namespace hasprof {

inline constexpr std::string_view kUnitNote =
    "rates in bytes/s (B/s); *_kbps fields in kilobits/s (1 Kbps = 1000 bit/s); sizes in bytes; "
    "times in seconds";

double to_kbps(double bytes_per_second);

// Segments, verdict, rate estimates and buffer samples. Per-bin and per-burst
// series go to the CSV dumps instead.
nlohmann::json to_json(const ProfileReport& report);
nlohmann::json to_json(const ConfusionMatrix& matrix);
nlohmann::json to_json(const BatchReport& report);
nlohmann::json to_json(const std::vector<ThresholdCheck>& checks);

// `bin,rho,r_smooth,r_smooth_max,flag`
void write_rate_csv(std::ostream& out, const RateSeries& series);
// `n,t_start,t_end,size,duration,rate,klass`
void write_burst_csv(std::ostream& out, const std::vector<Burst>& bursts);
// `t,buffered`
void write_buffer_csv(std::ostream& out, const BufferTrajectory& buffer);
// `value,quantile`
void write_cdf_csv(std::ostream& out, const std::vector<CdfPoint>& cdf);

}  // namespace hasprof
