#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hasprof/trace_io.hpp"

namespace hasprof {

// Encoding rate selected from `start_time` on. The change takes effect at the
// client's next segment request; with `flush` the buffered media is dropped
// and refilled at the new quality (a second filling phase).
struct EncodeRateChange {
  double start_time = 0.0;  // seconds
  double rate = 0.0;        // bytes/s
  bool flush = true;
};

struct ThrottleWindow {
  double t_start = 0.0;
  double t_end = 0.0;
  double cap = 0.0;  // bytes/s
};

struct ScenarioSpec {
  std::string name = "custom";
  std::vector<EncodeRateChange> encode_rates;
  double segment_duration = 5.0;   // media seconds per segment
  double buffer_target = 18e6;     // bytes
  double fill_throughput = 2e6;    // bytes/s
  std::vector<ThrottleWindow> throttle_windows;
  double video_duration = 596.0;   // seconds
  std::uint64_t packet_size = 1448;
  std::uint64_t rng_seed = 1;
  double jitter = 0.1;             // +- fraction of the nominal packet spacing
  double throttling_factor = 1.0;  // steady streaming rate / encoding rate
  FlowKey flow{"203.0.113.10", "192.168.1.5", 443};

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct LabeledTrace {
  Trace trace;
  std::vector<PhaseLabel> labels;
  std::vector<double> label_rates;  // true encoding rate for steady labels, else 0
  std::vector<ThrottleWindow> throttles;  // windows labeled other, trace time base
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Knobs shared by all presets.
struct GeneratorDefaults {
  double segment_duration = 5.0;
  double buffer_target = 18e6;
  double fill_throughput = 2e6;
  double video_duration = 596.0;
  std::uint64_t packet_size = 1448;
  double jitter = 0.1;
  double throttling_factor = 1.0;
  double bulk_duration = 60.0;
  double bulk_rate = 1e6;

  void validate() const;
};

inline constexpr double kRate480p = 646e3 / 8.0;   // 646 Kbps
inline constexpr double kRate720p = 1346e3 / 8.0;  // 1346 Kbps
inline constexpr double kThrottleCap = 320e3 / 8.0;
inline constexpr double kThrottleSeconds = 90.0;

// MQ, HQ, QC, AQ (case-insensitive). Random change times are drawn from
// `seed`. Throws std::invalid_argument listing the presets for other names.
ScenarioSpec scenario_preset(std::string_view name, std::uint64_t seed,
                             const GeneratorDefaults& defaults = {});
std::vector<std::string> preset_names();
bool is_bulk_preset(std::string_view name);

LabeledTrace generate(const ScenarioSpec& spec);

// Continuous non-bursty flow labeled `other` throughout.
LabeledTrace generate_bulk(double duration, double rate, std::uint64_t packet_size,
                           std::uint64_t seed);

// MQ/HQ/QC/AQ via `generate`, BULK via `generate_bulk`.
LabeledTrace generate_named(std::string_view name, std::uint64_t seed,
                            const GeneratorDefaults& defaults = {});

}  // namespace hasprof
