#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hasprof/trace_io.hpp"

namespace hasprof {

struct BurstParams {
  double h_t = 1.5;      // IAT gap that separates bursts, seconds
  double h_d = 5.0;      // duration threshold, seconds
  double h_r = 0.3;      // rate threshold relative to the first burst
  double h_s = 20000.0;  // minimum burst size, bytes
  int h_n = 3;           // consecutive short bursts needed for steady state

  void validate() const;
};

enum class BurstClass : int { steady = -1, other = 0, filling = 1 };

struct Burst {
  std::size_t index = 0;  // 1-based over retained bursts
  double t_start = 0.0;
  double t_end = 0.0;
  std::uint64_t size = 0;
  double rate = 0.0;      // bytes/s
  BurstClass klass = BurstClass::other;
  std::size_t first_packet = 0;  // offset into the flow trace
  std::size_t packet_count = 0;

  double duration() const { return t_end - t_start; }
};

// Groups packets whose IAT is below h_t. A burst's rate uses max(duration,
// min_duration) so single-packet bursts stay finite.
std::vector<Burst> segment(std::span<const PacketRecord> records, const BurstParams& params,
                           double min_duration = 0.1);

std::vector<Burst> filter_small(std::vector<Burst> bursts, const BurstParams& params);

// Duration/rate rule against the first retained burst's rate.
std::vector<Burst> classify(std::vector<Burst> bursts, const BurstParams& params);

struct PhaseCandidate {
  Phase phase = Phase::other;
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t first_burst = 0;  // 1-based burst indices
  std::size_t last_burst = 0;
};

// Adjacent filling bursts merge into one candidate; runs of at least h_n
// steady bursts become a steady-state candidate. Output is time ordered.
std::vector<PhaseCandidate> confirm_steady(std::span<const Burst> bursts,
                                           const BurstParams& params);

}  // namespace hasprof
