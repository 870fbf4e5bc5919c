#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hasprof/burst_detector.hpp"
#include "hasprof/rate_detector.hpp"
#include "hasprof/trace_io.hpp"

namespace hasprof {

struct FusionParams {
  double match_tolerance = 5.0;  // seconds between the two methods' change times
  double silence_timeout = 30.0; // gap that ends a session
  double startup_delay = 0.0;    // added to the default playout start

  void validate() const;
};

struct ProfilerParams {
  RateParams rate;
  BurstParams burst;
  FusionParams fusion;

  void validate() const {
    rate.validate();
    burst.validate();
    fusion.validate();
  }
};

struct PhaseSegment {
  Phase phase = Phase::other;
  double t_start = 0.0;
  double t_end = 0.0;
  std::uint64_t volume = 0;  // bytes
  double mean_rate = 0.0;    // bytes/s

  double duration() const { return t_end - t_start; }
  bool operator==(const PhaseSegment&) const = default;
};

struct StreamVerdict {
  bool is_video_stream = false;
  std::optional<std::size_t> first_filling;  // index into the segment list
  std::optional<std::size_t> first_steady;
};

struct SegmentRate {
  std::size_t segment = 0;  // index into the segment list
  double rate = 0.0;        // bytes/s
};

struct RateEstimate {
  std::vector<SegmentRate> per_segment;
  std::optional<double> session;  // absent without a steady-state segment
};

struct BufferSample {
  double t = 0.0;
  double buffered = 0.0;  // bytes
};

struct BufferTrajectory {
  std::vector<BufferSample> samples;
  double playout_start = 0.0;
  double encode_rate_used = 0.0;
};

struct PhaseStats {
  Phase phase = Phase::other;
  std::size_t count = 0;
  std::uint64_t volume = 0;
  double duration = 0.0;
  double mean_rate = 0.0;
};

// Cross-checks rate events against burst candidates. A candidate whose start
// lies within the match tolerance of a rate event of the same kind (increase
// for filling, decrease for steady state) becomes a segment with the burst
// boundaries; everything else in [first packet, last packet] is `other`.
// Rate events lag the traffic, so an event may also trail the candidate start
// by up to `filter_delay` on top of the tolerance.
std::vector<PhaseSegment> fuse(std::span<const RateChange> rate_events,
                               std::span<const PhaseCandidate> candidates,
                               std::span<const PacketRecord> records, const FusionParams& params,
                               double filter_delay = 0.0);

StreamVerdict detect_stream(std::span<const PhaseSegment> segments);

// Per steady segment: bytes with t_start <= t <= t_end over the duration,
// except that a packet on a boundary shared with the next segment is left to
// it unless that segment is `other`.
// The session value is the duration-weighted mean.
RateEstimate estimate_rate(std::span<const PhaseSegment> segments,
                           std::span<const PacketRecord> records);

// Cumulative arrivals minus a constant-rate playout starting at
// `playout_start`, clamped at zero. Samples every `step` seconds from the
// first packet until the modeled buffer has drained.
BufferTrajectory estimate_buffer(std::span<const PacketRecord> records, double encode_rate,
                                 double playout_start, double step = 0.1);

std::vector<PhaseStats> phase_stats(std::span<const PhaseSegment> segments);

struct ProfileReport {
  FlowKey flow;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::size_t packets = 0;
  std::uint64_t total_bytes = 0;
  RateSeries rate;
  std::vector<Burst> bursts;
  std::vector<PhaseCandidate> candidates;
  std::vector<PhaseSegment> segments;
  StreamVerdict verdict;
  RateEstimate rates;
  std::optional<BufferTrajectory> buffer;
  std::vector<PhaseStats> stats;
};

// Runs both detectors, fuses them and derives the estimates for one ordered
// single-flow session. Degenerate input gives empty fields, never an error.
ProfileReport profile(std::span<const PacketRecord> records, const ProfilerParams& params);
ProfileReport profile(const Trace& flow_trace, const ProfilerParams& params);

// Packet-at-a-time front end. Queries are const and never change state.
class OnlineProfiler {
 public:
  explicit OnlineProfiler(ProfilerParams params);

  // Throws std::invalid_argument for out-of-order or foreign-flow packets.
  void push(const PacketRecord& record);

  std::size_t packets() const { return records_.size(); }
  std::vector<PhaseSegment> current_segments() const;
  ProfileReport snapshot() const;

 private:
  ProfilerParams params_;
  std::vector<PacketRecord> records_;
};

}  // namespace hasprof
