#include "hasprof/phase_profiler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hasprof {

namespace {

constexpr std::size_t kMaxBufferSamples = 2'000'000;

bool has_matching_event(std::span<const RateChange> events, RateDirection direction, double t,
                        double tolerance, double filter_delay) {
  return std::any_of(events.begin(), events.end(), [&](const RateChange& e) {
    const double d = e.time - t;
    return e.direction == direction && d >= -tolerance && d <= tolerance + filter_delay;
  });
}

// Packets [lo, hi) credited to segments[i]. A packet on a boundary shared by
// two segments goes to the one that is not `other`, and to the later one when
// both are phases.
std::pair<std::size_t, std::size_t> packet_range(std::span<const PhaseSegment> segments,
                                                 std::size_t i,
                                                 std::span<const PacketRecord> records) {
  const auto& seg = segments[i];
  const auto before = [&](double t) {
    return static_cast<std::size_t>(
        std::lower_bound(records.begin(), records.end(), t,
                         [](const PacketRecord& r, double v) { return r.t_arrival < v; }) -
        records.begin());
  };
  const auto through = [&](double t) {
    return static_cast<std::size_t>(
        std::upper_bound(records.begin(), records.end(), t,
                         [](double v, const PacketRecord& r) { return v < r.t_arrival; }) -
        records.begin());
  };
  bool own_start = true;
  if (i > 0 && segments[i - 1].t_end == seg.t_start) {
    own_start = seg.phase != Phase::other || segments[i - 1].phase == Phase::other;
  }
  bool own_end = true;
  if (i + 1 < segments.size() && segments[i + 1].t_start == seg.t_end) {
    own_end = seg.phase != Phase::other && segments[i + 1].phase == Phase::other;
  }
  const std::size_t lo = own_start ? before(seg.t_start) : through(seg.t_start);
  const std::size_t hi = own_end ? through(seg.t_end) : before(seg.t_end);
  return {lo, std::max(lo, hi)};
}

}  // namespace

void FusionParams::validate() const {
  if (!(match_tolerance > 0.0)) throw std::invalid_argument("fusion.match_tolerance must be > 0");
  if (!(silence_timeout > 0.0)) throw std::invalid_argument("fusion.silence_timeout must be > 0");
  if (!(startup_delay >= 0.0)) throw std::invalid_argument("fusion.startup_delay must be >= 0");
}

std::vector<PhaseSegment> fuse(std::span<const RateChange> rate_events,
                               std::span<const PhaseCandidate> candidates,
                               std::span<const PacketRecord> records, const FusionParams& params,
                               double filter_delay) {
  std::vector<PhaseSegment> segments;
  if (records.empty()) {
    return segments;
  }
  const double begin = records.front().t_arrival;
  const double end = records.back().t_arrival;
  if (!(end > begin)) {
    return segments;
  }

  std::vector<PhaseSegment> agreed;
  for (const auto& cand : candidates) {
    if (cand.phase == Phase::other || !(cand.t_end > cand.t_start)) {
      continue;
    }
    const auto direction =
        cand.phase == Phase::filling ? RateDirection::increase : RateDirection::decrease;
    if (has_matching_event(rate_events, direction, cand.t_start, params.match_tolerance,
                           filter_delay)) {
      agreed.push_back({cand.phase, cand.t_start, cand.t_end, 0, 0.0});
    }
  }

  double cursor = begin;
  for (const auto& seg : agreed) {
    if (seg.t_start > cursor) {
      segments.push_back({Phase::other, cursor, seg.t_start, 0, 0.0});
    }
    segments.push_back(seg);
    cursor = seg.t_end;
  }
  if (end > cursor) {
    segments.push_back({Phase::other, cursor, end, 0, 0.0});
  }

  for (std::size_t i = 0; i < segments.size(); ++i) {
    auto& seg = segments[i];
    const auto [lo, hi] = packet_range(segments, i, records);
    for (std::size_t k = lo; k < hi; ++k) seg.volume += records[k].payload_size;
    seg.mean_rate = static_cast<double>(seg.volume) / seg.duration();
  }
  return segments;
}

StreamVerdict detect_stream(std::span<const PhaseSegment> segments) {
  StreamVerdict verdict;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].phase == Phase::filling && !verdict.first_filling) {
      verdict.first_filling = i;
    }
    if (segments[i].phase == Phase::steady_state && verdict.first_filling && !verdict.first_steady) {
      verdict.first_steady = i;
      verdict.is_video_stream = true;
    }
  }
  return verdict;
}

RateEstimate estimate_rate(std::span<const PhaseSegment> segments,
                           std::span<const PacketRecord> records) {
  RateEstimate est;
  double weighted = 0.0;
  double total_duration = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    if (seg.phase != Phase::steady_state || !(seg.duration() > 0.0)) {
      continue;
    }
    const auto [lo, hi] = packet_range(segments, i, records);
    std::uint64_t bytes = 0;
    for (std::size_t k = lo; k < hi; ++k) {
      bytes += records[k].payload_size;
    }
    const double rate = static_cast<double>(bytes) / seg.duration();
    est.per_segment.push_back({i, rate});
    weighted += rate * seg.duration();
    total_duration += seg.duration();
  }
  if (total_duration > 0.0) {
    est.session = weighted / total_duration;
  }
  return est;
}

BufferTrajectory estimate_buffer(std::span<const PacketRecord> records, double encode_rate,
                                 double playout_start, double step) {
  if (!(encode_rate > 0.0)) {
    throw std::invalid_argument("encode_rate must be > 0");
  }
  if (!(step > 0.0)) {
    throw std::invalid_argument("buffer sampling step must be > 0");
  }
  BufferTrajectory traj;
  traj.playout_start = playout_start;
  traj.encode_rate_used = encode_rate;
  if (records.empty()) {
    return traj;
  }
  const double begin = records.front().t_arrival;
  double total = 0.0;
  for (const auto& r : records) {
    total += static_cast<double>(r.payload_size);
  }
  const double drained = std::max(playout_start, begin) + total / encode_rate;
  const double end = std::max(records.back().t_arrival, drained);
  const auto count = std::min<std::size_t>(
      static_cast<std::size_t>(std::ceil((end - begin) / step)) + 1, kMaxBufferSamples);

  double cumulative = 0.0;
  std::size_t k = 0;
  traj.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = begin + static_cast<double>(i) * step;
    while (k < records.size() && records[k].t_arrival <= t) {
      cumulative += static_cast<double>(records[k].payload_size);
      ++k;
    }
    const double played = encode_rate * std::max(0.0, t - playout_start);
    traj.samples.push_back({t, std::max(0.0, cumulative - played)});
  }
  return traj;
}

std::vector<PhaseStats> phase_stats(std::span<const PhaseSegment> segments) {
  std::vector<PhaseStats> stats;
  for (const auto phase : {Phase::filling, Phase::steady_state, Phase::other}) {
    PhaseStats s;
    s.phase = phase;
    for (const auto& seg : segments) {
      if (seg.phase == phase) {
        ++s.count;
        s.volume += seg.volume;
        s.duration += seg.duration();
      }
    }
    s.mean_rate = s.duration > 0.0 ? static_cast<double>(s.volume) / s.duration : 0.0;
    stats.push_back(s);
  }
  return stats;
}

ProfileReport profile(std::span<const PacketRecord> records, const ProfilerParams& params) {
  ProfileReport report;
  report.stats = phase_stats({});
  if (records.empty()) {
    return report;
  }
  report.flow = records.front().flow;
  report.t_begin = records.front().t_arrival;
  report.t_end = records.back().t_arrival;
  report.packets = records.size();
  for (const auto& r : records) {
    report.total_bytes += r.payload_size;
  }

  report.rate = analyze_rate(records, params.rate, params.burst.h_t);
  report.bursts = classify(
      filter_small(segment(records, params.burst, params.rate.delta_t), params.burst), params.burst);
  report.candidates = confirm_steady(report.bursts, params.burst);
  report.segments = fuse(report.rate.changes, report.candidates, records, params.fusion,
                         step_delay(params.rate));
  report.verdict = detect_stream(report.segments);
  report.rates = estimate_rate(report.segments, records);
  if (report.rates.session) {
    // Playout starts at the end of the first rate bin (it always holds data).
    const double playout = report.t_begin + params.rate.delta_t + params.fusion.startup_delay;
    report.buffer = estimate_buffer(records, *report.rates.session, playout, params.rate.delta_t);
  }
  report.stats = phase_stats(report.segments);
  return report;
}

ProfileReport profile(const Trace& flow_trace, const ProfilerParams& params) {
  return profile(std::span<const PacketRecord>(flow_trace.records), params);
}

OnlineProfiler::OnlineProfiler(ProfilerParams params) : params_(std::move(params)) {
  params_.validate();
}

void OnlineProfiler::push(const PacketRecord& record) {
  if (!records_.empty()) {
    if (record.t_arrival < records_.back().t_arrival) {
      throw std::invalid_argument("packet arrives before its predecessor");
    }
    if (!(record.flow == records_.front().flow)) {
      throw std::invalid_argument("packet belongs to a different flow");
    }
  }
  records_.push_back(record);
}

std::vector<PhaseSegment> OnlineProfiler::current_segments() const {
  return snapshot().segments;
}

ProfileReport OnlineProfiler::snapshot() const {
  return profile(std::span<const PacketRecord>(records_), params_);
}

}  // namespace hasprof
