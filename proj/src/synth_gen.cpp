#include "hasprof/synth_gen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace hasprof {

namespace {

constexpr double kEps = 1e-9;
constexpr double kQualityChangeMin = 120.0;
constexpr double kQualityChangeMax = 240.0;
constexpr double kThrottledQualityFraction = 0.5;

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : engine_(seed) {}
  // [0, 1) with 53 random bits; identical on every platform.
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

// Rewrites [a, b) of a tiling label list to `phase`.
std::vector<PhaseLabel> overwrite(const std::vector<PhaseLabel>& labels, double a, double b,
                                  Phase phase) {
  std::vector<PhaseLabel> out;
  for (const auto& l : labels) {
    if (l.t_end <= a || l.t_start >= b) {
      out.push_back(l);
      continue;
    }
    if (l.t_start < a) out.push_back({l.t_start, a, l.phase});
    out.push_back({std::max(l.t_start, a), std::min(l.t_end, b), phase});
    if (l.t_end > b) out.push_back({b, l.t_end, l.phase});
  }
  return out;
}

std::vector<PhaseLabel> tidy(std::vector<PhaseLabel> labels) {
  std::vector<PhaseLabel> out;
  for (const auto& l : labels) {
    if (!(l.t_end > l.t_start)) continue;
    if (!out.empty() && out.back().phase == l.phase) {
      out.back().t_end = l.t_end;
    } else {
      out.push_back(l);
    }
  }
  return out;
}

struct Request {
  double t;
  double rate;
};

class ClientSimulation {
 public:
  explicit ClientSimulation(const ScenarioSpec& spec) : spec_(spec), rng_(spec.rng_seed) {}

  LabeledTrace run();

 private:
  double throughput(double t) const {
    double thr = spec_.fill_throughput;
    for (const auto& w : spec_.throttle_windows) {
      if (t >= w.t_start && t < w.t_end) thr = std::min(thr, w.cap);
    }
    return thr;
  }

  void advance(double dt) {
    t_ += dt;
    if (playing_) play_ = std::min(play_ + dt, downloaded_);
  }

  bool apply_rate_changes() {
    bool flushed = false;
    const auto& sched = spec_.encode_rates;
    while (next_change_ < sched.size() && sched[next_change_].start_time <= t_ + kEps) {
      const auto& change = sched[next_change_];
      rate_ = change.rate;
      if (next_change_ == 0 || change.flush) {
        target_media_ = spec_.buffer_target / rate_;
      }
      if (next_change_ > 0 && change.flush) {
        // Keep the segment that is playing, drop everything after it.
        const auto playing_segment =
            static_cast<std::size_t>(std::floor(play_ / spec_.segment_duration)) + 1;
        next_segment_ = std::min(next_segment_, playing_segment);
        downloaded_ = std::max(play_, static_cast<double>(next_segment_) * spec_.segment_duration);
        downloaded_ = std::min(downloaded_, spec_.video_duration);
        flushed = true;
      }
      ++next_change_;
    }
    return flushed;
  }

  void mark(Phase phase) {
    if (events_.empty() || events_.back().second != phase) events_.emplace_back(t_, phase);
  }

  void download(double media_len) {
    auto remaining = static_cast<std::uint64_t>(std::llround(rate_ * media_len));
    remaining = std::max<std::uint64_t>(remaining, 1);
    while (remaining > 0) {
      const auto size = std::min(remaining, spec_.packet_size);
      const double nominal = static_cast<double>(size) / throughput(t_);
      advance(nominal * (1.0 + spec_.jitter * (2.0 * rng_.next() - 1.0)));
      packets_.push_back({t_, size, spec_.flow});
      remaining -= size;
    }
    downloaded_ += media_len;
    ++next_segment_;
    playing_ = true;
  }

  const ScenarioSpec& spec_;
  Uniform rng_;
  double t_ = 0.0;
  double play_ = 0.0;
  double downloaded_ = 0.0;
  bool playing_ = false;
  double rate_ = 0.0;
  double target_media_ = 0.0;
  std::size_t next_change_ = 0;
  std::size_t next_segment_ = 0;
  std::vector<PacketRecord> packets_;
  std::vector<std::pair<double, Phase>> events_;
  std::vector<Request> requests_;
};

LabeledTrace ClientSimulation::run() {
  const double seg = spec_.segment_duration;
  const auto segments = static_cast<std::size_t>(std::ceil(spec_.video_duration / seg - kEps));
  const double time_limit = 1000.0 * spec_.video_duration + 1e6;

  bool waited = false;
  while (next_segment_ < segments) {
    if (t_ > time_limit) {
      throw GenerationError("session does not finish; check throttle windows and rates");
    }
    const bool flushed = apply_rate_changes();
    const double len =
        std::min(seg, spec_.video_duration - static_cast<double>(next_segment_) * seg);
    if (!(waited && !flushed)) {
      const double excess = (downloaded_ - play_) + seg - target_media_;
      if (excess > kEps && playing_) {
        mark(Phase::steady_state);
        double wait = excess / spec_.throttling_factor;
        // Rate changes are acted on at the next regular request.
        advance(wait);
        waited = true;
        continue;
      }
    }
    mark(waited && !flushed ? Phase::steady_state : Phase::filling);
    waited = false;
    requests_.push_back({t_, rate_});
    download(len);
  }

  LabeledTrace out;
  if (packets_.empty()) {
    return out;
  }
  const double first = packets_.front().t_arrival;
  const double last = packets_.back().t_arrival;

  std::vector<PhaseLabel> labels;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const double end = i + 1 < events_.size() ? events_[i + 1].first : last;
    labels.push_back({events_[i].first, std::min(end, last), events_[i].second});
  }

  // Windows capped below the rate being streamed are labeled other until the
  // client's first request after the window.
  for (const auto& w : spec_.throttle_windows) {
    double before = spec_.encode_rates.front().rate;
    for (const auto& c : spec_.encode_rates) {
      if (c.start_time < w.t_start) before = c.rate;
    }
    if (!(w.cap < before) || w.t_start >= last) continue;
    double release = last;
    for (const auto& r : requests_) {
      if (r.t >= w.t_end) {
        release = r.t;
        break;
      }
    }
    labels = overwrite(labels, w.t_start, release, Phase::other);
    out.throttles.push_back({w.t_start - first, std::min(w.t_end, last) - first, w.cap});
  }

  for (auto& l : labels) {
    l.t_start = std::max(l.t_start, first) - first;
    l.t_end = std::min(l.t_end, last) - first;
  }
  out.labels = tidy(std::move(labels));

  for (const auto& l : out.labels) {
    double rate = 0.0;
    if (l.phase == Phase::steady_state) {
      for (const auto& r : requests_) {
        if (r.t - first >= l.t_start - kEps) {
          rate = r.rate;
          break;
        }
      }
    }
    out.label_rates.push_back(rate);
  }

  for (auto& p : packets_) {
    p.t_arrival -= first;
  }
  out.trace.records = std::move(packets_);
  out.trace.meta["scenario"] = spec_.name;
  out.trace.meta["seed"] = std::to_string(spec_.rng_seed);
  return out;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (encode_rates.empty()) throw std::invalid_argument("encode_rates must not be empty");
  if (encode_rates.front().start_time != 0.0) {
    throw std::invalid_argument("encode_rates[0].start_time must be 0");
  }
  for (std::size_t i = 0; i < encode_rates.size(); ++i) {
    const auto& c = encode_rates[i];
    const auto field = "encode_rates[" + std::to_string(i) + "]";
    if (!(c.rate > 0.0) || !std::isfinite(c.rate)) {
      throw std::invalid_argument(field + ".rate must be > 0");
    }
    if (i > 0 && !(c.start_time > encode_rates[i - 1].start_time)) {
      throw std::invalid_argument(field + ".start_time must increase");
    }
  }
  if (!(segment_duration > 0.0)) throw std::invalid_argument("segment_duration must be > 0");
  if (!(buffer_target > 0.0)) throw std::invalid_argument("buffer_target must be > 0");
  if (!(fill_throughput > 0.0)) throw std::invalid_argument("fill_throughput must be > 0");
  if (!(video_duration > 0.0)) throw std::invalid_argument("video_duration must be > 0");
  if (packet_size < 1) throw std::invalid_argument("packet_size must be >= 1");
  if (!(jitter >= 0.0 && jitter < 1.0)) throw std::invalid_argument("jitter must be in [0, 1)");
  if (!(throttling_factor >= 1.0)) throw std::invalid_argument("throttling_factor must be >= 1");
  for (std::size_t i = 0; i < throttle_windows.size(); ++i) {
    const auto& w = throttle_windows[i];
    const auto field = "throttle_windows[" + std::to_string(i) + "]";
    if (!(w.t_start >= 0.0 && w.t_end > w.t_start && w.t_end <= video_duration)) {
      throw std::invalid_argument(field + " must satisfy 0 <= t_start < t_end <= video_duration");
    }
    if (!(w.cap > 0.0)) throw std::invalid_argument(field + ".cap must be > 0");
  }
}

void GeneratorDefaults::validate() const {
  if (!(segment_duration > 0.0)) throw std::invalid_argument("generator.segment_duration must be > 0");
  if (!(buffer_target > 0.0)) throw std::invalid_argument("generator.buffer_target must be > 0");
  if (!(fill_throughput > 0.0)) throw std::invalid_argument("generator.fill_throughput must be > 0");
  if (!(video_duration > 0.0)) throw std::invalid_argument("generator.video_duration must be > 0");
  if (packet_size < 1) throw std::invalid_argument("generator.packet_size must be >= 1");
  if (!(jitter >= 0.0 && jitter < 1.0)) throw std::invalid_argument("generator.jitter must be in [0, 1)");
  if (!(throttling_factor >= 1.0)) {
    throw std::invalid_argument("generator.throttling_factor must be >= 1");
  }
  if (!(bulk_duration >= 0.0)) throw std::invalid_argument("generator.bulk_duration must be >= 0");
  if (!(bulk_rate > 0.0)) throw std::invalid_argument("generator.bulk_rate must be > 0");
}

std::vector<std::string> preset_names() { return {"MQ", "HQ", "QC", "AQ", "BULK"}; }

bool is_bulk_preset(std::string_view name) { return upper(name) == "BULK"; }

ScenarioSpec scenario_preset(std::string_view name, std::uint64_t seed,
                             const GeneratorDefaults& defaults) {
  ScenarioSpec spec;
  spec.name = upper(name);
  spec.segment_duration = defaults.segment_duration;
  spec.buffer_target = defaults.buffer_target;
  spec.fill_throughput = defaults.fill_throughput;
  spec.video_duration = defaults.video_duration;
  spec.packet_size = defaults.packet_size;
  spec.jitter = defaults.jitter;
  spec.throttling_factor = defaults.throttling_factor;
  spec.rng_seed = seed;

  // Change times come from their own stream so packet jitter stays independent.
  Uniform draw(seed ^ 0x9e3779b97f4a7c15ULL);
  const double change_at =
      kQualityChangeMin + (kQualityChangeMax - kQualityChangeMin) * draw.next();

  if (spec.name == "MQ") {
    spec.encode_rates = {{0.0, kRate480p, true}};
  } else if (spec.name == "HQ") {
    spec.encode_rates = {{0.0, kRate720p, true}};
  } else if (spec.name == "QC") {
    spec.encode_rates = {{0.0, kRate720p, true}, {change_at, kRate480p, true}};
  } else if (spec.name == "AQ") {
    // The client steps down below the cap while throttled and steps back up,
    // replacing its buffer, once the cap is lifted.
    const double lifted = change_at + kThrottleSeconds;
    spec.encode_rates = {{0.0, kRate480p, true},
                         {change_at, kThrottledQualityFraction * kThrottleCap, false},
                         {lifted, kRate480p, true}};
    spec.throttle_windows = {{change_at, lifted, kThrottleCap}};
  } else {
    std::string list;
    for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown scenario '" + std::string(name) + "'; presets: " + list);
  }
  return spec;
}

LabeledTrace generate(const ScenarioSpec& spec) {
  spec.validate();
  double max_rate = 0.0;
  for (const auto& c : spec.encode_rates) {
    max_rate = std::max(max_rate, c.rate);
    if (spec.buffer_target < c.rate * spec.segment_duration) {
      throw GenerationError("buffer_target cannot hold one segment at rate " +
                            format_double(c.rate) + " B/s");
    }
  }
  if (!(spec.fill_throughput > max_rate)) {
    throw GenerationError("fill_throughput must exceed every encode rate, otherwise the buffer never fills");
  }
  for (const auto& w : spec.throttle_windows) {
    double rate = spec.encode_rates.front().rate;
    for (const auto& c : spec.encode_rates) {
      if (c.start_time <= w.t_end) rate = c.rate;
    }
    if (w.t_end >= spec.video_duration && w.cap < rate) {
      throw GenerationError("throttle cap " + format_double(w.cap) +
                            " B/s stays below the encode rate until the end of the video");
    }
  }
  ClientSimulation sim(spec);
  return sim.run();
}

LabeledTrace generate_bulk(double duration, double rate, std::uint64_t packet_size,
                           std::uint64_t seed) {
  if (!(rate > 0.0) || packet_size < 1 || duration < 0.0) {
    throw std::invalid_argument("bulk generation needs positive rate and packet size");
  }
  LabeledTrace out;
  out.trace.meta["scenario"] = "BULK";
  out.trace.meta["seed"] = std::to_string(seed);
  if (!(duration > 0.0)) {
    return out;
  }
  Uniform rng(seed);
  const FlowKey flow{"198.51.100.20", "192.168.1.5", 443};
  const double spacing = static_cast<double>(packet_size) / rate;
  double t = 0.0;
  while (t <= duration) {
    out.trace.records.push_back({t, packet_size, flow});
    t += spacing * (1.0 + 0.1 * (2.0 * rng.next() - 1.0));
  }
  const double last = out.trace.records.back().t_arrival;
  if (last > 0.0) {
    out.labels.push_back({0.0, last, Phase::other});
    out.label_rates.push_back(0.0);
  }
  return out;
}

LabeledTrace generate_named(std::string_view name, std::uint64_t seed,
                            const GeneratorDefaults& defaults) {
  if (is_bulk_preset(name)) {
    return generate_bulk(defaults.bulk_duration, defaults.bulk_rate, defaults.packet_size, seed);
  }
  return generate(scenario_preset(name, seed, defaults));
}

}  // namespace hasprof
