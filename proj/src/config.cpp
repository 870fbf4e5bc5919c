#include "hasprof/config.hpp"

#include <fstream>
#include <set>

namespace hasprof {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& obj, std::string section) : obj_(obj), section_(std::move(section)) {
    if (!obj_.is_object()) {
      throw ConfigError("config field '" + section_ + "' must be an object");
    }
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    const auto field = name(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError("config field '" + field + "' must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError("config field '" + field + "' must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (it->template get<std::int64_t>() < 0) {
          throw ConfigError("config field '" + field + "' must be non-negative");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError("config field '" + field + "' must be a number");
    } else {
      if (!it->is_string()) throw ConfigError("config field '" + field + "' must be a string");
    }
    out = it->template get<T>();
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown config field '" + name(key) + "'");
    }
  }

  std::string name(const std::string& key) const {
    return section_.empty() ? key : section_ + "." + key;
  }

 private:
  const json& obj_;
  std::string section_;
  std::set<std::string> seen_;
};

template <typename Fn>
void validated(Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

Config config_from_json(const json& j) {
  Config cfg;
  Reader root(j, "");
  if (const auto* s = root.child("rate")) {
    Reader r(*s, "rate");
    r.read("delta_t", cfg.profiler.rate.delta_t);
    r.read("a", cfg.profiler.rate.a);
    r.read("c", cfg.profiler.rate.c);
    r.reject_unknown();
  }
  if (const auto* s = root.child("burst")) {
    Reader r(*s, "burst");
    r.read("h_t", cfg.profiler.burst.h_t);
    r.read("h_d", cfg.profiler.burst.h_d);
    r.read("h_r", cfg.profiler.burst.h_r);
    r.read("h_s", cfg.profiler.burst.h_s);
    r.read("h_n", cfg.profiler.burst.h_n);
    r.reject_unknown();
  }
  if (const auto* s = root.child("fusion")) {
    Reader r(*s, "fusion");
    r.read("match_tolerance", cfg.profiler.fusion.match_tolerance);
    r.read("silence_timeout", cfg.profiler.fusion.silence_timeout);
    r.read("startup_delay", cfg.profiler.fusion.startup_delay);
    r.reject_unknown();
  }
  if (const auto* s = root.child("generator")) {
    Reader r(*s, "generator");
    auto& g = cfg.generator;
    r.read("segment_duration", g.segment_duration);
    r.read("buffer_target", g.buffer_target);
    r.read("fill_throughput", g.fill_throughput);
    r.read("video_duration", g.video_duration);
    r.read("packet_size", g.packet_size);
    r.read("jitter", g.jitter);
    r.read("throttling_factor", g.throttling_factor);
    r.read("bulk_duration", g.bulk_duration);
    r.read("bulk_rate", g.bulk_rate);
    r.reject_unknown();
  }
  if (const auto* s = root.child("thresholds")) {
    Reader r(*s, "thresholds");
    auto& t = cfg.thresholds;
    r.read("min_diagonal_percent", t.min_diagonal_percent);
    r.read("max_nrmse_mq_hq", t.max_nrmse_mq_hq);
    r.read("max_nrmse_qc_first", t.max_nrmse_qc_first);
    r.read("min_pattern_fraction", t.min_pattern_fraction);
    r.read("min_negative_fraction", t.min_negative_fraction);
    r.reject_unknown();
  }
  root.reject_unknown();
  validated([&] { cfg.validate(); });
  return cfg;
}

json to_json(const Config& cfg) {
  const auto& p = cfg.profiler;
  const auto& g = cfg.generator;
  const auto& t = cfg.thresholds;
  return {
      {"rate", {{"delta_t", p.rate.delta_t}, {"a", p.rate.a}, {"c", p.rate.c}}},
      {"burst",
       {{"h_t", p.burst.h_t},
        {"h_d", p.burst.h_d},
        {"h_r", p.burst.h_r},
        {"h_s", p.burst.h_s},
        {"h_n", p.burst.h_n}}},
      {"fusion",
       {{"match_tolerance", p.fusion.match_tolerance},
        {"silence_timeout", p.fusion.silence_timeout},
        {"startup_delay", p.fusion.startup_delay}}},
      {"generator",
       {{"segment_duration", g.segment_duration},
        {"buffer_target", g.buffer_target},
        {"fill_throughput", g.fill_throughput},
        {"video_duration", g.video_duration},
        {"packet_size", g.packet_size},
        {"jitter", g.jitter},
        {"throttling_factor", g.throttling_factor},
        {"bulk_duration", g.bulk_duration},
        {"bulk_rate", g.bulk_rate}}},
      {"thresholds",
       {{"min_diagonal_percent", t.min_diagonal_percent},
        {"max_nrmse_mq_hq", t.max_nrmse_mq_hq},
        {"max_nrmse_qc_first", t.max_nrmse_qc_first},
        {"min_pattern_fraction", t.min_pattern_fraction},
        {"min_negative_fraction", t.min_negative_fraction}}},
  };
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file '" + path.string() + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const std::filesystem::path& path, const Config& config) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write config file '" + path.string() + "'");
  }
  out << to_json(config).dump(2) << '\n';
}

ScenarioSpec scenario_from_json(const json& j) {
  ScenarioSpec spec;
  Reader r(j, "");
  r.read("name", spec.name);
  r.read("segment_duration", spec.segment_duration);
  r.read("buffer_target", spec.buffer_target);
  r.read("fill_throughput", spec.fill_throughput);
  r.read("video_duration", spec.video_duration);
  r.read("packet_size", spec.packet_size);
  r.read("rng_seed", spec.rng_seed);
  r.read("jitter", spec.jitter);
  r.read("throttling_factor", spec.throttling_factor);
  if (const auto* rates = r.child("encode_rates")) {
    if (!rates->is_array()) throw ConfigError("config field 'encode_rates' must be an array");
    for (std::size_t i = 0; i < rates->size(); ++i) {
      Reader e((*rates)[i], "encode_rates[" + std::to_string(i) + "]");
      EncodeRateChange change;
      e.read("start_time", change.start_time);
      e.read("rate", change.rate);
      e.read("flush", change.flush);
      e.reject_unknown();
      spec.encode_rates.push_back(change);
    }
  }
  if (const auto* windows = r.child("throttle_windows")) {
    if (!windows->is_array()) throw ConfigError("config field 'throttle_windows' must be an array");
    for (std::size_t i = 0; i < windows->size(); ++i) {
      Reader w((*windows)[i], "throttle_windows[" + std::to_string(i) + "]");
      ThrottleWindow window;
      w.read("t_start", window.t_start);
      w.read("t_end", window.t_end);
      w.read("cap", window.cap);
      w.reject_unknown();
      spec.throttle_windows.push_back(window);
    }
  }
  if (const auto* flow = r.child("flow")) {
    Reader f(*flow, "flow");
    f.read("src", spec.flow.src);
    f.read("dst", spec.flow.dst);
    int port = spec.flow.dst_port.value_or(0);
    f.read("dst_port", port);
    if (port < 0 || port > 65535) throw ConfigError("config field 'flow.dst_port' out of range");
    spec.flow.dst_port = port == 0 ? std::nullopt : std::optional<std::uint16_t>(port);
    f.reject_unknown();
  }
  r.reject_unknown();
  validated([&] { spec.validate(); });
  return spec;
}

json to_json(const ScenarioSpec& spec) {
  json rates = json::array();
  for (const auto& c : spec.encode_rates) {
    rates.push_back({{"start_time", c.start_time}, {"rate", c.rate}, {"flush", c.flush}});
  }
  json windows = json::array();
  for (const auto& w : spec.throttle_windows) {
    windows.push_back({{"t_start", w.t_start}, {"t_end", w.t_end}, {"cap", w.cap}});
  }
  return {{"name", spec.name},
          {"encode_rates", rates},
          {"segment_duration", spec.segment_duration},
          {"buffer_target", spec.buffer_target},
          {"fill_throughput", spec.fill_throughput},
          {"throttle_windows", windows},
          {"video_duration", spec.video_duration},
          {"packet_size", spec.packet_size},
          {"rng_seed", spec.rng_seed},
          {"jitter", spec.jitter},
          {"throttling_factor", spec.throttling_factor},
          {"flow",
           {{"src", spec.flow.src},
            {"dst", spec.flow.dst},
            {"dst_port", spec.flow.dst_port.value_or(0)}}}};
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open scenario file '" + path.string() + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace hasprof
