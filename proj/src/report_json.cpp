#include "hasprof/report_json.hpp"

#include <ostream>

namespace hasprof {

using nlohmann::json;

double to_kbps(double bytes_per_second) { return bytes_per_second * 8.0 / 1000.0; }

namespace {

json rate_json(double bytes_per_second) {
  return {{"bytes_per_s", bytes_per_second}, {"kbps", to_kbps(bytes_per_second)}};
}

json flow_json(const FlowKey& flow) {
  json j = {{"src", flow.src}, {"dst", flow.dst}};
  j["dst_port"] = flow.dst_port ? json(*flow.dst_port) : json(nullptr);
  return j;
}

}  // namespace

json to_json(const ProfileReport& report) {
  json segments = json::array();
  for (const auto& s : report.segments) {
    segments.push_back({{"phase", to_string(s.phase)},
                        {"t_start", s.t_start},
                        {"t_end", s.t_end},
                        {"duration", s.duration()},
                        {"volume", s.volume},
                        {"mean_rate", s.mean_rate},
                        {"mean_rate_kbps", to_kbps(s.mean_rate)}});
  }
  json verdict = {{"is_video_stream", report.verdict.is_video_stream}};
  verdict["first_filling"] =
      report.verdict.first_filling ? json(*report.verdict.first_filling) : json(nullptr);
  verdict["first_steady"] =
      report.verdict.first_steady ? json(*report.verdict.first_steady) : json(nullptr);

  json per_segment = json::array();
  for (const auto& r : report.rates.per_segment) {
    per_segment.push_back({{"segment", r.segment}, {"rate", r.rate}, {"rate_kbps", to_kbps(r.rate)}});
  }
  json rates = {{"per_segment", per_segment}};
  rates["session"] = report.rates.session ? rate_json(*report.rates.session) : json(nullptr);

  json stats = json::array();
  for (const auto& s : report.stats) {
    stats.push_back({{"phase", to_string(s.phase)},
                     {"count", s.count},
                     {"volume", s.volume},
                     {"duration", s.duration},
                     {"mean_rate", s.mean_rate},
                     {"mean_rate_kbps", to_kbps(s.mean_rate)}});
  }

  json buffer = nullptr;
  if (report.buffer) {
    json samples = json::array();
    for (const auto& s : report.buffer->samples) samples.push_back({s.t, s.buffered});
    buffer = {{"playout_start", report.buffer->playout_start},
              {"encode_rate_used", rate_json(report.buffer->encode_rate_used)},
              {"samples", samples}};
  }

  return {{"unit", kUnitNote},
          {"flow", flow_json(report.flow)},
          {"t_begin", report.t_begin},
          {"t_end", report.t_end},
          {"packets", report.packets},
          {"total_bytes", report.total_bytes},
          {"rate_changes", report.rate.changes.size()},
          {"bursts", report.bursts.size()},
          {"segments", segments},
          {"verdict", verdict},
          {"rate_estimate", rates},
          {"phase_stats", stats},
          {"buffer", buffer}};
}

json to_json(const ConfusionMatrix& matrix) {
  json seconds = json::array();
  json percent = json::array();
  const auto pct = matrix.percent();
  for (std::size_t i = 0; i < 3; ++i) {
    seconds.push_back(matrix.seconds[i]);
    percent.push_back(pct[i]);
  }
  return {{"order", {"filling", "steady_state", "other"}},
          {"rows", "true phase"},
          {"columns", "identified phase"},
          {"seconds", seconds},
          {"percent", percent}};
}

json to_json(const BatchReport& report) {
  json runs = json::array();
  for (const auto& r : report.per_run) {
    json rates = json::array();
    for (const auto& p : r.steady_rates) {
      rates.push_back(p ? json{{"r_hat", p->r_hat}, {"r_true", p->r_true}} : json(nullptr));
    }
    runs.push_back({{"seed", r.seed},
                    {"filling_segments", r.filling_segments},
                    {"steady_segments", r.steady_segments},
                    {"is_video_stream", r.is_video_stream},
                    {"pattern_ok", r.pattern_ok},
                    {"steady_rates", rates},
                    {"confusion_seconds", to_json(r.confusion)["seconds"]}});
  }
  json phases = json::array();
  for (std::size_t k = 0; k < report.steady_pairs.size(); ++k) {
    std::vector<double> hat;
    std::vector<double> truth;
    for (const auto& p : report.steady_pairs[k]) {
      hat.push_back(p.r_hat);
      truth.push_back(p.r_true);
    }
    json cdf_hat = json::array();
    for (const auto& c : empirical_cdf(hat)) cdf_hat.push_back({c.value, c.quantile});
    json cdf_true = json::array();
    for (const auto& c : empirical_cdf(truth)) cdf_true.push_back({c.value, c.quantile});
    json entry = {{"steady_phase", k + 1},
                  {"pairs", report.steady_pairs[k].size()},
                  {"missing", report.steady_missing[k]},
                  {"cdf_r_hat", cdf_hat},
                  {"cdf_r_true", cdf_true}};
    entry["nrmse"] = report.nrmse_by_phase[k] ? json(*report.nrmse_by_phase[k]) : json(nullptr);
    phases.push_back(entry);
  }
  return {{"unit", kUnitNote},
          {"scenario", report.scenario},
          {"runs", report.runs},
          {"base_seed", report.base_seed},
          {"confusion", to_json(report.confusion)},
          {"pattern_ok_runs", report.pattern_ok_runs},
          {"video_stream_runs", report.video_stream_runs},
          {"steady_phases", phases},
          {"per_run", runs}};
}

json to_json(const std::vector<ThresholdCheck>& checks) {
  json out = json::array();
  for (const auto& c : checks) {
    out.push_back({{"metric", c.metric},
                   {"value", c.value},
                   {"threshold", c.threshold},
                   {"bound", c.upper_bound ? "max" : "min"},
                   {"passed", c.passed}});
  }
  return out;
}

void write_rate_csv(std::ostream& out, const RateSeries& series) {
  out << "bin,rho,r_smooth,r_smooth_max,flag\n";
  for (std::size_t i = 0; i < series.bins(); ++i) {
    out << i + 1 << ',' << format_double(series.rho[i]) << ',' << format_double(series.r_smooth[i])
        << ',' << format_double(series.r_smooth_max[i]) << ',' << series.flag[i] << '\n';
  }
}

void write_burst_csv(std::ostream& out, const std::vector<Burst>& bursts) {
  out << "n,t_start,t_end,size,duration,rate,klass\n";
  for (const auto& b : bursts) {
    out << b.index << ',' << format_double(b.t_start) << ',' << format_double(b.t_end) << ','
        << b.size << ',' << format_double(b.duration()) << ',' << format_double(b.rate) << ','
        << static_cast<int>(b.klass) << '\n';
  }
}

void write_buffer_csv(std::ostream& out, const BufferTrajectory& buffer) {
  out << "t,buffered\n";
  for (const auto& s : buffer.samples) {
    out << format_double(s.t) << ',' << format_double(s.buffered) << '\n';
  }
}

void write_cdf_csv(std::ostream& out, const std::vector<CdfPoint>& cdf) {
  out << "value,quantile\n";
  for (const auto& c : cdf) {
    out << format_double(c.value) << ',' << format_double(c.quantile) << '\n';
  }
}

}  // namespace hasprof
