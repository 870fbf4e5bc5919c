#include "hasprof/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hasprof {

namespace {

constexpr std::string_view kTraceHeader = "t,size,src,dst,dst_port";
constexpr std::string_view kLabelHeader = "t_start,t_end,phase";

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  return s;
}

double parse_seconds(std::string_view field, std::size_t line, const char* name) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(line, std::string("invalid ") + name + " '" + std::string(field) + "'");
  }
  if (!std::isfinite(value) || value < 0.0) {
    throw ParseError(line, std::string(name) + " must be finite and >= 0");
  }
  return value;
}

std::uint64_t parse_uint(std::string_view field, std::size_t line, const char* name) {
  std::uint64_t value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(line, std::string("invalid ") + name + " '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}

std::string to_string(const FlowKey& flow) {
  std::string out = flow.src + "->" + flow.dst;
  if (flow.dst_port) {
    out += ":" + std::to_string(*flow.dst_port);
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

Trace parse_trace(std::istream& in) {
  Trace trace;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) {
      continue;
    }
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos) {
        trace.meta[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
      }
      continue;
    }
    if (!header_seen) {
      if (line != kTraceHeader) {
        throw ParseError(line_no, "expected header '" + std::string(kTraceHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 5) {
      throw ParseError(line_no, "expected 5 fields, got " + std::to_string(fields.size()));
    }
    PacketRecord rec;
    rec.t_arrival = parse_seconds(trim(fields[0]), line_no, "t");
    rec.payload_size = parse_uint(trim(fields[1]), line_no, "size");
    if (rec.payload_size < 1) {
      throw ParseError(line_no, "size must be >= 1");
    }
    rec.flow.src = std::string(trim(fields[2]));
    rec.flow.dst = std::string(trim(fields[3]));
    if (rec.flow.src.empty() || rec.flow.dst.empty()) {
      throw ParseError(line_no, "src and dst must be non-empty");
    }
    const auto port = trim(fields[4]);
    if (!port.empty()) {
      const auto value = parse_uint(port, line_no, "dst_port");
      if (value < 1 || value > 65535) {
        throw ParseError(line_no, "dst_port out of range 1-65535");
      }
      rec.flow.dst_port = static_cast<std::uint16_t>(value);
    }
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

Trace parse_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

void write_trace(std::ostream& out, const Trace& trace) {
  for (const auto& [key, value] : trace.meta) {
    out << "# " << key << '=' << value << '\n';
  }
  out << kTraceHeader << '\n';
  for (const auto& rec : trace.records) {
    out << format_double(rec.t_arrival) << ',' << rec.payload_size << ',' << rec.flow.src << ','
        << rec.flow.dst << ',';
    if (rec.flow.dst_port) {
      out << *rec.flow.dst_port;
    }
    out << '\n';
  }
}

std::string serialize_trace(const Trace& trace) {
  std::ostringstream out;
  write_trace(out, trace);
  return out.str();
}

Trace read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open trace file '" + path.string() + "'");
  }
  try {
    return parse_trace(in);
  } catch (const ParseError& e) {
    throw std::runtime_error(path.string() + ":" + std::to_string(e.line()) + ": " + e.detail());
  }
}

void write_trace_file(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write trace file '" + path.string() + "'");
  }
  write_trace(out, trace);
}

Trace normalize(Trace trace, bool shift_origin) {
  std::stable_sort(trace.records.begin(), trace.records.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.t_arrival < b.t_arrival; });
  if (shift_origin && !trace.records.empty()) {
    const double origin = trace.records.front().t_arrival;
    for (auto& rec : trace.records) {
      rec.t_arrival -= origin;
    }
  }
  return trace;
}

std::map<FlowKey, Trace> demux(const Trace& trace) {
  std::map<FlowKey, Trace> flows;
  for (const auto& rec : trace.records) {
    auto& sub = flows[rec.flow];
    if (sub.records.empty()) {
      sub.meta = trace.meta;
    }
    sub.records.push_back(rec);
  }
  return flows;
}

std::vector<Trace> split_sessions(const Trace& flow_trace, double silence_timeout) {
  std::vector<Trace> sessions;
  const auto& recs = flow_trace.records;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (i == 0 || recs[i].t_arrival - recs[i - 1].t_arrival > silence_timeout) {
      sessions.emplace_back();
      sessions.back().meta = flow_trace.meta;
    }
    sessions.back().records.push_back(recs[i]);
  }
  return sessions;
}

std::uint64_t total_bytes(const Trace& trace) {
  std::uint64_t sum = 0;
  for (const auto& rec : trace.records) {
    sum += rec.payload_size;
  }
  return sum;
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::filling:
      return "filling";
    case Phase::steady_state:
      return "steady_state";
    case Phase::other:
      return "other";
  }
  return "other";
}

std::optional<Phase> phase_from_string(std::string_view name) {
  if (name == "filling") return Phase::filling;
  if (name == "steady_state") return Phase::steady_state;
  if (name == "other") return Phase::other;
  return std::nullopt;
}

std::vector<PhaseLabel> parse_labels(std::istream& in) {
  std::vector<PhaseLabel> labels;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    if (!header_seen) {
      if (line != kLabelHeader) {
        throw ParseError(line_no, "expected header '" + std::string(kLabelHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    }
    PhaseLabel label;
    label.t_start = parse_seconds(trim(fields[0]), line_no, "t_start");
    label.t_end = parse_seconds(trim(fields[1]), line_no, "t_end");
    if (label.t_end < label.t_start) {
      throw ParseError(line_no, "t_end before t_start");
    }
    const auto phase = phase_from_string(trim(fields[2]));
    if (!phase) {
      throw ParseError(line_no, "unknown phase '" + std::string(trim(fields[2])) + "'");
    }
    label.phase = *phase;
    labels.push_back(label);
  }
  return labels;
}

void write_labels(std::ostream& out, const std::vector<PhaseLabel>& labels) {
  out << kLabelHeader << '\n';
  for (const auto& label : labels) {
    out << format_double(label.t_start) << ',' << format_double(label.t_end) << ','
        << to_string(label.phase) << '\n';
  }
}

std::vector<PhaseLabel> read_labels_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open label file '" + path.string() + "'");
  }
  try {
    return parse_labels(in);
  } catch (const ParseError& e) {
    throw std::runtime_error(path.string() + ":" + std::to_string(e.line()) + ": " + e.detail());
  }
}

void write_labels_file(const std::filesystem::path& path, const std::vector<PhaseLabel>& labels) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write label file '" + path.string() + "'");
  }
  write_labels(out, labels);
}

}  // namespace hasprof
