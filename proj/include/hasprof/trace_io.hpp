#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hasprof {

// Addressing of one downlink flow. Absent port compares equal only to an
// absent port.
struct FlowKey {
  std::string src;
  std::string dst;
  std::optional<std::uint16_t> dst_port;

  auto operator<=>(const FlowKey&) const = default;
  bool operator==(const FlowKey&) const = default;
};

std::string to_string(const FlowKey& flow);

struct PacketRecord {
  double t_arrival = 0.0;          // seconds
  std::uint64_t payload_size = 0;  // TCP/UDP payload bytes, >= 1
  FlowKey flow;

  bool operator==(const PacketRecord&) const = default;
};

struct Trace {
  std::vector<PacketRecord> records;
  std::map<std::string, std::string> meta;

  bool operator==(const Trace&) const = default;
  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

// Canonical CSV: optional `# key=value` meta lines, then the header
// `t,size,src,dst,dst_port`, then one packet per line.
Trace parse_trace(std::istream& in);
Trace parse_trace(std::string_view text);
void write_trace(std::ostream& out, const Trace& trace);
std::string serialize_trace(const Trace& trace);

// Throws std::runtime_error naming the path if the file cannot be opened.
Trace read_trace_file(const std::filesystem::path& path);
void write_trace_file(const std::filesystem::path& path, const Trace& trace);

// Stable sort by arrival time; optionally shift so the first record is at 0.
Trace normalize(Trace trace, bool shift_origin = true);

std::map<FlowKey, Trace> demux(const Trace& trace);

// Splits an ordered single-flow trace wherever consecutive packets are more
// than `silence_timeout` seconds apart.
std::vector<Trace> split_sessions(const Trace& flow_trace, double silence_timeout);

std::uint64_t total_bytes(const Trace& trace);

enum class Phase { filling, steady_state, other };

std::string_view to_string(Phase phase);
std::optional<Phase> phase_from_string(std::string_view name);

struct PhaseLabel {
  double t_start = 0.0;
  double t_end = 0.0;
  Phase phase = Phase::other;

  bool operator==(const PhaseLabel&) const = default;
};

// Ground-truth label CSV: header `t_start,t_end,phase`.
std::vector<PhaseLabel> parse_labels(std::istream& in);
void write_labels(std::ostream& out, const std::vector<PhaseLabel>& labels);
std::vector<PhaseLabel> read_labels_file(const std::filesystem::path& path);
void write_labels_file(const std::filesystem::path& path,
                       const std::vector<PhaseLabel>& labels);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace hasprof
