#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "hasprof/trace_io.hpp"

using namespace hasprof;

namespace {

const FlowKey kFlowA{"10.0.0.1", "192.168.1.5", 443};
const FlowKey kFlowB{"10.0.0.2", "192.168.1.5", std::nullopt};

Trace make_trace(std::initializer_list<PacketRecord> recs) {
  Trace t;
  t.records = recs;
  return t;
}

}  // namespace

TEST(TraceIo, ParsesOneRow) {
  const auto trace = parse_trace("t,size,src,dst,dst_port\n0.020,1200,10.0.0.1,192.168.1.5,443\n");
  ASSERT_EQ(trace.size(), 1u);
  EXPECT_DOUBLE_EQ(trace.records[0].t_arrival, 0.020);
  EXPECT_EQ(trace.records[0].payload_size, 1200u);
  EXPECT_EQ(trace.records[0].flow, kFlowA);
}

TEST(TraceIo, HeaderOnlyIsEmpty) {
  EXPECT_TRUE(parse_trace("t,size,src,dst,dst_port\n").empty());
  EXPECT_TRUE(parse_trace("").empty());
}

TEST(TraceIo, ZeroSizeIsRejectedWithLine) {
  try {
    parse_trace("t,size,src,dst,dst_port\n0.1,10,a,b,\n0.2,0,a,b,\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(TraceIo, MalformedRowsAreRejected) {
  const std::string h = "t,size,src,dst,dst_port\n";
  EXPECT_THROW(parse_trace(h + "0.1,10,a,b\n"), ParseError);
  EXPECT_THROW(parse_trace(h + "x,10,a,b,1\n"), ParseError);
  EXPECT_THROW(parse_trace(h + "-1,10,a,b,1\n"), ParseError);
  EXPECT_THROW(parse_trace(h + "inf,10,a,b,1\n"), ParseError);
  EXPECT_THROW(parse_trace(h + "0.1,10,a,b,70000\n"), ParseError);
  EXPECT_THROW(parse_trace(h + "0.1,10,a,b,0\n"), ParseError);
  EXPECT_THROW(parse_trace(h + "0.1,1.5,a,b,1\n"), ParseError);
  EXPECT_THROW(parse_trace("time,bytes\n"), ParseError);
}

TEST(TraceIo, AbsentPortDiffersFromAnyPort) {
  const auto trace = parse_trace("t,size,src,dst,dst_port\n0,5,a,b,\n0,5,a,b,80\n");
  EXPECT_FALSE(trace.records[0].flow.dst_port.has_value());
  EXPECT_NE(trace.records[0].flow, trace.records[1].flow);
}

TEST(TraceIo, RowOrderIsPreserved) {
  const auto trace = parse_trace("t,size,src,dst,dst_port\n3,1,a,b,\n1,2,a,b,\n2,3,a,b,\n");
  ASSERT_EQ(trace.size(), 3u);
  EXPECT_EQ(trace.records[0].payload_size, 1u);
  EXPECT_EQ(trace.records[1].payload_size, 2u);
  EXPECT_EQ(trace.records[2].payload_size, 3u);
}

TEST(TraceIo, MissingFileNamesPath) {
  try {
    read_trace_file("/nonexistent/dir/trace.csv");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/trace.csv"), std::string::npos);
  }
}

TEST(TraceIo, FileErrorCarriesPathAndLine) {
  const auto path = std::filesystem::temp_directory_path() / "hasprof_bad_trace.csv";
  {
    std::ofstream out(path);
    out << "t,size,src,dst,dst_port\n0.1,10,a,b,\n0.2,zz,a,b,\n";
  }
  try {
    read_trace_file(path);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(path.string() + ":3:"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

TEST(TraceIo, NormalizeSortsAndShifts) {
  const auto t = normalize(make_trace({{5.0, 1, kFlowA}, {5.2, 2, kFlowA}, {5.1, 3, kFlowA}}));
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.records[0].payload_size, 1u);
  EXPECT_EQ(t.records[1].payload_size, 3u);
  EXPECT_EQ(t.records[2].payload_size, 2u);
  EXPECT_DOUBLE_EQ(t.records[0].t_arrival, 0.0);
  EXPECT_NEAR(t.records[1].t_arrival, 0.1, 1e-12);
  EXPECT_NEAR(t.records[2].t_arrival, 0.2, 1e-12);
}

TEST(TraceIo, NormalizeIsStableOnTies) {
  const auto t = normalize(make_trace({{1.0, 7, kFlowA}, {0.5, 1, kFlowA}, {1.0, 8, kFlowB}, {1.0, 9, kFlowA}}));
  EXPECT_EQ(t.records[1].payload_size, 7u);
  EXPECT_EQ(t.records[2].payload_size, 8u);
  EXPECT_EQ(t.records[3].payload_size, 9u);
}

TEST(TraceIo, NormalizeSortedInputKeepsOrder) {
  const auto in = make_trace({{2.0, 1, kFlowA}, {2.5, 2, kFlowA}, {4.0, 3, kFlowA}});
  const auto t = normalize(in);
  for (std::size_t i = 0; i < in.size(); ++i) {
    EXPECT_EQ(t.records[i].payload_size, in.records[i].payload_size);
    EXPECT_DOUBLE_EQ(t.records[i].t_arrival, in.records[i].t_arrival - 2.0);
  }
}

TEST(TraceIo, DemuxTwoFlows) {
  const auto t = make_trace({{0, 1, kFlowA}, {1, 2, kFlowB}, {2, 3, kFlowA}, {3, 4, kFlowB}, {4, 5, kFlowA}});
  const auto flows = demux(t);
  ASSERT_EQ(flows.size(), 2u);
  EXPECT_EQ(flows.at(kFlowA).size(), 3u);
  EXPECT_EQ(flows.at(kFlowB).size(), 2u);
  EXPECT_EQ(flows.at(kFlowA).records[1].payload_size, 3u);
}

TEST(TraceIo, DemuxSingleFlowIsIdentity) {
  const auto t = make_trace({{0, 1, kFlowA}, {1, 2, kFlowA}});
  const auto flows = demux(t);
  ASSERT_EQ(flows.size(), 1u);
  EXPECT_EQ(flows.at(kFlowA).records, t.records);
}

TEST(TraceIo, DemuxEmpty) { EXPECT_TRUE(demux(Trace{}).empty()); }

TEST(TraceIo, SplitSessionsOnSilence) {
  const auto t = make_trace({{0, 1, kFlowA}, {1, 1, kFlowA}, {40, 1, kFlowA}, {41, 1, kFlowA}});
  const auto parts = split_sessions(t, 30.0);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].size(), 2u);
  EXPECT_EQ(parts[1].size(), 2u);
  EXPECT_EQ(split_sessions(t, 50.0).size(), 1u);
}

TEST(TraceIo, LabelRoundTrip) {
  const std::vector<PhaseLabel> labels{{0, 9.5, Phase::filling}, {9.5, 100.25, Phase::steady_state},
                                       {100.25, 120, Phase::other}};
  std::stringstream ss;
  write_labels(ss, labels);
  EXPECT_EQ(parse_labels(ss), labels);
  std::stringstream bad("t_start,t_end,phase\n0,1,buffering\n");
  EXPECT_THROW(parse_labels(bad), ParseError);
}

namespace {

Trace random_trace(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> t(0.0, 1e4);
  std::uniform_int_distribution<std::uint64_t> size(1, 1'000'000);
  std::uniform_int_distribution<int> flow(0, 3);
  const FlowKey flows[] = {kFlowA, kFlowB, {"fe80::1", "fe80::2", 65535}, {"1.1.1.1", "2.2.2.2", 1}};
  Trace trace;
  trace.meta["scenario"] = "random";
  for (std::size_t i = 0; i < n; ++i) {
    trace.records.push_back({t(rng), size(rng), flows[flow(rng)]});
  }
  return trace;
}

}  // namespace

TEST(TraceIoProperty, SerializeParseRoundTripIsExact) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto trace = random_trace(seed, 300);
    EXPECT_EQ(parse_trace(serialize_trace(trace)), trace);
  }
}

TEST(TraceIoProperty, DemuxIsPartition) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto trace = normalize(random_trace(seed, 500));
    const auto flows = demux(trace);
    std::size_t total = 0;
    for (const auto& [key, sub] : flows) {
      total += sub.size();
      // Order within a flow follows the input order.
      std::size_t pos = 0;
      for (const auto& rec : sub.records) {
        EXPECT_EQ(rec.flow, key);
        while (pos < trace.size() && !(trace.records[pos] == rec)) ++pos;
        ASSERT_LT(pos, trace.size());
        ++pos;
      }
    }
    EXPECT_EQ(total, trace.size());
  }
}

TEST(TraceIoProperty, NormalizeIsIdempotent) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto once = normalize(random_trace(seed, 200));
    EXPECT_EQ(normalize(once), once);
  }
}
