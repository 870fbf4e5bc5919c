#include "hasprof/burst_detector.hpp"

#include <algorithm>
#include <stdexcept>

namespace hasprof {

void BurstParams::validate() const {
  if (!(h_t > 0.0)) throw std::invalid_argument("burst.h_t must be > 0");
  if (!(h_d > 0.0)) throw std::invalid_argument("burst.h_d must be > 0");
  if (!(h_r > 0.0 && h_r < 1.0)) throw std::invalid_argument("burst.h_r must be in (0, 1)");
  if (!(h_s > 0.0)) throw std::invalid_argument("burst.h_s must be > 0");
  if (h_n < 1) throw std::invalid_argument("burst.h_n must be >= 1");
}

std::vector<Burst> segment(std::span<const PacketRecord> records, const BurstParams& params,
                           double min_duration) {
  std::vector<Burst> bursts;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (bursts.empty() || rec.t_arrival - bursts.back().t_end >= params.h_t) {
      Burst b;
      b.index = bursts.size() + 1;
      b.t_start = rec.t_arrival;
      b.first_packet = i;
      bursts.push_back(b);
    }
    auto& b = bursts.back();
    b.t_end = rec.t_arrival;
    b.size += rec.payload_size;
    ++b.packet_count;
  }
  for (auto& b : bursts) {
    b.rate = static_cast<double>(b.size) / std::max(b.duration(), min_duration);
  }
  return bursts;
}

std::vector<Burst> filter_small(std::vector<Burst> bursts, const BurstParams& params) {
  std::erase_if(bursts, [&](const Burst& b) { return static_cast<double>(b.size) < params.h_s; });
  for (std::size_t i = 0; i < bursts.size(); ++i) {
    bursts[i].index = i + 1;
  }
  return bursts;
}

std::vector<Burst> classify(std::vector<Burst> bursts, const BurstParams& params) {
  if (bursts.empty()) {
    return bursts;
  }
  const double reference = bursts.front().rate;
  for (auto& b : bursts) {
    if (b.rate >= params.h_r * reference) {
      b.klass = b.duration() >= params.h_d ? BurstClass::filling : BurstClass::steady;
    } else {
      b.klass = BurstClass::other;
    }
  }
  return bursts;
}

std::vector<PhaseCandidate> confirm_steady(std::span<const Burst> bursts,
                                           const BurstParams& params) {
  std::vector<PhaseCandidate> out;
  std::size_t i = 0;
  while (i < bursts.size()) {
    const auto klass = bursts[i].klass;
    std::size_t j = i;
    while (j + 1 < bursts.size() && bursts[j + 1].klass == klass) {
      ++j;
    }
    const auto run = j - i + 1;
    if (klass == BurstClass::filling ||
        (klass == BurstClass::steady && run >= static_cast<std::size_t>(params.h_n))) {
      out.push_back({klass == BurstClass::filling ? Phase::filling : Phase::steady_state,
                     bursts[i].t_start, bursts[j].t_end, bursts[i].index, bursts[j].index});
    }
    i = j + 1;
  }
  return out;
}

}  // namespace hasprof
