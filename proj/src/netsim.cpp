#include "fednc/netsim.hpp"

#include <stdexcept>

namespace fednc::netsim {

long blind_box_collect_uncoded(int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::vector<bool> seen(static_cast<std::size_t>(k), false);
  int distinct = 0;
  long draws = 0;
  while (distinct < k) {
    const auto type = static_cast<std::size_t>(
        rng.next_below(static_cast<std::uint64_t>(k)));
    ++draws;
    if (!seen[type]) {
      seen[type] = true;
      ++distinct;
    }
  }
  return draws;
}

long blind_box_collect_coded(int k, const gf::Field& field, Rng& rng) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  codec::DecoderState state(static_cast<std::size_t>(k), field);
  long draws = 0;
  while (!state.complete()) {
    const codec::CodingVector v =
        codec::random_coding_vector(static_cast<std::size_t>(k), field, rng);
    ++draws;
    state.absorb_vector(v);
  }
  return draws;
}

std::vector<codec::CodedPacket> transmit_lossy(
    std::vector<codec::CodedPacket> packets, double loss_prob, Rng& rng) {
  if (loss_prob < 0.0 || loss_prob >= 1.0) {
    throw std::invalid_argument("loss probability must lie in [0, 1)");
  }
  std::vector<codec::CodedPacket> delivered;
  delivered.reserve(packets.size());
  for (auto& p : packets) {
    if (!rng.next_bernoulli(loss_prob)) delivered.push_back(std::move(p));
  }
  return delivered;
}

EavesdropReport eavesdrop_audit(std::span<const codec::CodedPacket> intercepted,
                                int k, const gf::Field& field) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  codec::DecoderState state(static_cast<std::size_t>(k), field);
  for (const auto& packet : intercepted) {
    state.absorb_vector(packet.vector);
  }
  EavesdropReport report;
  report.intercepted = static_cast<int>(intercepted.size());
  report.rank = static_cast<int>(state.rank());
  for (int i = 0; i < k; ++i) {
    codec::CodingVector unit;
    unit.coefficients.assign(static_cast<std::size_t>(k), 0);
    unit.coefficients[static_cast<std::size_t>(i)] = 1;
    if (state.in_row_space(unit)) report.recoverable_indices.push_back(i);
  }
  return report;
}

}  // namespace fednc::netsim
