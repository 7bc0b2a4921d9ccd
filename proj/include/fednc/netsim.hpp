#pragma once

// Channel and adversary models for the edge -> central hop: blind-box
// packet collection (uncoded coupon collecting vs coded rank filling), an
// independent-loss channel, and the eavesdropper row-space audit.

#include <cstdint>
#include <span>
#include <vector>

#include "fednc/codec.hpp"
#include "fednc/galois.hpp"
#include "fednc/rng.hpp"

namespace fednc::netsim {

enum class ChannelMode { Direct, BlindBox, Lossy };

struct ChannelConfig {
  ChannelMode mode = ChannelMode::Direct;
  double loss_prob = 0.0;   // Lossy: independent drop probability, < 1
  int redundancy = 0;       // extra coded packets beyond K (extension; 0 = Alg. 2)
  int max_draws = 1 << 20;  // BlindBox: per-round draw budget, >= K
};

// Uniform draws with replacement over K packet types until every type has
// been seen; returns the draw count.
long blind_box_collect_uncoded(int k, Rng& rng);

// Fresh uniform coding vectors absorbed one at a time until rank K.
long blind_box_collect_coded(int k, const gf::Field& field, Rng& rng);

// Independent Bernoulli losses; survivor order preserved.
std::vector<codec::CodedPacket> transmit_lossy(
    std::vector<codec::CodedPacket> packets, double loss_prob, Rng& rng);

struct EavesdropReport {
  int intercepted = 0;
  int rank = 0;
  // Original-packet indices the attacker can isolate exactly: k is
  // recoverable iff the unit vector e_k lies in the intercepted row space.
  std::vector<int> recoverable_indices;
};

EavesdropReport eavesdrop_audit(std::span<const codec::CodedPacket> intercepted,
                                int k, const gf::Field& field);

}  // namespace fednc::netsim
