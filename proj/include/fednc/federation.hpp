#pragma once

// Round orchestration for the two schemes: plain federated averaging, and
// averaging behind an RLNC hop where the edge encodes the participants'
// parameter packets and the central server decodes by Gaussian elimination.
// A round whose coefficient matrix stays rank-deficient leaves the global
// model untouched.

#include <cstdint>
#include <span>
#include <vector>

#include "fednc/codec.hpp"
#include "fednc/model.hpp"
#include "fednc/netsim.hpp"
#include "fednc/rng.hpp"

namespace fednc::federation {

struct BadWeightsError : std::invalid_argument {
  explicit BadWeightsError(const std::string& what)
      : std::invalid_argument(what) {}
};

struct InsufficientDataError : std::invalid_argument {
  explicit InsufficientDataError(const std::string& what)
      : std::invalid_argument(what) {}
};

enum class Scheme { FedAvg, FedNC };
enum class PartitionKind { Iid, MixedNonIid };

struct FederationConfig {
  int n_clients = 100;
  int participants_per_round = 10;
  int rounds = 100;
  // Aggregation weights per client; empty means proportional to local
  // dataset size. Renormalized over each round's participant set.
  std::vector<double> client_weights;
  PartitionKind partition = PartitionKind::Iid;
  int shards_per_client = 2;
  double iid_fraction = 0.05;
  unsigned field_width = 8;
  Scheme scheme = Scheme::FedNC;
};

struct RoundMetrics {
  int round = 0;
  std::vector<int> participants;  // ascending client ids
  bool decode_success = false;
  long packets_drawn = 0;
  int rank_at_stop = 0;
  double test_accuracy = 0.0;
  double train_loss = 0.0;
  double wallclock_ms = 0.0;
};

// iid: uniform disjoint split, sizes equal up to one. mixed non-iid: the
// non-iid share is cut into single-label shards (shards_per_client per
// client); the iid share plus shard remainders are dealt uniformly. The
// partition always covers the full dataset exactly.
std::vector<model::Dataset> partition_data(const model::Dataset& full,
                                           const FederationConfig& cfg,
                                           Rng& rng);

// Uniform sample of k distinct client ids, ascending.
std::vector<int> select_participants(int n_clients, int k, Rng& rng);

// Weighted coordinate-wise sum, accumulated left to right in the given
// order. Weights must be non-negative and sum to 1 within 1e-9.
model::ModelParams aggregate(std::span<const model::ModelParams> params,
                             std::span<const double> weights);

struct FederationState {
  model::ModelParams global;
  std::vector<model::Dataset> client_data;
  model::Architecture arch;
  const model::Dataset* test_data = nullptr;
};

struct RoundOutcome {
  model::ModelParams global;
  RoundMetrics metrics;
};

RoundOutcome run_fedavg_round(const FederationState& state,
                              const FederationConfig& cfg,
                              const model::TrainConfig& train_cfg,
                              const netsim::ChannelConfig& channel,
                              std::uint64_t root_seed, int round);

RoundOutcome run_fednc_round(const FederationState& state,
                             const FederationConfig& cfg,
                             const model::TrainConfig& train_cfg,
                             const netsim::ChannelConfig& channel,
                             std::uint64_t root_seed, int round);

}  // namespace fednc::federation
