#include "fednc/federation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

namespace fednc::federation {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<model::Dataset> deal_iid(const model::Dataset& full,
                                     std::vector<int> indices, int n_clients,
                                     Rng& rng) {
  rng.shuffle(indices);
  std::vector<std::vector<int>> per_client(
      static_cast<std::size_t>(n_clients));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    per_client[i % static_cast<std::size_t>(n_clients)].push_back(indices[i]);
  }
  std::vector<model::Dataset> out;
  out.reserve(static_cast<std::size_t>(n_clients));
  for (auto& idx : per_client) out.push_back(full.subset(idx));
  return out;
}

}  // namespace

std::vector<model::Dataset> partition_data(const model::Dataset& full,
                                           const FederationConfig& cfg,
                                           Rng& rng) {
  const int n = cfg.n_clients;
  if (n < 1) throw std::invalid_argument("n_clients must be >= 1");
  if (full.size() < static_cast<std::size_t>(n)) {
    throw InsufficientDataError("fewer samples than clients");
  }
  std::vector<int> indices(full.size());
  std::iota(indices.begin(), indices.end(), 0);

  if (cfg.partition == PartitionKind::Iid || cfg.iid_fraction >= 1.0) {
    return deal_iid(full, std::move(indices), n, rng);
  }

  rng.shuffle(indices);
  const auto total = static_cast<long>(full.size());
  const auto iid_count =
      static_cast<long>(std::llround(cfg.iid_fraction * total));
  const long n_shards = static_cast<long>(n) * cfg.shards_per_client;
  const long shard_size = (total - iid_count) / n_shards;
  if (shard_size < 1) {
    throw InsufficientDataError(
        "not enough non-iid samples to form one shard per slot");
  }

  std::vector<int> iid_pool(indices.begin(), indices.begin() + iid_count);
  std::map<int, std::vector<int>> by_label;
  for (auto it = indices.begin() + iid_count; it != indices.end(); ++it) {
    by_label[full.labels[static_cast<std::size_t>(*it)]].push_back(*it);
  }

  // Cut single-label shards, always from the label with the most samples
  // left so balanced data yields balanced shard counts per label.
  std::vector<std::vector<int>> shards;
  shards.reserve(static_cast<std::size_t>(n_shards));
  while (static_cast<long>(shards.size()) < n_shards) {
    auto best = by_label.end();
    for (auto it = by_label.begin(); it != by_label.end(); ++it) {
      if (best == by_label.end() ||
          it->second.size() > best->second.size()) {
        best = it;
      }
    }
    if (best == by_label.end() ||
        static_cast<long>(best->second.size()) < shard_size) {
      throw InsufficientDataError(
          "class counts cannot supply the requested single-label shards");
    }
    auto& pool = best->second;
    shards.emplace_back(pool.end() - shard_size, pool.end());
    pool.resize(pool.size() - static_cast<std::size_t>(shard_size));
  }
  // Whatever the shard cut did not consume is dealt out uniformly.
  for (auto& [label, rest] : by_label) {
    iid_pool.insert(iid_pool.end(), rest.begin(), rest.end());
  }

  std::vector<int> shard_order(shards.size());
  std::iota(shard_order.begin(), shard_order.end(), 0);
  rng.shuffle(shard_order);
  rng.shuffle(iid_pool);

  std::vector<std::vector<int>> per_client(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    for (int s = 0; s < cfg.shards_per_client; ++s) {
      const auto& shard = shards[static_cast<std::size_t>(
          shard_order[static_cast<std::size_t>(c * cfg.shards_per_client + s)])];
      per_client[static_cast<std::size_t>(c)].insert(
          per_client[static_cast<std::size_t>(c)].end(), shard.begin(),
          shard.end());
    }
  }
  for (std::size_t i = 0; i < iid_pool.size(); ++i) {
    per_client[i % static_cast<std::size_t>(n)].push_back(iid_pool[i]);
  }

  std::vector<model::Dataset> out;
  out.reserve(static_cast<std::size_t>(n));
  for (auto& idx : per_client) out.push_back(full.subset(idx));
  return out;
}

std::vector<int> select_participants(int n_clients, int k, Rng& rng) {
  if (k < 1 || k > n_clients) {
    throw std::invalid_argument("participant count must lie in [1, N]");
  }
  return rng.sample_without_replacement(n_clients, k);
}

model::ModelParams aggregate(std::span<const model::ModelParams> params,
                             std::span<const double> weights) {
  if (params.empty()) throw BadWeightsError("nothing to aggregate");
  if (params.size() != weights.size()) {
    throw BadWeightsError("one weight per parameter set required");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw BadWeightsError("weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw BadWeightsError("weights must sum to 1");
  }
  const auto& first = params.front();
  for (const auto& p : params) {
    if (p.shape_tag != first.shape_tag ||
        p.values.size() != first.values.size()) {
      throw model::ShapeMismatchError("aggregation inputs differ in shape");
    }
  }
  std::vector<double> acc(first.values.size(), 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double w = weights[i];
    const auto& values = params[i].values;
    for (std::size_t j = 0; j < values.size(); ++j) {
      acc[j] += w * double(values[j]);
    }
  }
  model::ModelParams out;
  out.shape_tag = first.shape_tag;
  out.values.reserve(acc.size());
  for (double v : acc) out.values.push_back(static_cast<float>(v));
  return out;
}

namespace {

std::vector<double> participant_weights(const FederationConfig& cfg,
                                        const FederationState& state,
                                        std::span<const int> participants) {
  std::vector<double> weights;
  weights.reserve(participants.size());
  for (int id : participants) {
    double base;
    if (cfg.client_weights.empty()) {
      base = static_cast<double>(
          state.client_data[static_cast<std::size_t>(id)].size());
    } else {
      base = cfg.client_weights[static_cast<std::size_t>(id)];
    }
    weights.push_back(base);
  }
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (sum <= 0.0) {
    throw BadWeightsError("participant weights sum to zero");
  }
  for (auto& w : weights) w /= sum;
  return weights;
}

struct TrainedRound {
  std::vector<int> participants;  // ascending
  std::vector<model::ModelParams> params;
  double mean_loss = 0.0;
};

TrainedRound train_participants(const FederationState& state,
                                const FederationConfig& cfg,
                                const model::TrainConfig& train_cfg,
                                std::uint64_t root_seed, int round) {
  TrainedRound out;
  Rng select_rng = seed_stream(root_seed, "select", round);
  out.participants = select_participants(
      cfg.n_clients, cfg.participants_per_round, select_rng);
  out.params.reserve(out.participants.size());
  double loss = 0.0;
  for (int id : out.participants) {
    Rng client_rng = seed_stream(root_seed, "round", round, "client", id);
    model::TrainResult result = model::local_train(
        state.global, state.client_data[static_cast<std::size_t>(id)],
        train_cfg, state.arch, client_rng);
    loss += result.mean_loss;
    out.params.push_back(std::move(result.params));
  }
  out.mean_loss = loss / static_cast<double>(out.participants.size());
  return out;
}

RoundMetrics base_metrics(int round, const TrainedRound& trained) {
  RoundMetrics m;
  m.round = round;
  m.participants = trained.participants;
  m.train_loss = trained.mean_loss;
  return m;
}

}  // namespace

RoundOutcome run_fedavg_round(const FederationState& state,
                              const FederationConfig& cfg,
                              const model::TrainConfig& train_cfg,
                              const netsim::ChannelConfig& channel,
                              std::uint64_t root_seed, int round) {
  const auto started = Clock::now();
  TrainedRound trained =
      train_participants(state, cfg, train_cfg, root_seed, round);
  const auto k = trained.participants.size();
  RoundMetrics metrics = base_metrics(round, trained);

  Rng channel_rng = seed_stream(root_seed, "channel", round);
  std::vector<bool> collected(k, false);
  std::size_t distinct = 0;
  switch (channel.mode) {
    case netsim::ChannelMode::Direct:
      std::fill(collected.begin(), collected.end(), true);
      distinct = k;
      metrics.packets_drawn = static_cast<long>(k);
      break;
    case netsim::ChannelMode::BlindBox: {
      // The server draws packets blindly, one uniform participant at a
      // time, until it holds every participant's update or the budget runs
      // out; it then averages whatever it managed to collect.
      long draws = 0;
      while (distinct < k && draws < channel.max_draws) {
        const auto pick = static_cast<std::size_t>(
            channel_rng.next_below(static_cast<std::uint64_t>(k)));
        ++draws;
        if (!collected[pick]) {
          collected[pick] = true;
          ++distinct;
        }
      }
      metrics.packets_drawn = draws;
      break;
    }
    case netsim::ChannelMode::Lossy: {
      for (std::size_t i = 0; i < k; ++i) {
        if (!channel_rng.next_bernoulli(channel.loss_prob)) {
          collected[i] = true;
          ++distinct;
        }
      }
      metrics.packets_drawn = static_cast<long>(distinct);
      break;
    }
  }
  metrics.rank_at_stop = static_cast<int>(distinct);

  RoundOutcome outcome{state.global, std::move(metrics)};
  if (distinct > 0) {
    std::vector<int> ids;
    std::vector<model::ModelParams> params;
    for (std::size_t i = 0; i < k; ++i) {
      if (!collected[i]) continue;
      ids.push_back(trained.participants[i]);
      params.push_back(std::move(trained.params[i]));
    }
    const auto weights = participant_weights(cfg, state, ids);
    outcome.global = aggregate(params, weights);
    outcome.metrics.decode_success = true;
  }
  if (state.test_data != nullptr) {
    outcome.metrics.test_accuracy =
        model::evaluate(outcome.global, *state.test_data, state.arch);
  }
  outcome.metrics.wallclock_ms =
      std::chrono::duration<double, std::milli>(Clock::now() - started)
          .count();
  return outcome;
}

RoundOutcome run_fednc_round(const FederationState& state,
                             const FederationConfig& cfg,
                             const model::TrainConfig& train_cfg,
                             const netsim::ChannelConfig& channel,
                             std::uint64_t root_seed, int round) {
  const auto started = Clock::now();
  TrainedRound trained =
      train_participants(state, cfg, train_cfg, root_seed, round);
  const auto k = trained.participants.size();
  RoundMetrics metrics = base_metrics(round, trained);

  const gf::Field& field = gf::Field::of(cfg.field_width);
  std::vector<codec::Packet> packets;
  packets.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    packets.push_back(model::params_to_packet(
        trained.params[i],
        static_cast<std::uint32_t>(trained.participants[i]),
        static_cast<std::uint32_t>(round)));
  }

  Rng coding_rng = seed_stream(root_seed, "coding", round);
  Rng channel_rng = seed_stream(root_seed, "channel", round);
  codec::DecoderState decoder(k, field, static_cast<std::uint32_t>(round));

  auto fresh_coded = [&]() {
    return codec::encode(packets, codec::random_coding_vector(k, field,
                                                              coding_rng),
                         field);
  };

  long received = 0;
  switch (channel.mode) {
    case netsim::ChannelMode::Direct: {
      const long n = static_cast<long>(k) + channel.redundancy;
      for (long i = 0; i < n; ++i) {
        decoder.absorb(fresh_coded());
        ++received;
      }
      break;
    }
    case netsim::ChannelMode::Lossy: {
      std::vector<codec::CodedPacket> coded;
      const long n = static_cast<long>(k) + channel.redundancy;
      coded.reserve(static_cast<std::size_t>(n));
      for (long i = 0; i < n; ++i) coded.push_back(fresh_coded());
      auto delivered =
          netsim::transmit_lossy(std::move(coded), channel.loss_prob,
                                 channel_rng);
      for (const auto& cp : delivered) {
        decoder.absorb(cp);
        ++received;
      }
      break;
    }
    case netsim::ChannelMode::BlindBox: {
      // Each blind draw is a freshly generated combination; the edge can
      // emit as many as the budget allows.
      while (!decoder.complete() && received < channel.max_draws) {
        decoder.absorb(fresh_coded());
        ++received;
      }
      break;
    }
  }
  metrics.packets_drawn = received;
  metrics.rank_at_stop = static_cast<int>(decoder.rank());

  RoundOutcome outcome{state.global, std::move(metrics)};
  if (decoder.complete()) {
    const std::vector<codec::Packet> recovered = decoder.extract();
    std::vector<model::ModelParams> params;
    params.reserve(k);
    for (const auto& packet : recovered) {
      params.push_back(model::packet_to_params(packet, state.arch));
    }
    const auto weights =
        participant_weights(cfg, state, trained.participants);
    outcome.global = aggregate(params, weights);
    outcome.metrics.decode_success = true;
  }
  if (state.test_data != nullptr) {
    outcome.metrics.test_accuracy =
        model::evaluate(outcome.global, *state.test_data, state.arch);
  }
  outcome.metrics.wallclock_ms =
      std::chrono::duration<double, std::milli>(Clock::now() - started)
          .count();
  return outcome;
}

}  // namespace fednc::federation
