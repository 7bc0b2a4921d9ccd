#pragma once

// Experiment configuration: flat `key = value` lines under [section]
// headers, no nesting. Parsing, canonical serialization, and FEDNC_*
// environment overrides all run off one key table, so a parsed config
// re-serializes into the documented canonical form.

#include <cstdint>
#include <stdexcept>
#include <string>

#include "fednc/federation.hpp"
#include "fednc/model.hpp"
#include "fednc/netsim.hpp"

namespace fednc::config {

// What the offending key was is part of the message ("section.key: ...").
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class SchemeChoice { FedAvg, FedNC, Both };

struct DataConfig {
  std::string source = "blobs";  // blobs | idx
  int n_samples = 4000;
  int dim = 32;
  int classes = 10;
  double blob_spread = 1.0;
  double test_fraction = 0.2;
  std::string idx_images;
  std::string idx_labels;
  std::string idx_test_images;
  std::string idx_test_labels;
  bool idx_downsample = true;
};

struct ExperimentConfig {
  // [experiment]
  std::uint64_t seed = 42;
  long trials = 100000;
  std::string output_dir = "out";
  SchemeChoice scheme = SchemeChoice::Both;
  // [data]
  DataConfig data;
  // [federation]
  federation::FederationConfig fed;
  // [training]
  std::string arch = "mlp";  // mlp | logistic
  int hidden_dim = 32;
  model::TrainConfig train;
  // [channel] (+ redundancy under [coding])
  netsim::ChannelConfig channel;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Canonical form: fixed section and key order, shortest round-trip number
// formatting. serialize(parse(serialize(c))) == serialize(c).
std::string serialize_canonical(const ExperimentConfig& cfg);

// FEDNC_<SECTION>_<KEY> environment variables override file values.
void apply_env_overrides(ExperimentConfig& cfg);

// Cross-field invariants; throws ConfigError naming the key.
void validate(const ExperimentConfig& cfg);

}  // namespace fednc::config
