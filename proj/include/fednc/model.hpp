#pragma once

// Desk-scale classifier used as the federated workload: a small MLP (or a
// logistic-regression head for convex sanity runs) with softmax
// cross-entropy, trained by mini-batch SGD or Adam. Parameters serialize
// losslessly to packets so the coding path stays bit-exact.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fednc/codec.hpp"
#include "fednc/rng.hpp"

namespace fednc::model {

struct ShapeMismatchError : std::invalid_argument {
  explicit ShapeMismatchError(const std::string& what)
      : std::invalid_argument(what) {}
};

struct EmptyDatasetError : std::invalid_argument {
  EmptyDatasetError() : std::invalid_argument("dataset is empty") {}
};

struct SizeMismatchError : std::invalid_argument {
  explicit SizeMismatchError(const std::string& what)
      : std::invalid_argument(what) {}
};

enum class ArchKind { Mlp, Logistic };

// Parameter layout is fixed and documented by param_count():
//   Mlp:      W1 (hidden x in, row-major), b1, W2 (classes x hidden), b2
//   Logistic: W (classes x in, row-major), b
struct Architecture {
  ArchKind kind = ArchKind::Mlp;
  int input_dim = 32;
  int hidden_dim = 32;
  int n_classes = 10;

  static Architecture mlp(int input_dim, int hidden_dim, int n_classes) {
    return Architecture{ArchKind::Mlp, input_dim, hidden_dim, n_classes};
  }
  static Architecture logistic(int input_dim, int n_classes) {
    return Architecture{ArchKind::Logistic, input_dim, 0, n_classes};
  }

  std::size_t param_count() const;
  std::string tag() const;
  bool operator==(const Architecture&) const = default;
};

struct ModelParams {
  std::vector<float> values;
  std::string shape_tag;
};

struct Dataset {
  std::vector<std::vector<float>> features;
  std::vector<int> labels;
  int n_classes = 0;

  std::size_t size() const { return features.size(); }
  Dataset subset(std::span<const int> indices) const;
};

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  int local_epochs = 5;
  int batch_size = 32;
  float learning_rate = 0.05f;
  Optimizer optimizer = Optimizer::Sgd;
  float adam_beta1 = 0.9f;
  float adam_beta2 = 0.999f;
  float adam_eps = 1e-8f;
};

// Glorot-uniform weights, zero biases.
ModelParams init_model(const Architecture& arch, Rng& rng);

struct TrainResult {
  ModelParams params;
  double mean_loss = 0.0;  // mean batch loss of the final epoch
};

// local_epochs passes of mini-batch training; the input parameters are not
// mutated and the result is a function of (w, data, cfg, rng seed) only.
TrainResult local_train(const ModelParams& w, const Dataset& data,
                        const TrainConfig& cfg, const Architecture& arch,
                        Rng& rng);

// Fraction of argmax-correct predictions; ties break toward the lowest
// class index.
double evaluate(const ModelParams& w, const Dataset& data,
                const Architecture& arch);

// Mean softmax cross-entropy over the dataset.
double mean_loss(const ModelParams& w, const Dataset& data,
                 const Architecture& arch);

// Analytic loss gradient on a sample batch (exposed for the
// finite-difference checks).
std::vector<double> loss_gradient(const ModelParams& w, const Dataset& data,
                                  std::span<const int> batch,
                                  const Architecture& arch);

// Little-endian IEEE-754 single precision, fixed parameter order; exact bit
// round trip including NaN payloads.
codec::Packet params_to_packet(const ModelParams& w, std::uint32_t origin_id,
                               std::uint32_t generation);
ModelParams packet_to_params(const codec::Packet& packet,
                             const Architecture& arch);

// Balanced synthetic classification data: Gaussian class centers of scale
// `spread` with unit-variance noise.
Dataset make_blobs(int n_samples, int dim, int n_classes, double spread,
                   Rng& rng);

}  // namespace fednc::model
