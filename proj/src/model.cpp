#include "fednc/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace fednc::model {

namespace {

struct Layout {
  // Offsets into the flat parameter vector.
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;
};

Layout layout_of(const Architecture& arch) {
  Layout l;
  if (arch.kind == ArchKind::Mlp) {
    const auto in = static_cast<std::size_t>(arch.input_dim);
    const auto h = static_cast<std::size_t>(arch.hidden_dim);
    const auto c = static_cast<std::size_t>(arch.n_classes);
    l.w1 = 0;
    l.b1 = h * in;
    l.w2 = l.b1 + h;
    l.b2 = l.w2 + c * h;
    l.total = l.b2 + c;
  } else {
    const auto in = static_cast<std::size_t>(arch.input_dim);
    const auto c = static_cast<std::size_t>(arch.n_classes);
    l.w1 = 0;  // unused
    l.b1 = 0;
    l.w2 = 0;  // W
    l.b2 = c * in;
    l.total = l.b2 + c;
  }
  return l;
}

void check_shape(const ModelParams& w, const Architecture& arch) {
  if (w.shape_tag != arch.tag() || w.values.size() != arch.param_count()) {
    throw ShapeMismatchError("parameters of shape '" + w.shape_tag +
                             "' do not fit architecture '" + arch.tag() + "'");
  }
}

void check_dataset(const Dataset& data, const Architecture& arch) {
  if (data.size() == 0) throw EmptyDatasetError();
  if (static_cast<int>(data.features.front().size()) != arch.input_dim) {
    throw ShapeMismatchError("feature dimension does not match architecture");
  }
}

// Logits for one sample; returns hidden pre-activations too when the
// architecture has a hidden layer.
void forward(const Architecture& arch, std::span<const float> w,
             std::span<const float> x, std::vector<double>& z1,
             std::vector<double>& logits) {
  const Layout l = layout_of(arch);
  const int c = arch.n_classes;
  logits.assign(static_cast<std::size_t>(c), 0.0);
  if (arch.kind == ArchKind::Mlp) {
    const int in = arch.input_dim;
    const int h = arch.hidden_dim;
    z1.assign(static_cast<std::size_t>(h), 0.0);
    for (int i = 0; i < h; ++i) {
      double acc = w[l.b1 + static_cast<std::size_t>(i)];
      const std::size_t row = l.w1 + static_cast<std::size_t>(i) *
                                         static_cast<std::size_t>(in);
      for (int j = 0; j < in; ++j) acc += double(w[row + j]) * x[j];
      z1[static_cast<std::size_t>(i)] = acc;
    }
    for (int k = 0; k < c; ++k) {
      double acc = w[l.b2 + static_cast<std::size_t>(k)];
      const std::size_t row = l.w2 + static_cast<std::size_t>(k) *
                                         static_cast<std::size_t>(h);
      for (int i = 0; i < h; ++i) {
        const double a = std::max(z1[static_cast<std::size_t>(i)], 0.0);
        acc += double(w[row + i]) * a;
      }
      logits[static_cast<std::size_t>(k)] = acc;
    }
  } else {
    const int in = arch.input_dim;
    for (int k = 0; k < c; ++k) {
      double acc = w[l.b2 + static_cast<std::size_t>(k)];
      const std::size_t row = static_cast<std::size_t>(k) *
                              static_cast<std::size_t>(in);
      for (int j = 0; j < in; ++j) acc += double(w[row + j]) * x[j];
      logits[static_cast<std::size_t>(k)] = acc;
    }
  }
}

// Stable softmax cross-entropy; fills class probabilities.
double softmax_loss(std::span<const double> logits, int label,
                    std::vector<double>& probs) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  probs.assign(logits.size(), 0.0);
  for (std::size_t k = 0; k < logits.size(); ++k) {
    probs[k] = std::exp(logits[k] - peak);
    denom += probs[k];
  }
  for (auto& p : probs) p /= denom;
  return std::log(denom) + peak - logits[static_cast<std::size_t>(label)];
}

// Accumulates the gradient of one sample's loss into grad (not averaged).
double backward(const Architecture& arch, std::span<const float> w,
                std::span<const float> x, int label,
                std::vector<double>& grad, std::vector<double>& z1,
                std::vector<double>& logits, std::vector<double>& probs) {
  const Layout l = layout_of(arch);
  forward(arch, w, x, z1, logits);
  const double loss = softmax_loss(logits, label, probs);
  const int c = arch.n_classes;
  for (int k = 0; k < c; ++k) {
    probs[static_cast<std::size_t>(k)] -= (k == label) ? 1.0 : 0.0;
  }
  if (arch.kind == ArchKind::Mlp) {
    const int in = arch.input_dim;
    const int h = arch.hidden_dim;
    for (int k = 0; k < c; ++k) {
      const double dz2 = probs[static_cast<std::size_t>(k)];
      const std::size_t row = l.w2 + static_cast<std::size_t>(k) *
                                         static_cast<std::size_t>(h);
      for (int i = 0; i < h; ++i) {
        grad[row + i] += dz2 * std::max(z1[static_cast<std::size_t>(i)], 0.0);
      }
      grad[l.b2 + static_cast<std::size_t>(k)] += dz2;
    }
    for (int i = 0; i < h; ++i) {
      if (z1[static_cast<std::size_t>(i)] <= 0.0) continue;
      double da = 0.0;
      for (int k = 0; k < c; ++k) {
        da += probs[static_cast<std::size_t>(k)] *
              double(w[l.w2 + static_cast<std::size_t>(k) *
                                   static_cast<std::size_t>(h) +
                       static_cast<std::size_t>(i)]);
      }
      const std::size_t row = l.w1 + static_cast<std::size_t>(i) *
                                         static_cast<std::size_t>(in);
      for (int j = 0; j < in; ++j) grad[row + j] += da * x[j];
      grad[l.b1 + static_cast<std::size_t>(i)] += da;
    }
  } else {
    const int in = arch.input_dim;
    for (int k = 0; k < c; ++k) {
      const double dz = probs[static_cast<std::size_t>(k)];
      const std::size_t row = static_cast<std::size_t>(k) *
                              static_cast<std::size_t>(in);
      for (int j = 0; j < in; ++j) grad[row + j] += dz * x[j];
      grad[l.b2 + static_cast<std::size_t>(k)] += dz;
    }
  }
  return loss;
}

}  // namespace

std::size_t Architecture::param_count() const { return layout_of(*this).total; }

std::string Architecture::tag() const {
  if (kind == ArchKind::Mlp) {
    return "mlp-" + std::to_string(input_dim) + "x" +
           std::to_string(hidden_dim) + "x" + std::to_string(n_classes);
  }
  return "logistic-" + std::to_string(input_dim) + "x" +
         std::to_string(n_classes);
}

Dataset Dataset::subset(std::span<const int> indices) const {
  Dataset out;
  out.n_classes = n_classes;
  out.features.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (int i : indices) {
    out.features.push_back(features[static_cast<std::size_t>(i)]);
    out.labels.push_back(labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

ModelParams init_model(const Architecture& arch, Rng& rng) {
  ModelParams params;
  params.shape_tag = arch.tag();
  params.values.assign(arch.param_count(), 0.0f);
  const Layout l = layout_of(arch);

  auto fill_glorot = [&](std::size_t at, int rows, int cols) {
    // Uniform on [-a, a] with a^2/3 = 2/(fan_in + fan_out).
    const double a = std::sqrt(6.0 / (rows + cols));
    const std::size_t n = static_cast<std::size_t>(rows) *
                          static_cast<std::size_t>(cols);
    for (std::size_t i = 0; i < n; ++i) {
      params.values[at + i] =
          static_cast<float>(a * (2.0 * rng.next_real() - 1.0));
    }
  };

  if (arch.kind == ArchKind::Mlp) {
    fill_glorot(l.w1, arch.hidden_dim, arch.input_dim);
    fill_glorot(l.w2, arch.n_classes, arch.hidden_dim);
  } else {
    fill_glorot(0, arch.n_classes, arch.input_dim);
  }
  return params;
}

TrainResult local_train(const ModelParams& w, const Dataset& data,
                        const TrainConfig& cfg, const Architecture& arch,
                        Rng& rng) {
  check_shape(w, arch);
  check_dataset(data, arch);
  if (cfg.local_epochs < 1 || cfg.batch_size < 1) {
    throw std::invalid_argument("local_epochs and batch_size must be >= 1");
  }
  if (!(cfg.learning_rate >= 0.0f)) {
    throw std::invalid_argument("learning rate must be non-negative");
  }

  const std::size_t n_params = arch.param_count();
  TrainResult result;
  result.params = w;
  std::vector<float>& params = result.params.values;

  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> grad(n_params, 0.0);
  std::vector<double> z1, logits, probs;
  std::vector<double> adam_m, adam_v;
  if (cfg.optimizer == Optimizer::Adam) {
    adam_m.assign(n_params, 0.0);
    adam_v.assign(n_params, 0.0);
  }
  long adam_t = 0;

  const double lr = cfg.learning_rate;
  for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const int idx = order[i];
        batch_loss += backward(arch, params,
                               data.features[static_cast<std::size_t>(idx)],
                               data.labels[static_cast<std::size_t>(idx)],
                               grad, z1, logits, probs);
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      batch_loss *= scale;
      epoch_loss += batch_loss;
      ++n_batches;

      if (cfg.optimizer == Optimizer::Sgd) {
        for (std::size_t i = 0; i < n_params; ++i) {
          params[i] = static_cast<float>(params[i] - lr * (grad[i] * scale));
        }
      } else {
        ++adam_t;
        const double b1 = cfg.adam_beta1;
        const double b2 = cfg.adam_beta2;
        const double corr1 = 1.0 - std::pow(b1, static_cast<double>(adam_t));
        const double corr2 = 1.0 - std::pow(b2, static_cast<double>(adam_t));
        for (std::size_t i = 0; i < n_params; ++i) {
          const double g = grad[i] * scale;
          adam_m[i] = b1 * adam_m[i] + (1.0 - b1) * g;
          adam_v[i] = b2 * adam_v[i] + (1.0 - b2) * g * g;
          const double step = lr * (adam_m[i] / corr1) /
                              (std::sqrt(adam_v[i] / corr2) + cfg.adam_eps);
          params[i] = static_cast<float>(params[i] - step);
        }
      }
    }
    result.mean_loss = epoch_loss / static_cast<double>(n_batches);
  }
  return result;
}

double evaluate(const ModelParams& w, const Dataset& data,
                const Architecture& arch) {
  check_shape(w, arch);
  check_dataset(data, arch);
  std::vector<double> z1, logits;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward(arch, w.values, data.features[i], z1, logits);
    int best = 0;
    for (int k = 1; k < arch.n_classes; ++k) {
      if (logits[static_cast<std::size_t>(k)] >
          logits[static_cast<std::size_t>(best)]) {
        best = k;
      }
    }
    if (best == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double mean_loss(const ModelParams& w, const Dataset& data,
                 const Architecture& arch) {
  check_shape(w, arch);
  check_dataset(data, arch);
  std::vector<double> z1, logits, probs;
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward(arch, w.values, data.features[i], z1, logits);
    total += softmax_loss(logits, data.labels[i], probs);
  }
  return total / static_cast<double>(data.size());
}

std::vector<double> loss_gradient(const ModelParams& w, const Dataset& data,
                                  std::span<const int> batch,
                                  const Architecture& arch) {
  check_shape(w, arch);
  check_dataset(data, arch);
  std::vector<double> grad(arch.param_count(), 0.0);
  std::vector<double> z1, logits, probs;
  for (int idx : batch) {
    backward(arch, w.values, data.features[static_cast<std::size_t>(idx)],
             data.labels[static_cast<std::size_t>(idx)], grad, z1, logits,
             probs);
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grad) g *= scale;
  return grad;
}

codec::Packet params_to_packet(const ModelParams& w, std::uint32_t origin_id,
                               std::uint32_t generation) {
  codec::Packet packet;
  packet.origin_id = origin_id;
  packet.generation = generation;
  packet.payload.reserve(w.values.size() * 4);
  for (float v : w.values) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    packet.payload.push_back(static_cast<std::uint8_t>(bits & 0xFF));
    packet.payload.push_back(static_cast<std::uint8_t>((bits >> 8) & 0xFF));
    packet.payload.push_back(static_cast<std::uint8_t>((bits >> 16) & 0xFF));
    packet.payload.push_back(static_cast<std::uint8_t>((bits >> 24) & 0xFF));
  }
  return packet;
}

ModelParams packet_to_params(const codec::Packet& packet,
                             const Architecture& arch) {
  const std::size_t expected = arch.param_count() * 4;
  if (packet.payload.size() != expected) {
    throw SizeMismatchError("payload of " +
                            std::to_string(packet.payload.size()) +
                            " bytes does not hold " + arch.tag());
  }
  ModelParams params;
  params.shape_tag = arch.tag();
  params.values.reserve(arch.param_count());
  for (std::size_t i = 0; i < packet.payload.size(); i += 4) {
    const std::uint32_t bits =
        static_cast<std::uint32_t>(packet.payload[i]) |
        (static_cast<std::uint32_t>(packet.payload[i + 1]) << 8) |
        (static_cast<std::uint32_t>(packet.payload[i + 2]) << 16) |
        (static_cast<std::uint32_t>(packet.payload[i + 3]) << 24);
    params.values.push_back(std::bit_cast<float>(bits));
  }
  return params;
}

Dataset make_blobs(int n_samples, int dim, int n_classes, double spread,
                   Rng& rng) {
  if (n_samples < 1 || dim < 1 || n_classes < 1) {
    throw std::invalid_argument("blob generator needs positive sizes");
  }
  std::vector<std::vector<double>> centers(
      static_cast<std::size_t>(n_classes));
  for (auto& center : centers) {
    center.resize(static_cast<std::size_t>(dim));
    for (auto& x : center) x = spread * rng.next_gaussian();
  }
  Dataset data;
  data.n_classes = n_classes;
  data.features.resize(static_cast<std::size_t>(n_samples));
  data.labels.resize(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const int label = i % n_classes;
    auto& row = data.features[static_cast<std::size_t>(i)];
    row.resize(static_cast<std::size_t>(dim));
    const auto& center = centers[static_cast<std::size_t>(label)];
    for (int j = 0; j < dim; ++j) {
      row[static_cast<std::size_t>(j)] = static_cast<float>(
          center[static_cast<std::size_t>(j)] + rng.next_gaussian());
    }
    data.labels[static_cast<std::size_t>(i)] = label;
  }
  // Shuffle sample order; labels stay paired with their features.
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  return data.subset(order);
}

}  // namespace fednc::model
