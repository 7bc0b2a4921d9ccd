#include "fednc/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace fednc::config {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

long parse_long(const std::string& key, const std::string& v) {
  long out = 0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

struct KeyEntry {
  std::string section;
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<KeyEntry>& key_table() {
  static const std::vector<KeyEntry> table = [] {
    std::vector<KeyEntry> t;
    auto add = [&t](const char* section, const char* key, auto set, auto get) {
      t.push_back(KeyEntry{section, key, set, get});
    };

    add("experiment", "seed",
        [](ExperimentConfig& c, const std::string& v) {
          c.seed = parse_u64("experiment.seed", v);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.seed); });
    add("experiment", "trials",
        [](ExperimentConfig& c, const std::string& v) {
          c.trials = parse_long("experiment.trials", v);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.trials); });
    add("experiment", "output_dir",
        [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; },
        [](const ExperimentConfig& c) { return c.output_dir; });
    add("experiment", "scheme",
        [](ExperimentConfig& c, const std::string& v) {
          if (v == "fedavg") {
            c.scheme = SchemeChoice::FedAvg;
          } else if (v == "fednc") {
            c.scheme = SchemeChoice::FedNC;
          } else if (v == "both") {
            c.scheme = SchemeChoice::Both;
          } else {
            throw ConfigError("experiment.scheme: expected fedavg, fednc or "
                              "both, got '" + v + "'");
          }
        },
        [](const ExperimentConfig& c) -> std::string {
          switch (c.scheme) {
            case SchemeChoice::FedAvg: return "fedavg";
            case SchemeChoice::FedNC: return "fednc";
            default: return "both";
          }
        });

    add("data", "source",
        [](ExperimentConfig& c, const std::string& v) { c.data.source = v; },
        [](const ExperimentConfig& c) { return c.data.source; });
    add("data", "n_samples",
        [](ExperimentConfig& c, const std::string& v) {
          c.data.n_samples = static_cast<int>(parse_long("data.n_samples", v));
        },
        [](const ExperimentConfig& c) {
          return std::to_string(c.data.n_samples);
        });
    add("data", "dim",
        [](ExperimentConfig& c, const std::string& v) {
          c.data.dim = static_cast<int>(parse_long("data.dim", v));
        },
        [](const ExperimentConfig& c) { return std::to_string(c.data.dim); });
    add("data", "classes",
        [](ExperimentConfig& c, const std::string& v) {
          c.data.classes = static_cast<int>(parse_long("data.classes", v));
        },
        [](const ExperimentConfig& c) {
          return std::to_string(c.data.classes);
        });
    add("data", "blob_spread",
        [](ExperimentConfig& c, const std::string& v) {
          c.data.blob_spread = parse_double("data.blob_spread", v);
        },
        [](const ExperimentConfig& c) {
          return format_double(c.data.blob_spread);
        });
    add("data", "test_fraction",
        [](ExperimentConfig& c, const std::string& v) {
          c.data.test_fraction = parse_double("data.test_fraction", v);
        },
        [](const ExperimentConfig& c) {
          return format_double(c.data.test_fraction);
        });
    add("data", "idx_images",
        [](ExperimentConfig& c, const std::string& v) { c.data.idx_images = v; },
        [](const ExperimentConfig& c) { return c.data.idx_images; });
    add("data", "idx_labels",
        [](ExperimentConfig& c, const std::string& v) { c.data.idx_labels = v; },
        [](const ExperimentConfig& c) { return c.data.idx_labels; });
    add("data", "idx_test_images",
        [](ExperimentConfig& c, const std::string& v) {
          c.data.idx_test_images = v;
        },
        [](const ExperimentConfig& c) { return c.data.idx_test_images; });
    add("data", "idx_test_labels",
        [](ExperimentConfig& c, const std::string& v) {
          c.data.idx_test_labels = v;
        },
        [](const ExperimentConfig& c) { return c.data.idx_test_labels; });
    add("data", "idx_downsample",
        [](ExperimentConfig& c, const std::string& v) {
          c.data.idx_downsample = parse_bool("data.idx_downsample", v);
        },
        [](const ExperimentConfig& c) -> std::string {
          return c.data.idx_downsample ? "true" : "false";
        });

    add("federation", "n_clients",
        [](ExperimentConfig& c, const std::string& v) {
          c.fed.n_clients =
              static_cast<int>(parse_long("federation.n_clients", v));
        },
        [](const ExperimentConfig& c) {
          return std::to_string(c.fed.n_clients);
        });
    add("federation", "participants_per_round",
        [](ExperimentConfig& c, const std::string& v) {
          c.fed.participants_per_round = static_cast<int>(
              parse_long("federation.participants_per_round", v));
        },
        [](const ExperimentConfig& c) {
          return std::to_string(c.fed.participants_per_round);
        });
    add("federation", "rounds",
        [](ExperimentConfig& c, const std::string& v) {
          c.fed.rounds = static_cast<int>(parse_long("federation.rounds", v));
        },
        [](const ExperimentConfig& c) { return std::to_string(c.fed.rounds); });
    add("federation", "partition",
        [](ExperimentConfig& c, const std::string& v) {
          if (v == "iid") {
            c.fed.partition = federation::PartitionKind::Iid;
          } else if (v == "mixed_non_iid") {
            c.fed.partition = federation::PartitionKind::MixedNonIid;
          } else {
            throw ConfigError("federation.partition: expected iid or "
                              "mixed_non_iid, got '" + v + "'");
          }
        },
        [](const ExperimentConfig& c) -> std::string {
          return c.fed.partition == federation::PartitionKind::Iid
                     ? "iid"
                     : "mixed_non_iid";
        });
    add("federation", "shards_per_client",
        [](ExperimentConfig& c, const std::string& v) {
          c.fed.shards_per_client =
              static_cast<int>(parse_long("federation.shards_per_client", v));
        },
        [](const ExperimentConfig& c) {
          return std::to_string(c.fed.shards_per_client);
        });
    add("federation", "iid_fraction",
        [](ExperimentConfig& c, const std::string& v) {
          c.fed.iid_fraction = parse_double("federation.iid_fraction", v);
        },
        [](const ExperimentConfig& c) {
          return format_double(c.fed.iid_fraction);
        });
    add("federation", "client_weights",
        [](ExperimentConfig& c, const std::string& v) {
          c.fed.client_weights.clear();
          std::string rest = v;
          while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string item = trim(rest.substr(0, comma));
            if (!item.empty()) {
              c.fed.client_weights.push_back(
                  parse_double("federation.client_weights", item));
            }
            if (comma == std::string::npos) break;
            rest = rest.substr(comma + 1);
          }
        },
        [](const ExperimentConfig& c) {
          std::string out;
          for (std::size_t i = 0; i < c.fed.client_weights.size(); ++i) {
            if (i) out += ",";
            out += format_double(c.fed.client_weights[i]);
          }
          return out;
        });

    add("training", "arch",
        [](ExperimentConfig& c, const std::string& v) {
          if (v != "mlp" && v != "logistic") {
            throw ConfigError("training.arch: expected mlp or logistic, got '" +
                              v + "'");
          }
          c.arch = v;
        },
        [](const ExperimentConfig& c) { return c.arch; });
    add("training", "hidden_dim",
        [](ExperimentConfig& c, const std::string& v) {
          c.hidden_dim = static_cast<int>(parse_long("training.hidden_dim", v));
        },
        [](const ExperimentConfig& c) { return std::to_string(c.hidden_dim); });
    add("training", "local_epochs",
        [](ExperimentConfig& c, const std::string& v) {
          c.train.local_epochs =
              static_cast<int>(parse_long("training.local_epochs", v));
        },
        [](const ExperimentConfig& c) {
          return std::to_string(c.train.local_epochs);
        });
    add("training", "batch_size",
        [](ExperimentConfig& c, const std::string& v) {
          c.train.batch_size =
              static_cast<int>(parse_long("training.batch_size", v));
        },
        [](const ExperimentConfig& c) {
          return std::to_string(c.train.batch_size);
        });
    add("training", "learning_rate",
        [](ExperimentConfig& c, const std::string& v) {
          c.train.learning_rate =
              static_cast<float>(parse_double("training.learning_rate", v));
        },
        [](const ExperimentConfig& c) {
          return format_double(double(c.train.learning_rate));
        });
    add("training", "optimizer",
        [](ExperimentConfig& c, const std::string& v) {
          if (v == "sgd") {
            c.train.optimizer = model::Optimizer::Sgd;
          } else if (v == "adam") {
            c.train.optimizer = model::Optimizer::Adam;
          } else {
            throw ConfigError("training.optimizer: expected sgd or adam, got '" +
                              v + "'");
          }
        },
        [](const ExperimentConfig& c) -> std::string {
          return c.train.optimizer == model::Optimizer::Sgd ? "sgd" : "adam";
        });
    add("training", "adam_beta1",
        [](ExperimentConfig& c, const std::string& v) {
          c.train.adam_beta1 =
              static_cast<float>(parse_double("training.adam_beta1", v));
        },
        [](const ExperimentConfig& c) {
          return format_double(double(c.train.adam_beta1));
        });
    add("training", "adam_beta2",
        [](ExperimentConfig& c, const std::string& v) {
          c.train.adam_beta2 =
              static_cast<float>(parse_double("training.adam_beta2", v));
        },
        [](const ExperimentConfig& c) {
          return format_double(double(c.train.adam_beta2));
        });
    add("training", "adam_eps",
        [](ExperimentConfig& c, const std::string& v) {
          c.train.adam_eps =
              static_cast<float>(parse_double("training.adam_eps", v));
        },
        [](const ExperimentConfig& c) {
          return format_double(double(c.train.adam_eps));
        });

    add("coding", "field_width",
        [](ExperimentConfig& c, const std::string& v) {
          c.fed.field_width =
              static_cast<unsigned>(parse_long("coding.field_width", v));
        },
        [](const ExperimentConfig& c) {
          return std::to_string(c.fed.field_width);
        });
    add("coding", "redundancy",
        [](ExperimentConfig& c, const std::string& v) {
          c.channel.redundancy =
              static_cast<int>(parse_long("coding.redundancy", v));
        },
        [](const ExperimentConfig& c) {
          return std::to_string(c.channel.redundancy);
        });

    add("channel", "mode",
        [](ExperimentConfig& c, const std::string& v) {
          if (v == "direct") {
            c.channel.mode = netsim::ChannelMode::Direct;
          } else if (v == "blind_box") {
            c.channel.mode = netsim::ChannelMode::BlindBox;
          } else if (v == "lossy") {
            c.channel.mode = netsim::ChannelMode::Lossy;
          } else {
            throw ConfigError("channel.mode: expected direct, blind_box or "
                              "lossy, got '" + v + "'");
          }
        },
        [](const ExperimentConfig& c) -> std::string {
          switch (c.channel.mode) {
            case netsim::ChannelMode::Direct: return "direct";
            case netsim::ChannelMode::BlindBox: return "blind_box";
            default: return "lossy";
          }
        });
    add("channel", "loss_prob",
        [](ExperimentConfig& c, const std::string& v) {
          c.channel.loss_prob = parse_double("channel.loss_prob", v);
        },
        [](const ExperimentConfig& c) {
          return format_double(c.channel.loss_prob);
        });
    add("channel", "max_draws",
        [](ExperimentConfig& c, const std::string& v) {
          c.channel.max_draws =
              static_cast<int>(parse_long("channel.max_draws", v));
        },
        [](const ExperimentConfig& c) {
          return std::to_string(c.channel.max_draws);
        });
    return t;
  }();
  return table;
}

const KeyEntry* find_key(const std::string& section, const std::string& key) {
  for (const auto& entry : key_table()) {
    if (entry.section == section && entry.key == key) return &entry;
  }
  return nullptr;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(c));
  return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const KeyEntry* entry = find_key(section, key);
    if (entry == nullptr) {
      throw ConfigError("unknown key: " +
                        (section.empty() ? key : section + "." + key));
    }
    entry->set(cfg, value);
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_canonical(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& entry : key_table()) {
    if (entry.section != section) {
      if (!out.empty()) out += "\n";
      out += "[" + entry.section + "]\n";
      section = entry.section;
    }
    out += entry.key + " = " + entry.get(cfg) + "\n";
  }
  return out;
}

void apply_env_overrides(ExperimentConfig& cfg) {
  for (const auto& entry : key_table()) {
    const std::string name =
        "FEDNC_" + upper(entry.section) + "_" + upper(entry.key);
    if (const char* v = std::getenv(name.c_str())) {
      entry.set(cfg, v);
    }
  }
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("experiment.trials: must be >= 1");
  if (cfg.output_dir.empty()) {
    throw ConfigError("experiment.output_dir: must not be empty");
  }
  if (cfg.data.source != "blobs" && cfg.data.source != "idx") {
    throw ConfigError("data.source: expected blobs or idx");
  }
  if (cfg.data.source == "blobs") {
    if (cfg.data.n_samples < 2) throw ConfigError("data.n_samples: too small");
    if (cfg.data.dim < 1) throw ConfigError("data.dim: must be >= 1");
    if (cfg.data.classes < 2) throw ConfigError("data.classes: must be >= 2");
    if (!(cfg.data.test_fraction > 0.0 && cfg.data.test_fraction < 1.0)) {
      throw ConfigError("data.test_fraction: must lie in (0, 1)");
    }
  } else {
    if (cfg.data.idx_images.empty() || cfg.data.idx_labels.empty() ||
        cfg.data.idx_test_images.empty() || cfg.data.idx_test_labels.empty()) {
      throw ConfigError("data.idx_images: idx source needs all four paths");
    }
  }
  if (cfg.fed.n_clients < 1) {
    throw ConfigError("federation.n_clients: must be >= 1");
  }
  if (cfg.fed.participants_per_round < 1 ||
      cfg.fed.participants_per_round > cfg.fed.n_clients) {
    throw ConfigError(
        "federation.participants_per_round: must lie in [1, n_clients]");
  }
  if (cfg.fed.rounds < 1) throw ConfigError("federation.rounds: must be >= 1");
  if (cfg.fed.shards_per_client < 1) {
    throw ConfigError("federation.shards_per_client: must be >= 1");
  }
  if (!(cfg.fed.iid_fraction >= 0.0 && cfg.fed.iid_fraction <= 1.0)) {
    throw ConfigError("federation.iid_fraction: must lie in [0, 1]");
  }
  if (!cfg.fed.client_weights.empty()) {
    if (static_cast<int>(cfg.fed.client_weights.size()) != cfg.fed.n_clients) {
      throw ConfigError("federation.client_weights: need one weight per client");
    }
    double sum = 0.0;
    for (double w : cfg.fed.client_weights) {
      if (!(w >= 0.0)) {
        throw ConfigError("federation.client_weights: must be non-negative");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("federation.client_weights: must sum to 1");
    }
  }
  if (cfg.hidden_dim < 1) throw ConfigError("training.hidden_dim: must be >= 1");
  if (cfg.train.local_epochs < 1) {
    throw ConfigError("training.local_epochs: must be >= 1");
  }
  if (cfg.train.batch_size < 1) {
    throw ConfigError("training.batch_size: must be >= 1");
  }
  if (!(cfg.train.learning_rate > 0.0f)) {
    throw ConfigError("training.learning_rate: must be positive");
  }
  const unsigned s = cfg.fed.field_width;
  if (s != 1 && s != 2 && s != 4 && s != 8 && s != 16) {
    throw ConfigError("coding.field_width: must be one of 1, 2, 4, 8, 16");
  }
  if (cfg.channel.redundancy < 0) {
    throw ConfigError("coding.redundancy: must be >= 0");
  }
  if (!(cfg.channel.loss_prob >= 0.0 && cfg.channel.loss_prob < 1.0)) {
    throw ConfigError("channel.loss_prob: must lie in [0, 1)");
  }
  if (cfg.channel.max_draws < cfg.fed.participants_per_round) {
    throw ConfigError("channel.max_draws: must be >= participants_per_round");
  }
}

}  // namespace fednc::config
