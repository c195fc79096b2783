#include "chal/config.hpp"

#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "chal/ioutil.hpp"

namespace chal {

namespace {

struct Field {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

std::uint64_t parse_u64(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("not a nonnegative integer: '" + s + "'");
  }
  return std::stoull(s);
}

bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument("not a boolean: '" + s + "'");
}

const char* bool_text(bool v) { return v ? "true" : "false"; }

std::string seeds_text(const std::vector<std::uint64_t>& seeds) {
  std::ostringstream os;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    os << (i == 0 ? "" : ",") << seeds[i];
  }
  return os.str();
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::istringstream is(s);
  std::string field;
  while (std::getline(is, field, ',')) {
    out.push_back(parse_u64(field));
  }
  if (out.empty()) {
    throw std::invalid_argument("seed list is empty");
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

#define STR_FIELD(key, expr)                                        \
  Field{key, [](const ExperimentConfig& c) { return c.expr; },      \
        [](ExperimentConfig& c, const std::string& v) { c.expr = v; }}
#define SIZE_FIELD(key, expr)                                              \
  Field{key,                                                               \
        [](const ExperimentConfig& c) { return std::to_string(c.expr); }, \
        [](ExperimentConfig& c, const std::string& v) {                    \
          c.expr = static_cast<std::size_t>(parse_u64(v));                 \
        }}
#define U64_FIELD(key, expr)                                               \
  Field{key,                                                               \
        [](const ExperimentConfig& c) { return std::to_string(c.expr); }, \
        [](ExperimentConfig& c, const std::string& v) {                    \
          c.expr = parse_u64(v);                                           \
        }}
#define DOUBLE_FIELD(key, expr)                                            \
  Field{key,                                                               \
        [](const ExperimentConfig& c) { return format_double(c.expr); },  \
        [](ExperimentConfig& c, const std::string& v) {                    \
          c.expr = parse_double(v);                                        \
        }}
#define BOOL_FIELD(key, expr)                                             \
  Field{key,                                                              \
        [](const ExperimentConfig& c) { return bool_text(c.expr); },      \
        [](ExperimentConfig& c, const std::string& v) {                   \
          c.expr = parse_bool(v);                                         \
        }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      STR_FIELD("data.kind", data_kind),
      STR_FIELD("data.idx.train_images", idx_train_images),
      STR_FIELD("data.idx.train_labels", idx_train_labels),
      STR_FIELD("data.idx.test_images", idx_test_images),
      STR_FIELD("data.idx.test_labels", idx_test_labels),
      SIZE_FIELD("data.synth.classes", synth_classes),
      SIZE_FIELD("data.synth.per_class", synth_per_class),
      SIZE_FIELD("data.synth.test_per_class", synth_test_per_class),
      SIZE_FIELD("data.synth.dim", synth_dim),
      DOUBLE_FIELD("data.synth.separation", synth_separation),
      U64_FIELD("data.synth.seed", synth_seed),
      SIZE_FIELD("data.tiny.per_class", tiny_per_class),
      U64_FIELD("data.tiny.seed", tiny_seed),
      STR_FIELD("architecture", architecture),
      SIZE_FIELD("train.steps", train.steps),
      SIZE_FIELD("train.batch_size", train.batch_size),
      DOUBLE_FIELD("adam.lr", train.adam.lr),
      DOUBLE_FIELD("adam.beta1", train.adam.beta1),
      DOUBLE_FIELD("adam.beta2", train.adam.beta2),
      DOUBLE_FIELD("adam.eps", train.adam.eps),
      DOUBLE_FIELD("challenger.alpha", train.challenger.alpha),
      DOUBLE_FIELD("challenger.beta", train.challenger.beta),
      // "auto" keeps the ceil(0.05 * D) default
      Field{"challenger.n_features",
            [](const ExperimentConfig& c) {
              return c.train.challenger.n_features.has_value()
                         ? std::to_string(*c.train.challenger.n_features)
                         : std::string("auto");
            },
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "auto") {
                c.train.challenger.n_features.reset();
              } else {
                c.train.challenger.n_features =
                    static_cast<std::size_t>(parse_u64(v));
              }
            }},
      SIZE_FIELD("challenger.top_k", train.challenger.top_k),
      DOUBLE_FIELD("challenger.split.challenge_a",
                   train.challenger.split.challenge_a),
      DOUBLE_FIELD("challenger.split.challenge_b",
                   train.challenger.split.challenge_b),
      DOUBLE_FIELD("challenger.split.unmodified",
                   train.challenger.split.unmodified),
      DOUBLE_FIELD("challenger.epsilon", train.challenger.epsilon_rule.epsilon),
      BOOL_FIELD("challenger.sign_stabilization",
                 train.challenger.epsilon_rule.sign_stabilization),
      BOOL_FIELD("challenger.seed_from_softmax",
                 train.challenger.epsilon_rule.seed_from_softmax),
      BOOL_FIELD("challenger.clip_to_input_range",
                 train.challenger.clip_to_input_range),
      DOUBLE_FIELD("adversarial.eps", train.adversarial.eps),
      DOUBLE_FIELD("adversarial.pgd_step", train.adversarial.pgd_step),
      SIZE_FIELD("adversarial.pgd_iters", train.adversarial.pgd_iters),
      Field{"seeds",
            [](const ExperimentConfig& c) { return seeds_text(c.seeds); },
            [](ExperimentConfig& c, const std::string& v) {
              c.seeds = parse_seeds(v);
            }},
      SIZE_FIELD("metrics.ece_bins", ece_bins),
      STR_FIELD("output.dir", out_dir),
  };
  return table;
}

#undef STR_FIELD
#undef SIZE_FIELD
#undef U64_FIELD
#undef DOUBLE_FIELD
#undef BOOL_FIELD

}  // namespace

void ExperimentConfig::validate() const {
  if (data_kind != "idx" && data_kind != "synth") {
    throw std::invalid_argument("config: data.kind must be idx or synth, got '" +
                                data_kind + "'");
  }
  if (data_kind == "idx" &&
      (idx_train_images.empty() || idx_train_labels.empty() ||
       idx_test_images.empty() || idx_test_labels.empty())) {
    throw std::invalid_argument("config: data.kind = idx needs all four "
                                "data.idx.* paths");
  }
  if (architecture.empty()) {
    throw std::invalid_argument("config: architecture is empty");
  }
  if (seeds.empty()) {
    throw std::invalid_argument("config: no seeds");
  }
  if (train.steps == 0 || train.batch_size == 0) {
    throw std::invalid_argument("config: train.steps and train.batch_size "
                                "must be >= 1");
  }
  if (ece_bins == 0) {
    throw std::invalid_argument("config: metrics.ece_bins must be >= 1");
  }
}

std::string to_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  for (const Field& f : fields()) {
    os << f.key << " = " << f.get(cfg) << "\n";
  }
  return os.str();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field* field = nullptr;
    for (const Field& f : fields()) {
      if (key == f.key) {
        field = &f;
        break;
      }
    }
    if (field == nullptr) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": duplicate key '" + key + "'");
    }
    try {
      field->set(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  try {
    return parse_config(read_text_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  write_text_file(path, to_text(cfg));
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string text = to_text(cfg);
  std::uint64_t h = 14695981039346656037ULL;
  for (const char ch : text) {
    h ^= static_cast<std::uint8_t>(ch);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace chal
