#include "docaff/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "docaff/text_rules.hpp"

namespace docaff {

namespace {

double parse_double(std::string_view key, std::string_view value) {
  const std::string s(value);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("invalid number for " + std::string(key) + ": '" + s + "'", std::string(key));
}

long long parse_int(std::string_view key, std::string_view value) {
  long long v = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError("invalid integer for " + std::string(key) + ": '" + std::string(value) + "'",
                          std::string(key));
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ValidationError("invalid flag for " + std::string(key) + ": '" + std::string(value) + "'", std::string(key));
}

struct Field {
  std::function<void(PipelineConfig&, std::string_view key, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <typename T>
std::string show(const T& v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

#define DOCAFF_DOUBLE(path)                                                                          \
  Field {                                                                                            \
    [](PipelineConfig& c, std::string_view k, std::string_view v) { c.path = parse_double(k, v); }, \
        [](const PipelineConfig& c) { return show(c.path); }                                         \
  }
#define DOCAFF_INT(path)                                                                                    \
  Field {                                                                                                   \
    [](PipelineConfig& c, std::string_view k, std::string_view v) {                                        \
      c.path = static_cast<decltype(c.path)>(parse_int(k, v));                                             \
    },                                                                                                      \
        [](const PipelineConfig& c) { return show(c.path); }                                                \
  }
#define DOCAFF_BOOL(path)                                                                          \
  Field {                                                                                          \
    [](PipelineConfig& c, std::string_view k, std::string_view v) { c.path = parse_bool(k, v); }, \
        [](const PipelineConfig& c) { return std::string(c.path ? "true" : "false"); }             \
  }

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = {
      {"seed", Field{[](PipelineConfig& c, std::string_view k, std::string_view v) {
                       c.set_seed(static_cast<std::uint64_t>(parse_int(k, v)));
                     },
                     [](const PipelineConfig& c) { return show(c.seed); }}},
      {"lines.threshold", DOCAFF_DOUBLE(lines.threshold)},
      {"lines.overlap_min", DOCAFF_DOUBLE(lines.overlap_min)},
      {"features.style_dim", DOCAFF_INT(features.style_dim)},
      {"features.content_dim", DOCAFF_INT(features.content_dim)},
      {"features.font_families", DOCAFF_INT(features.font_families)},
      {"features.noise_std", DOCAFF_DOUBLE(features.noise_std)},
      {"features.use_external_features", DOCAFF_BOOL(features.use_external_features)},
      {"constraints.k", DOCAFF_INT(constraints.k)},
      {"constraints.height_ratio_max", DOCAFF_DOUBLE(constraints.height_ratio_max)},
      {"constraints.must_link_cap", DOCAFF_INT(constraints.must_link_cap)},
      {"constraints.must_fraction", DOCAFF_DOUBLE(constraints.must_fraction)},
      {"constraints.sample", DOCAFF_BOOL(constraints.sample)},
      {"train.epochs", DOCAFF_INT(train.epochs)},
      {"train.batch_size", DOCAFF_INT(train.batch_size)},
      {"train.learning_rate", DOCAFF_DOUBLE(train.learning_rate)},
      {"train.dropout", DOCAFF_DOUBLE(train.dropout)},
      {"train.grad_clip_norm", DOCAFF_DOUBLE(train.grad_clip_norm)},
      {"train.init_std", DOCAFF_DOUBLE(train.init_std)},
      {"train.beta1", DOCAFF_DOUBLE(train.beta1)},
      {"train.beta2", DOCAFF_DOUBLE(train.beta2)},
      {"train.adam_eps", DOCAFF_DOUBLE(train.adam_eps)},
      {"train.hidden1", DOCAFF_INT(train.hidden1)},
      {"train.hidden2", DOCAFF_INT(train.hidden2)},
      {"train.latent_dim", DOCAFF_INT(train.latent_dim)},
      {"cluster.likelihood_min", DOCAFF_DOUBLE(cluster.likelihood_min)},
      {"cluster.height_ratio_max", DOCAFF_DOUBLE(cluster.height_ratio_max)},
      {"refine.epochs", DOCAFF_INT(refine_epochs)},
  };
  return table;
}

#undef DOCAFF_DOUBLE
#undef DOCAFF_INT
#undef DOCAFF_BOOL

}  // namespace

void PipelineConfig::set_seed(std::uint64_t value) {
  seed = value;
  features.noise_seed = value;
  constraints.rng_seed = value;
  train.seed = value;
}

void PipelineConfig::check() const {
  if (!(lines.threshold > 0.0)) throw ValidationError("lines.threshold must be positive", "lines.threshold");
  if (!(lines.overlap_min > 0.0 && lines.overlap_min <= 1.0)) {
    throw ValidationError("lines.overlap_min must lie in (0, 1]", "lines.overlap_min");
  }
  features.check();
  constraints.check();
  train.check();
  if (!(cluster.likelihood_min >= 0.0 && cluster.likelihood_min <= 1.0)) {
    throw ValidationError("cluster.likelihood_min must lie in [0, 1]", "cluster.likelihood_min");
  }
  if (!(cluster.height_ratio_max > 1.0)) {
    throw ValidationError("cluster.height_ratio_max must exceed 1", "cluster.height_ratio_max");
  }
  if (refine_epochs < 0) throw ValidationError("refine.epochs must be non-negative", "refine.epochs");
}

void set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = fields();
  const auto it = table.find(key);
  if (it == table.end()) throw ValidationError("unknown config key '" + std::string(key) + "'", std::string(key));
  it->second.set(cfg, key, trim(value));
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(number) + " is not key=value", "config");
    }
    set_config_value(base, trim(std::string_view(t).substr(0, eq)), std::string_view(t).substr(eq + 1));
  }
  base.check();
  return base;
}

std::string format_config(const PipelineConfig& cfg) {
  std::ostringstream out;
  for (const auto& [key, field] : fields()) out << key << '=' << field.get(cfg) << '\n';
  return out.str();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, field] : fields()) keys.push_back(key);
  return keys;
}

}  // namespace docaff
