#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "docaff/clustering.hpp"
#include "docaff/constraints.hpp"
#include "docaff/document.hpp"
#include "docaff/features.hpp"
#include "docaff/model.hpp"

namespace docaff {

struct PipelineConfig {
  LineParams lines;
  FeatureConfig features;
  ConstraintConfig constraints;
  TrainConfig train;
  ClusterParams cluster;
  int refine_epochs = 10;
  std::uint64_t seed = 0;

  // Propagates `seed` to every seeded stage.
  void set_seed(std::uint64_t value);
  void check() const;
};

// Sets one dotted key ("train.epochs", "lines.threshold", ...). Throws
// ValidationError for unknown keys or unparsable values.
void set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value);

// Flat key=value lines; '#' starts a comment; blank lines ignored.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});

// Every supported key with its current value, in key=value form.
std::string format_config(const PipelineConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace docaff
