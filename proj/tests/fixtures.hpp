#pragma once

#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "docaff/config.hpp"
#include "docaff/document.hpp"
#include "docaff/synth.hpp"

namespace docaff::testing {

inline WordUnit word(int id, std::string text, BBox box) {
  WordUnit w;
  w.id = id;
  w.text = std::move(text);
  w.bbox = box;
  return w;
}

inline WordUnit styled(int id, std::string text, BBox box, StyleAttrs style) {
  WordUnit w = word(id, std::move(text), box);
  w.style = style;
  return w;
}

inline StyleAttrs style_of(int family, bool bold, double size) {
  StyleAttrs s;
  s.font_family_id = family;
  s.bold = bold;
  s.font_size = size;
  return s;
}

// Small, fast pipeline settings for unit tests.
inline PipelineConfig fast_config(std::uint64_t seed = 7) {
  PipelineConfig cfg;
  cfg.train.hidden2 = 200;
  cfg.train.epochs = 20;
  cfg.set_seed(seed);
  return cfg;
}

inline SynthDocument small_menu(std::uint64_t seed = 3, int items = 6) {
  return generate_document(make_spec(Template::Menu, items, seed));
}

// Partition of `ids` induced by a labelling, as a set of sorted member sets.
inline std::set<std::vector<int>> partition_of(const std::vector<int>& labels) {
  std::map<int, std::vector<int>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(static_cast<int>(i));
  std::set<std::vector<int>> out;
  for (auto& [label, members] : groups) out.insert(members);
  return out;
}

// Partition from the transitive closure of a boolean adjacency matrix
// (Floyd-Warshall reachability).
inline std::set<std::vector<int>> closure_partition(std::vector<std::vector<bool>> reach) {
  const std::size_t n = reach.size();
  for (std::size_t i = 0; i < n; ++i) reach[i][i] = true;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[k][j]) reach[i][j] = true;
      }
    }
  }
  std::set<std::vector<int>> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> members;
    for (std::size_t j = 0; j < n; ++j) {
      if (reach[i][j]) members.push_back(static_cast<int>(j));
    }
    out.insert(members);
  }
  return out;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("docaff-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace docaff::testing
