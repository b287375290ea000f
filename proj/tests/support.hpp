#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <vector>

#include "morphcall/dataset.hpp"
#include "morphcall/repstore.hpp"
#include "morphcall/rng.hpp"
#include "morphcall/taskgen.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(MORPHCALL_FIXTURE_DIR) + "/" + name; }
inline std::string data_dir() { return MORPHCALL_DATA_DIR; }

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "morphcall-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

// One word-level instance per sentence, labels cycling through the classes.
inline morphcall::ProbingDataset synthetic_dataset(std::size_t n, int arity = 2, std::uint64_t seed = 7) {
  std::vector<morphcall::TaskInstance> instances;
  for (std::size_t i = 0; i < n; ++i) {
    morphcall::TaskInstance inst;
    char id[32];
    std::snprintf(id, sizeof id, "s%06zu", i);
    inst.id = std::string("features/Number|") + id + "|0";
    inst.sentence_id = id;
    inst.tokens = {"w" + std::to_string(i), "x"};
    inst.target_index = 0;
    inst.label = static_cast<int>(i % static_cast<std::size_t>(arity));
    inst.task = "features/Number";
    inst.language = "ru";
    inst.meta["masked"] = "false";
    instances.push_back(inst);
  }
  std::vector<std::string> classes;
  for (int c = 0; c < arity; ++c) classes.push_back("c" + std::to_string(c));
  morphcall::GenerationConfig cfg;
  cfg.seed = seed;
  auto d = morphcall::split_and_balance(std::move(instances), arity, classes, cfg);
  d.task = "features/Number";
  d.language = "ru";
  return d;
}

// Gaussian noise everywhere; in signal_layer every unit is shifted by
// +-shift according to the binary label.
inline morphcall::RepSet signal_repset(const morphcall::ProbingDataset& d, std::size_t layers, std::size_t hidden,
                                       std::size_t signal_layer, double shift, std::uint64_t seed = 11) {
  morphcall::RepSet r;
  r.header.model_id = "synthetic";
  r.header.language = d.language;
  r.header.task_name = d.task;
  r.header.pooling = morphcall::Pooling::TargetMean;
  r.header.n_samples = d.instances.size();
  r.header.n_layers = layers;
  r.header.hidden_size = hidden;
  r.header.dataset_checksum = d.checksum;
  r.data.resize(r.header.value_count());
  morphcall::Rng rng(seed);
  for (std::size_t i = 0; i < d.instances.size(); ++i) {
    const double sign = d.instances[i].label == 1 ? 1.0 : -1.0;
    for (std::size_t l = 0; l < layers; ++l) {
      for (std::size_t u = 0; u < hidden; ++u) {
        double v = rng.normal();
        if (l == signal_layer) v += sign * shift;
        r.data[(i * layers + l) * hidden + u] = static_cast<float>(v);
      }
    }
  }
  return r;
}

}  // namespace testing
