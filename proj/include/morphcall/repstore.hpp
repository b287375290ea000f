#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "morphcall/dataset.hpp"

namespace morphcall {

// MCREP layout, all integers little-endian:
//
//   "MCRP" | version u32 | metadata_len u32 | metadata (UTF-8 JSON)
//   | n_samples * n_layers * hidden_size float32 (sample-major, then layer)
//   | FNV-1a 64 of the data section, u64
//
// n_layers counts the embedding output plus every transformer block.
inline constexpr std::uint32_t kRepSetVersion = 1;

enum class Pooling { TargetMean, MaskToken, SentenceMean, Cls };

std::string_view pooling_name(Pooling p);
Pooling parse_pooling(std::string_view name);
// Pooling modes a task family may be extracted with.
bool pooling_allowed(TaskFamily family, Pooling pooling);

enum class ModelInstance { PreTrained, FineTuned };
std::string_view instance_name(ModelInstance i);
ModelInstance parse_instance(std::string_view name);

struct RepSetHeader {
  std::uint32_t version = kRepSetVersion;
  std::string model_id;
  ModelInstance instance = ModelInstance::PreTrained;
  std::string language;
  std::string task_name;
  Pooling pooling = Pooling::TargetMean;
  std::size_t n_samples = 0;
  std::size_t n_layers = 0;
  std::size_t hidden_size = 0;
  std::string dataset_checksum;

  std::size_t value_count() const { return n_samples * n_layers * hidden_size; }
  std::string metadata_json() const;

  friend bool operator==(const RepSetHeader&, const RepSetHeader&) = default;
};

struct RepSet {
  RepSetHeader header;
  std::vector<float> data;

  float at(std::size_t sample, std::size_t layer, std::size_t unit) const {
    return data[(sample * header.n_layers + layer) * header.hidden_size + unit];
  }
};

// Throws ShapeError (before touching the file) when data does not match the header.
void write_repset(const RepSetHeader& header, std::span<const float> data, const std::string& path);

// FormatError on bad magic/version/metadata, IntegrityError on truncation or
// checksum mismatch.
RepSet read_repset(const std::string& path);

// BindingError unless the repset was extracted from this dataset with a
// pooling mode legal for its family.
void validate_binding(const RepSet& repset, const ProbingDataset& dataset);

// [n_samples x hidden_size], promoted to double. BoundsError for bad layers.
Eigen::MatrixXd slice_layer(const RepSet& repset, std::size_t layer);
// All layers side by side per sample: [n_samples x n_layers*hidden_size].
Eigen::MatrixXd concat_layers(const RepSet& repset);

}  // namespace morphcall
