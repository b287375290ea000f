#pragma once

#include <string>
#include <vector>

#include "morphcall/dataset.hpp"
#include "morphcall/ud.hpp"

namespace morphcall {

// Binary occurrence task: label 1 when the target token carries the feature.
// Up to cfg.max_instances_per_sentence_per_class targets per class and
// sentence, sampled from a stream derived from (seed, feature, sentence id).
ProbingDataset gen_feature_task(const std::vector<Sentence>& sentences, const std::string& feature,
                                const FeatureInventory& inventory, const GenerationConfig& cfg);

// Same selection as gen_feature_task, flagged masked. Tokens stay unmasked.
ProbingDataset gen_masked_task(const std::vector<Sentence>& sentences, const std::string& feature,
                               const FeatureInventory& inventory, const GenerationConfig& cfg);

// k-way task over every non-syncretic token whose value is in the inventory;
// label is the value's position in the inventory list.
ProbingDataset gen_values_task(const std::vector<Sentence>& sentences, const std::string& feature,
                               const FeatureInventory& inventory, const GenerationConfig& cfg);

// Assigns sentences to train/dev/test by cumulative ratio over a seeded
// shuffle, then downsamples every class of a split to the split's minority
// count. Output is in canonical order and carries its checksum.
ProbingDataset split_and_balance(std::vector<TaskInstance> instances, int arity,
                                 const std::vector<std::string>& class_names,
                                 const GenerationConfig& cfg);

// Train/dev/test sentence counts for n sentences under the given ratios.
std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios);

}  // namespace morphcall
