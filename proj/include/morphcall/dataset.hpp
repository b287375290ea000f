#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace morphcall {

enum class Split { Train, Dev, Test };
inline constexpr std::array<Split, 3> kSplits{Split::Train, Split::Dev, Split::Test};

std::string_view split_name(Split s);
Split parse_split(std::string_view name);

enum class TaskFamily { Features, Masked, Values, Perturbations };

std::string_view family_name(TaskFamily f);
TaskFamily parse_family(std::string_view name);
// Family part of a task tag such as "masked/Number".
TaskFamily family_of_task(std::string_view task);
std::string make_task_tag(TaskFamily family, std::string_view subject);

struct TaskInstance {
  std::string id;
  std::string sentence_id;
  std::vector<std::string> tokens;
  std::optional<std::size_t> target_index;  // absent for sentence-level tasks
  int label = 0;
  std::string task;
  std::string language;
  Split split = Split::Train;
  std::map<std::string, std::string> meta;

  bool masked() const;

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

// Canonical instance order: sentence id, then target index (absent first), then label.
bool canonical_less(const TaskInstance& a, const TaskInstance& b);

struct GenerationConfig {
  std::uint64_t seed = 42;
  std::array<double, 3> split_ratios{0.8, 0.1, 0.1};
  std::pair<std::size_t, std::size_t> length_range{5, 25};
  std::size_t max_instances_per_sentence_per_class = 2;
  // Minimum number of (original, perturbed) pairs for a perturbation task.
  std::size_t min_pairs = 10;

  // Throws ConfigError on ratios that do not sum to 1 or an empty length range.
  void validate() const;

  friend bool operator==(const GenerationConfig&, const GenerationConfig&) = default;
};

struct SourceFile {
  std::string file;
  std::string hash;
  friend bool operator==(const SourceFile&, const SourceFile&) = default;
};

struct ProbingDataset {
  std::string task;
  std::string language;
  int arity = 2;
  std::vector<std::string> classes;  // class id -> human-readable name
  GenerationConfig config;
  std::vector<SourceFile> sources;
  std::vector<TaskInstance> instances;
  std::string checksum;
  // Sentences per split before balancing. Balancing can drop every instance
  // of a sentence, so sentence_counts() may be smaller.
  std::map<Split, std::size_t> assigned_sentences;

  TaskFamily family() const { return family_of_task(task); }

  // counts[split][label]
  std::map<Split, std::vector<std::size_t>> class_counts() const;
  std::map<Split, std::size_t> sentence_counts() const;
  std::vector<std::size_t> indices(Split split) const;

  friend bool operator==(const ProbingDataset&, const ProbingDataset&) = default;
};

// One JSON object per line, keys in fixed order, trailing newline.
std::string serialize_instances(const std::vector<TaskInstance>& instances);
std::string dataset_checksum(const std::vector<TaskInstance>& instances);

std::string manifest_path(const std::string& dataset_path);
std::string render_manifest(const ProbingDataset& dataset);

// Writes <path> and its manifest sidecar.
void write_dataset(const ProbingDataset& dataset, const std::string& path);
// Throws IntegrityError when the data file does not match the manifest checksum.
ProbingDataset read_dataset(const std::string& path);

}  // namespace morphcall
