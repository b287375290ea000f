#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "morphcall/analysis.hpp"
#include "morphcall/baselines.hpp"
#include "morphcall/dataset.hpp"
#include "morphcall/probe.hpp"
#include "morphcall/ud.hpp"

namespace morphcall {

// Glob patterns, relative to <data root>/ud, for the treebanks of each language.
const std::map<std::string, std::vector<std::string>>& treebank_presets();

struct RunConfig {
  std::string language;
  std::vector<std::string> treebanks;  // globs
  std::string preset;                  // key of treebank_presets(), optional
  std::vector<std::string> tasks;      // empty = every task of the language
  std::string lexicon;
  std::string data_root;  // holds stopwords/, articles/ and ud/
  std::string vectors;
  std::string sidecar;
  std::uint64_t seed = 42;
  std::size_t jobs = 1;
  std::string out = "out";
  bool plots = true;
  GenerationConfig generation;
  ProbeConfig probe;
  NeuronProbeConfig neurons;
  BaselineConfig baseline;

  // Pushes seed and jobs into the module configs.
  void propagate();
};

// Relative paths in the file are resolved against its directory. Unknown keys
// are a ConfigError.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir);
// MORPHCALL_DATA, else the data directory shipped with the sources.
std::string default_data_root();

// Sorted, de-duplicated files matching the patterns. ConfigError when a
// pattern matches nothing.
std::vector<std::string> expand_globs(const std::vector<std::string>& patterns);

// Every task tag for the language, in a fixed order: features, masked,
// values, perturbations.
std::vector<std::string> all_tasks(const std::string& language, const FeatureInventory& inventory);

// "masked/Number" -> "masked-Number"
std::string task_file_stem(const std::string& task);
std::string dataset_path(const RunConfig& cfg, const std::string& task);

struct CommandResult {
  bool up_to_date = false;
  std::vector<std::string> written;
  std::vector<std::string> unchanged;
};

CommandResult cmd_generate(const RunConfig& cfg, std::ostream& log);
CommandResult cmd_probe(const RunConfig& cfg, const std::string& dataset, const std::vector<std::string>& repsets,
                        std::ostream& log);
CommandResult cmd_neurons(const RunConfig& cfg, const std::string& dataset, const std::vector<std::string>& repsets,
                          std::ostream& log);
CommandResult cmd_ckasim(const RunConfig& cfg, const std::string& dataset, const std::string& pretrained,
                         const std::string& finetuned, bool layer_matrix, std::ostream& log);
CommandResult cmd_baseline(const RunConfig& cfg, const std::string& dataset, std::ostream& log);

struct ReportRow {
  std::string model_id;
  std::string instance;
  std::string task;
  std::string language;
  std::size_t layers = 0;
  double mean_test_auc = 0.0;
};

// Layer-averaged test AUC of every probe and baseline report under dir.
std::vector<ReportRow> collect_reports(const std::string& dir);
CommandResult cmd_report(const RunConfig& cfg, std::ostream& log);

// Maps an error kind to the process exit code.
int exit_code_for(const std::string& kind);
// {"error": {"kind": ..., "message": ..., "command": ...}}
std::string error_report(const std::string& command, const std::string& kind, const std::string& message);

}  // namespace morphcall
