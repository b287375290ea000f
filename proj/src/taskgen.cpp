#include "morphcall/taskgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "morphcall/error.hpp"
#include "morphcall/rng.hpp"

namespace morphcall {
namespace {

std::string language_of(const std::vector<Sentence>& sentences) {
  if (sentences.empty()) throw GenerationError("no sentences to generate from");
  const std::string& lang = sentences.front().language;
  for (const auto& s : sentences) {
    if (s.language != lang) throw ConfigError("mixed languages in one generation run: " + lang + ", " + s.language);
  }
  return lang;
}

std::string instance_id(const std::string& task, const std::string& sentence_id, std::size_t target) {
  return task + "|" + sentence_id + "|" + std::to_string(target);
}

ProbingDataset occurrence_task(const std::vector<Sentence>& sentences, const std::string& feature,
                               const FeatureInventory& inventory, const GenerationConfig& cfg,
                               TaskFamily family) {
  cfg.validate();
  const std::string lang = language_of(sentences);
  if (!inventory.defines(lang, feature)) {
    throw ConfigError("feature " + feature + " is not defined for language " + lang);
  }
  const std::string task = make_task_tag(family, feature);
  const bool masked = family == TaskFamily::Masked;
  const std::size_t cap = cfg.max_instances_per_sentence_per_class;

  std::vector<TaskInstance> instances;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  for (const auto& s : filter_by_length(sentences, cfg.length_range.first, cfg.length_range.second)) {
    std::vector<std::size_t> with;
    std::vector<std::size_t> without;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      (has_feature(s.tokens[i], feature) ? with : without).push_back(i);
    }
    // Selection depends on feature and sentence only, never on the family,
    // so masked and unmasked tasks pick identical targets.
    Rng rng = Rng::derive(cfg.seed, "select:" + feature + ":" + s.id);
    auto pick = [&](const std::vector<std::size_t>& pool, int label) {
      for (std::size_t k : rng.sample_indices(pool.size(), cap)) {
        const std::size_t pos = pool[k];
        TaskInstance inst;
        inst.id = instance_id(task, s.id, pos);
        inst.sentence_id = s.id;
        inst.tokens = s.forms();
        inst.target_index = pos;
        inst.label = label;
        inst.task = task;
        inst.language = lang;
        inst.meta["masked"] = masked ? "true" : "false";
        if (auto v = feature_value(s.tokens[pos], feature)) inst.meta["value"] = *v;
        instances.push_back(std::move(inst));
      }
    };
    pick(with, 1);
    pick(without, 0);
    positives += with.size();
    negatives += without.size();
  }
  if (positives == 0) throw GenerationError("feature " + feature + ": no tokens carry the feature");
  if (negatives == 0) throw GenerationError("feature " + feature + ": no tokens lack the feature (no negatives)");

  ProbingDataset d = split_and_balance(std::move(instances), 2, {"absent", "present"}, cfg);
  d.task = task;
  d.language = lang;
  return d;
}

}  // namespace

std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios) {
  const double nd = static_cast<double>(n);
  auto cut = [&](double frac) {
    auto c = static_cast<std::size_t>(std::floor(frac * nd + 0.5));
    return std::min(c, n);
  };
  const std::size_t c1 = cut(ratios[0]);
  const std::size_t c2 = std::max(c1, cut(ratios[0] + ratios[1]));
  return {c1, c2 - c1, n - c2};
}

ProbingDataset split_and_balance(std::vector<TaskInstance> instances, int arity,
                                 const std::vector<std::string>& class_names,
                                 const GenerationConfig& cfg) {
  cfg.validate();
  if (instances.empty()) throw GenerationError("no instances to split");
  if (arity < 2) throw GenerationError("task arity must be at least 2");
  for (const auto& inst : instances) {
    if (inst.label < 0 || inst.label >= arity) {
      throw GenerationError("label " + std::to_string(inst.label) + " outside [0, " + std::to_string(arity) + ")");
    }
  }
  std::sort(instances.begin(), instances.end(), canonical_less);

  std::set<std::string> id_set;
  for (const auto& inst : instances) id_set.insert(inst.sentence_id);
  std::vector<std::string> ids(id_set.begin(), id_set.end());
  Rng split_rng = Rng::derive(cfg.seed, "split");
  split_rng.shuffle(ids);

  const auto sizes = split_sizes(ids.size(), cfg.split_ratios);
  std::map<std::string, Split> assignment;
  std::map<Split, std::size_t> assigned{{Split::Train, sizes[0]}, {Split::Dev, sizes[1]}, {Split::Test, sizes[2]}};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Split s = i < sizes[0] ? Split::Train : (i < sizes[0] + sizes[1] ? Split::Dev : Split::Test);
    assignment[ids[i]] = s;
  }
  for (auto& inst : instances) inst.split = assignment.at(inst.sentence_id);

  auto class_name = [&](int c) {
    return static_cast<std::size_t>(c) < class_names.size() ? class_names[static_cast<std::size_t>(c)]
                                                            : std::to_string(c);
  };

  std::vector<TaskInstance> kept;
  for (Split s : kSplits) {
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(arity));
    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (instances[i].split == s) by_class[static_cast<std::size_t>(instances[i].label)].push_back(i);
    }
    std::size_t minority = instances.size();
    for (int c = 0; c < arity; ++c) {
      const std::size_t n = by_class[static_cast<std::size_t>(c)].size();
      if (n == 0) {
        throw GenerationError("split " + std::string(split_name(s)) + " has no instances of class " +
                              std::to_string(c) + " (" + class_name(c) + ")");
      }
      minority = std::min(minority, n);
    }
    for (int c = 0; c < arity; ++c) {
      const auto& pool = by_class[static_cast<std::size_t>(c)];
      Rng rng = Rng::derive(cfg.seed, "balance:" + std::string(split_name(s)) + ":" + std::to_string(c));
      for (std::size_t k : rng.sample_indices(pool.size(), minority)) kept.push_back(instances[pool[k]]);
    }
  }
  std::sort(kept.begin(), kept.end(), canonical_less);

  ProbingDataset d;
  d.arity = arity;
  d.classes = class_names;
  d.config = cfg;
  d.instances = std::move(kept);
  d.checksum = dataset_checksum(d.instances);
  d.assigned_sentences = assigned;
  if (!d.instances.empty()) {
    d.task = d.instances.front().task;
    d.language = d.instances.front().language;
  }
  return d;
}

ProbingDataset gen_feature_task(const std::vector<Sentence>& sentences, const std::string& feature,
                                const FeatureInventory& inventory, const GenerationConfig& cfg) {
  return occurrence_task(sentences, feature, inventory, cfg, TaskFamily::Features);
}

ProbingDataset gen_masked_task(const std::vector<Sentence>& sentences, const std::string& feature,
                               const FeatureInventory& inventory, const GenerationConfig& cfg) {
  return occurrence_task(sentences, feature, inventory, cfg, TaskFamily::Masked);
}

ProbingDataset gen_values_task(const std::vector<Sentence>& sentences, const std::string& feature,
                               const FeatureInventory& inventory, const GenerationConfig& cfg) {
  cfg.validate();
  const std::string lang = language_of(sentences);
  const auto& values = inventory.values(lang, feature);
  if (values.size() < 2) throw ConfigError("feature " + feature + " needs at least two values for a k-way task");
  const std::string task = make_task_tag(TaskFamily::Values, feature);

  std::vector<TaskInstance> instances;
  std::vector<std::size_t> support(values.size(), 0);
  for (const auto& s : filter_by_length(sentences, cfg.length_range.first, cfg.length_range.second)) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const Token& t = s.tokens[i];
      if (t.syncretic(feature)) continue;
      auto v = feature_value(t, feature);
      if (!v) continue;
      auto label = inventory.index_of(lang, feature, *v);
      if (!label) continue;
      TaskInstance inst;
      inst.id = instance_id(task, s.id, i);
      inst.sentence_id = s.id;
      inst.tokens = s.forms();
      inst.target_index = i;
      inst.label = *label;
      inst.task = task;
      inst.language = lang;
      inst.meta["masked"] = "false";
      inst.meta["value"] = *v;
      ++support[static_cast<std::size_t>(*label)];
      instances.push_back(std::move(inst));
    }
  }
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (support[c] == 0) throw GenerationError("feature " + feature + ": value " + values[c] + " has no support");
  }
  ProbingDataset d = split_and_balance(std::move(instances), static_cast<int>(values.size()), values, cfg);
  d.task = task;
  d.language = lang;
  return d;
}

}  // namespace morphcall
