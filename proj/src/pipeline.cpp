#include "morphcall/pipeline.hpp"

#include <glob.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "morphcall/error.hpp"
#include "morphcall/hash.hpp"
#include "morphcall/lexicon.hpp"
#include "morphcall/parallel.hpp"
#include "morphcall/perturb.hpp"
#include "morphcall/plot.hpp"
#include "morphcall/repstore.hpp"
#include "morphcall/simkit.hpp"
#include "morphcall/taskgen.hpp"
#include "morphcall/ud.hpp"

#ifndef MORPHCALL_SOURCE_DATA_DIR
#define MORPHCALL_SOURCE_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace morphcall {

const std::map<std::string, std::vector<std::string>>& treebank_presets() {
  static const std::map<std::string, std::vector<std::string>> presets{
      {"ru",
       {"GramEval2020/*.conllu", "UD_Russian-GSD/*.conllu", "UD_Russian-PUD/*.conllu",
        "UD_Russian-SynTagRus/*.conllu"}},
      {"en",
       {"UD_English-EWT/*.conllu", "UD_English-GUM/*.conllu", "UD_English-ParTUT/*.conllu",
        "UD_English-PUD/*.conllu", "UD_English-Pronouns/*.conllu"}},
      {"fr",
       {"UD_French-FQB/*.conllu", "UD_French-GSD/*.conllu", "UD_French-ParTUT/*.conllu", "UD_French-PUD/*.conllu",
        "UD_French-Sequoia/*.conllu", "UD_French-Rhapsodie/*.conllu", "UD_French-Spoken/*.conllu"}},
      {"de",
       {"UD_German-GSD/*.conllu", "UD_German-HDT/*.conllu", "UD_German-PUD/*.conllu", "UD_German-LIT/*.conllu"}},
  };
  return presets;
}

void RunConfig::propagate() {
  generation.seed = seed;
  probe.seed = seed;
  neurons.seed = seed;
  probe.jobs = jobs;
  neurons.jobs = jobs;
}

std::string default_data_root() {
  if (const char* env = std::getenv("MORPHCALL_DATA"); env != nullptr && *env != '\0') return env;
  return MORPHCALL_SOURCE_DATA_DIR;
}

namespace {

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute() || base_dir.empty()) return p;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

template <typename T>
T get(const ojson& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

void check_keys(const ojson& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key " + where + "." + k);
  }
}

template <typename T>
void read_into(const ojson& j, const char* key, T& target, const std::string& where) {
  if (j.contains(key)) target = get<T>(j, key, where);
}

void read_pair(const ojson& j, const char* key, std::pair<std::size_t, std::size_t>& target, const std::string& where) {
  if (!j.contains(key)) return;
  auto v = get<std::vector<std::size_t>>(j, key, where);
  if (v.size() != 2) throw ConfigError(where + "." + key + " needs two numbers");
  target = {v[0], v[1]};
}

void require_file(const std::string& path, const std::string& what) {
  if (!path.empty() && !fs::is_regular_file(path)) throw ConfigError(what + " not found: " + path);
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j,
             {"language", "treebanks", "preset", "tasks", "lexicon", "data_root", "vectors", "sidecar", "seed", "jobs",
              "out", "plots", "generation", "probe", "neurons", "baseline"},
             "config");
  RunConfig c;
  read_into(j, "language", c.language, "config");
  read_into(j, "treebanks", c.treebanks, "config");
  read_into(j, "preset", c.preset, "config");
  read_into(j, "tasks", c.tasks, "config");
  read_into(j, "lexicon", c.lexicon, "config");
  read_into(j, "data_root", c.data_root, "config");
  read_into(j, "vectors", c.vectors, "config");
  read_into(j, "sidecar", c.sidecar, "config");
  read_into(j, "seed", c.seed, "config");
  read_into(j, "jobs", c.jobs, "config");
  read_into(j, "out", c.out, "config");
  read_into(j, "plots", c.plots, "config");
  for (auto& t : c.treebanks) t = resolve(base_dir, t);
  c.lexicon = resolve(base_dir, c.lexicon);
  c.data_root = resolve(base_dir, c.data_root);
  c.vectors = resolve(base_dir, c.vectors);
  c.sidecar = resolve(base_dir, c.sidecar);
  c.out = resolve(base_dir, c.out);

  if (j.contains("generation")) {
    const auto& g = j["generation"];
    check_keys(g, {"split_ratios", "length_range", "max_instances_per_sentence_per_class", "min_pairs"}, "generation");
    if (g.contains("split_ratios")) {
      auto r = get<std::vector<double>>(g, "split_ratios", "generation");
      if (r.size() != 3) throw ConfigError("generation.split_ratios needs three numbers");
      c.generation.split_ratios = {r[0], r[1], r[2]};
    }
    read_pair(g, "length_range", c.generation.length_range, "generation");
    read_into(g, "max_instances_per_sentence_per_class", c.generation.max_instances_per_sentence_per_class,
              "generation");
    read_into(g, "min_pairs", c.generation.min_pairs, "generation");
  }
  if (j.contains("probe")) {
    const auto& p = j["probe"];
    check_keys(p, {"l2_grid", "max_iterations", "tolerance", "standardize"}, "probe");
    read_into(p, "l2_grid", c.probe.l2_grid, "probe");
    read_into(p, "max_iterations", c.probe.max_iterations, "probe");
    read_into(p, "tolerance", c.probe.tolerance, "probe");
    read_into(p, "standardize", c.probe.standardize, "probe");
  }
  if (j.contains("neurons")) {
    const auto& n = j["neurons"];
    check_keys(n, {"l1_grid", "l2_grid", "top_fraction", "mode", "max_iterations", "tolerance"}, "neurons");
    read_into(n, "l1_grid", c.neurons.l1_grid, "neurons");
    read_into(n, "l2_grid", c.neurons.l2_grid, "neurons");
    read_into(n, "top_fraction", c.neurons.top_fraction, "neurons");
    read_into(n, "max_iterations", c.neurons.optimizer.max_iterations, "neurons");
    read_into(n, "tolerance", c.neurons.optimizer.tolerance, "neurons");
    if (n.contains("mode")) {
      const auto mode = get<std::string>(n, "mode", "neurons");
      if (mode == "max-abs") {
        c.neurons.mode = SaliencyMode::MaxAbs;
      } else if (mode == "cumulative-mass") {
        c.neurons.mode = SaliencyMode::CumulativeMass;
      } else {
        throw ConfigError("neurons.mode must be max-abs or cumulative-mass");
      }
    }
  }
  if (j.contains("baseline")) {
    const auto& b = j["baseline"];
    check_keys(b, {"kind", "ngram_range", "vocabulary_cap", "sublinear_tf", "lowercase"}, "baseline");
    if (b.contains("kind")) c.baseline.kind = parse_baseline(get<std::string>(b, "kind", "baseline"));
    read_pair(b, "ngram_range", c.baseline.ngram_range, "baseline");
    read_into(b, "vocabulary_cap", c.baseline.vocabulary_cap, "baseline");
    read_into(b, "sublinear_tf", c.baseline.sublinear_tf, "baseline");
    read_into(b, "lowercase", c.baseline.lowercase, "baseline");
  }
  if (!c.language.empty() && !is_supported_language(c.language)) {
    throw ConfigError("unsupported language: " + c.language);
  }
  if (!c.preset.empty() && !treebank_presets().count(c.preset)) throw ConfigError("unknown preset: " + c.preset);
  require_file(c.lexicon, "lexicon");
  require_file(c.vectors, "vectors");
  require_file(c.sidecar, "sidecar");
  c.generation.validate();
  c.probe.validate();
  c.neurons.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), fs::path(path).parent_path().string());
}

std::vector<std::string> expand_globs(const std::vector<std::string>& patterns) {
  std::set<std::string> files;
  for (const auto& p : patterns) {
    glob_t g{};
    const int rc = ::glob(p.c_str(), 0, nullptr, &g);
    std::size_t matched = 0;
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) {
        if (fs::is_regular_file(g.gl_pathv[i])) {
          files.insert(g.gl_pathv[i]);
          ++matched;
        }
      }
    }
    globfree(&g);
    if (matched == 0) throw ConfigError("no treebank file matches " + p);
  }
  return {files.begin(), files.end()};
}

std::vector<std::string> all_tasks(const std::string& language, const FeatureInventory& inventory) {
  std::vector<std::string> tasks;
  const auto features = inventory.features(language);
  for (auto fam : {TaskFamily::Features, TaskFamily::Masked, TaskFamily::Values}) {
    for (const auto& f : features) tasks.push_back(make_task_tag(fam, f));
  }
  for (auto k : supported_kinds(language)) tasks.push_back(make_task_tag(TaskFamily::Perturbations, kind_name(k)));
  return tasks;
}

std::string task_file_stem(const std::string& task) {
  std::string s = task;
  std::replace(s.begin(), s.end(), '/', '-');
  return s;
}

std::string dataset_path(const RunConfig& cfg, const std::string& task) {
  return (fs::path(cfg.out) / "datasets" / cfg.language / (task_file_stem(task) + ".jsonl")).string();
}

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                    c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out;
}

// Writes only when the bytes differ.
void put(const std::string& path, const std::string& content, CommandResult& result) {
  if (fs::exists(path) && read_text(path) == content) {
    result.unchanged.push_back(path);
    return;
  }
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw InputError("cannot write " + path);
  result.written.push_back(path);
}

// A stamp records the input fingerprint of a command and the hashes of the
// files it produced (relative to the stamp); matching both means there is
// nothing to redo.
bool stamp_current(const std::string& stamp, const std::string& fingerprint) {
  if (!fs::exists(stamp)) return false;
  const auto dir = fs::path(stamp).parent_path();
  try {
    auto j = ojson::parse(read_text(stamp));
    if (j.at("fingerprint").get<std::string>() != fingerprint) return false;
    for (const auto& [name, hash] : j.at("outputs").items()) {
      const auto file = (dir / name).string();
      if (!fs::exists(file) || file_hash_hex(file) != hash.get<std::string>()) return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

void write_stamp(const std::string& stamp, const std::string& fingerprint, const std::vector<std::string>& outputs) {
  ojson j;
  j["fingerprint"] = fingerprint;
  ojson o = ojson::object();
  const auto dir = fs::path(stamp).parent_path();
  for (const auto& f : outputs) o[fs::relative(f, dir).generic_string()] = file_hash_hex(f);
  j["outputs"] = o;
  fs::create_directories(dir);
  std::ofstream(stamp, std::ios::trunc) << j.dump(2) << "\n";
}

std::string fingerprint_of(const ojson& j) { return to_hex(fnv1a64(j.dump())); }

ojson generation_json(const GenerationConfig& g) {
  ojson j;
  j["seed"] = g.seed;
  j["split_ratios"] = g.split_ratios;
  j["length_range"] = {g.length_range.first, g.length_range.second};
  j["max_instances_per_sentence_per_class"] = g.max_instances_per_sentence_per_class;
  j["min_pairs"] = g.min_pairs;
  return j;
}

ojson probe_json(const ProbeConfig& p) {
  ojson j;
  j["l2_grid"] = p.l2_grid;
  j["max_iterations"] = p.max_iterations;
  j["tolerance"] = p.tolerance;
  j["standardize"] = p.standardize;
  j["seed"] = p.seed;
  return j;
}

std::string source_label(const std::string& file, const std::string& data_root) {
  std::error_code ec;
  const auto rel = fs::relative(file, data_root, ec);
  if (!ec && !rel.empty() && rel.native().rfind("..", 0) != 0) return rel.generic_string();
  return fs::path(file).filename().string();
}

CommandResult finish(CommandResult r, const std::string& stamp, const std::string& fingerprint,
                     const std::vector<std::string>& outputs, const std::string& command, std::ostream& log) {
  write_stamp(stamp, fingerprint, outputs);
  log << command << ": wrote " << r.written.size() << ", unchanged " << r.unchanged.size() << "\n";
  return r;
}

CommandResult up_to_date(std::ostream& log) {
  log << "up-to-date, no changes\n";
  CommandResult r;
  r.up_to_date = true;
  return r;
}

}  // namespace

CommandResult cmd_generate(const RunConfig& cfg, std::ostream& log) {
  if (cfg.language.empty()) throw ConfigError("generate needs a language");
  if (!is_supported_language(cfg.language)) throw ConfigError("unsupported language: " + cfg.language);
  const std::string data_root = cfg.data_root.empty() ? default_data_root() : cfg.data_root;
  std::vector<std::string> patterns = cfg.treebanks;
  if (!cfg.preset.empty()) {
    // Only the installed treebanks of a preset are used.
    for (const auto& p : treebank_presets().at(cfg.preset)) {
      const auto full = (fs::path(data_root) / "ud" / p).string();
      glob_t g{};
      if (::glob(full.c_str(), 0, nullptr, &g) == 0) patterns.push_back(full);
      globfree(&g);
    }
  }
  if (patterns.empty()) throw ConfigError("no treebanks configured");
  const auto files = expand_globs(patterns);

  const FeatureInventory inventory = FeatureInventory::defaults();
  const auto known = all_tasks(cfg.language, inventory);
  std::vector<std::string> tasks = cfg.tasks.empty() ? known : cfg.tasks;
  for (const auto& t : tasks) {
    if (std::find(known.begin(), known.end(), t) == known.end()) {
      throw ConfigError("task " + t + " is not defined for language " + cfg.language);
    }
  }
  bool need_lexicon = false, need_stoplist = false;
  for (const auto& t : tasks) {
    if (family_of_task(t) != TaskFamily::Perturbations) continue;
    const auto kind = parse_kind(t.substr(t.find('/') + 1));
    (is_removal(kind) ? need_stoplist : need_lexicon) = true;
  }
  if (need_lexicon && cfg.lexicon.empty()) throw ConfigError("agreement perturbations need a lexicon");
  require_file(cfg.lexicon, "lexicon");

  std::vector<SourceFile> sources;
  for (const auto& f : files) sources.push_back({source_label(f, data_root), file_hash_hex(f)});
  const auto stop_file = (fs::path(data_root) / "stopwords" / (cfg.language + ".txt")).string();
  const auto art_file = (fs::path(data_root) / "articles" / (cfg.language + ".txt")).string();

  ojson fp;
  fp["format"] = 1;
  fp["language"] = cfg.language;
  fp["tasks"] = tasks;
  fp["generation"] = generation_json(cfg.generation);
  ojson src = ojson::array();
  for (const auto& s : sources) src.push_back({s.file, s.hash});
  fp["sources"] = src;
  fp["lexicon"] = need_lexicon ? file_hash_hex(cfg.lexicon) : "";
  fp["stopwords"] = need_stoplist && fs::exists(stop_file) ? file_hash_hex(stop_file) : "";
  fp["articles"] = need_stoplist && fs::exists(art_file) ? file_hash_hex(art_file) : "";
  const std::string fingerprint = fingerprint_of(fp);
  const auto stamp = (fs::path(cfg.out) / "datasets" / cfg.language / ".generate.stamp").string();
  if (stamp_current(stamp, fingerprint)) return up_to_date(log);

  std::vector<Sentence> sentences;
  std::set<std::string> seen;
  std::size_t duplicates = 0;
  for (const auto& f : files) {
    for (auto& s : parse_conllu_file(f, cfg.language)) {
      if (!seen.insert(s.id).second) {
        ++duplicates;
        continue;
      }
      sentences.push_back(std::move(s));
    }
  }
  if (duplicates) log << "generate: skipped " << duplicates << " sentences with duplicate ids\n";

  std::optional<InflectionLexicon> lexicon;
  if (need_lexicon) lexicon = InflectionLexicon::load_file(cfg.lexicon, cfg.language);
  std::optional<StopList> stoplist;
  if (need_stoplist) stoplist = StopList::load(data_root, cfg.language);
  PerturbationResources res{lexicon ? &*lexicon : nullptr, stoplist ? &*stoplist : nullptr, inventory};

  std::vector<ProbingDataset> datasets(tasks.size());
  parallel_for(tasks.size(), cfg.jobs, [&](std::size_t i) {
    const auto& t = tasks[i];
    const auto subject = t.substr(t.find('/') + 1);
    try {
      switch (family_of_task(t)) {
        case TaskFamily::Features: datasets[i] = gen_feature_task(sentences, subject, inventory, cfg.generation); break;
        case TaskFamily::Masked: datasets[i] = gen_masked_task(sentences, subject, inventory, cfg.generation); break;
        case TaskFamily::Values: datasets[i] = gen_values_task(sentences, subject, inventory, cfg.generation); break;
        case TaskFamily::Perturbations:
          datasets[i] = gen_perturbation_task(sentences, cfg.language, parse_kind(subject), res, cfg.generation);
          break;
      }
    } catch (const GenerationError& e) {
      throw GenerationError(t + ": " + e.what());
    }
    datasets[i].sources = sources;
  });

  CommandResult r;
  std::vector<std::string> outputs;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto path = dataset_path(cfg, tasks[i]);
    put(path, serialize_instances(datasets[i].instances), r);
    put(manifest_path(path), render_manifest(datasets[i]), r);
    outputs.push_back(path);
    outputs.push_back(manifest_path(path));
    log << "  " << tasks[i] << ": " << datasets[i].instances.size() << " instances\n";
  }
  return finish(std::move(r), stamp, fingerprint, outputs, "generate", log);
}

namespace {

std::string report_base(const RunConfig& cfg, const std::string& dir, const std::vector<std::string>& parts) {
  std::string name;
  for (const auto& p : parts) {
    if (!name.empty()) name += "__";
    name += safe_name(p);
  }
  return (fs::path(cfg.out) / dir / name).string();
}

std::vector<double> column(const ProbeResult& r, double LayerScore::*field) {
  std::vector<double> v;
  for (const auto& l : r.layers) v.push_back(l.*field);
  return v;
}

}  // namespace

CommandResult cmd_probe(const RunConfig& cfg, const std::string& dataset_file, const std::vector<std::string>& repsets,
                        std::ostream& log) {
  if (repsets.empty()) throw ConfigError("probe needs at least one repset");
  const ProbingDataset dataset = read_dataset(dataset_file);
  CommandResult total;
  bool all_current = true;
  for (const auto& path : repsets) {
    const RepSet rs = read_repset(path);
    validate_binding(rs, dataset);
    const auto base = report_base(cfg, "probe",
                                  {rs.header.model_id, std::string(instance_name(rs.header.instance)),
                                   dataset.language, task_file_stem(dataset.task)});
    ojson fp;
    fp["dataset"] = dataset.checksum;
    fp["repset"] = file_hash_hex(path);
    fp["probe"] = probe_json(cfg.probe);
    fp["plots"] = cfg.plots;
    const auto fingerprint = fingerprint_of(fp);
    if (stamp_current(base + ".stamp", fingerprint)) continue;
    all_current = false;
    const ProbeResult result = layer_sweep(dataset, rs, cfg.probe);
    CommandResult r;
    std::vector<std::string> outputs{base + ".json", base + ".csv"};
    put(base + ".json", probe_result_json(result), r);
    put(base + ".csv", probe_result_csv(result), r);
    if (cfg.plots) {
      const std::string title = result.model_id + " (" + result.instance + ") " + result.task;
      put(base + ".svg",
          svg_line_plot(title, "ROC-AUC",
                        {{"test", column(result, &LayerScore::test_auc)}, {"dev", column(result, &LayerScore::val_auc)}},
                        0.4, 1.0),
          r);
      outputs.push_back(base + ".svg");
    }
    log << "probe: " << result.model_id << " " << result.instance << " " << result.task << " mean test AUC "
        << result.mean_test_auc() << "\n";
    write_stamp(base + ".stamp", fingerprint, outputs);
    total.written.insert(total.written.end(), r.written.begin(), r.written.end());
    total.unchanged.insert(total.unchanged.end(), r.unchanged.begin(), r.unchanged.end());
  }
  if (all_current) return up_to_date(log);
  return total;
}

CommandResult cmd_neurons(const RunConfig& cfg, const std::string& dataset_file,
                          const std::vector<std::string>& repsets, std::ostream& log) {
  if (repsets.empty()) throw ConfigError("neurons needs at least one repset");
  const ProbingDataset dataset = read_dataset(dataset_file);
  CommandResult total;
  bool all_current = true;
  for (const auto& path : repsets) {
    const RepSet rs = read_repset(path);
    validate_binding(rs, dataset);
    const auto base = report_base(cfg, "neurons",
                                  {rs.header.model_id, std::string(instance_name(rs.header.instance)),
                                   dataset.language, task_file_stem(dataset.task)});
    ojson fp;
    fp["dataset"] = dataset.checksum;
    fp["repset"] = file_hash_hex(path);
    fp["l1_grid"] = cfg.neurons.l1_grid;
    fp["l2_grid"] = cfg.neurons.l2_grid;
    fp["top_fraction"] = cfg.neurons.top_fraction;
    fp["mode"] = cfg.neurons.mode == SaliencyMode::MaxAbs ? "max-abs" : "cumulative-mass";
    fp["max_iterations"] = cfg.neurons.optimizer.max_iterations;
    fp["tolerance"] = cfg.neurons.optimizer.tolerance;
    fp["plots"] = cfg.plots;
    const auto fingerprint = fingerprint_of(fp);
    if (stamp_current(base + ".stamp", fingerprint)) continue;
    all_current = false;
    const NeuronReport report = neuron_sweep(dataset, rs, cfg.neurons);
    CommandResult r;
    std::vector<std::string> outputs{base + ".json", base + ".csv"};
    put(base + ".json", neuron_report_json(report), r);
    put(base + ".csv", neuron_report_csv(report), r);
    if (cfg.plots) {
      std::vector<double> counts(report.per_layer_counts.begin(), report.per_layer_counts.end());
      put(base + ".svg",
          svg_bar_plot(report.model_id + " (" + report.instance + ") " + report.task, "top neurons", counts), r);
      outputs.push_back(base + ".svg");
    }
    log << "neurons: " << report.model_id << " " << report.instance << " " << report.task << " top "
        << report.top_set.size() << " of " << report.n_layers * report.hidden_size << "\n";
    write_stamp(base + ".stamp", fingerprint, outputs);
    total.written.insert(total.written.end(), r.written.begin(), r.written.end());
    total.unchanged.insert(total.unchanged.end(), r.unchanged.begin(), r.unchanged.end());
  }
  if (all_current) return up_to_date(log);
  return total;
}

CommandResult cmd_ckasim(const RunConfig& cfg, const std::string& dataset_file, const std::string& pretrained,
                         const std::string& finetuned, bool layer_matrix, std::ostream& log) {
  const ProbingDataset dataset = read_dataset(dataset_file);
  if (dataset.family() != TaskFamily::Perturbations) {
    throw ConfigError("similarity analysis runs on perturbation datasets, got " + dataset.task);
  }
  std::optional<RepSet> pre, fine;
  if (!pretrained.empty()) pre = read_repset(pretrained);
  if (!finetuned.empty()) fine = read_repset(finetuned);
  std::map<ModelInstance, const RepSet*> available;
  if (pre) available[ModelInstance::PreTrained] = &*pre;
  if (fine) available[ModelInstance::FineTuned] = &*fine;
  const auto combos = instance_combinations(available);
  for (const auto& [inst, rs] : available) {
    validate_binding(*rs, dataset);
    if (rs->header.instance != inst) {
      throw BindingError("repset is marked " + std::string(instance_name(rs->header.instance)) + ", expected " +
                         std::string(instance_name(inst)));
    }
  }
  const auto base = report_base(cfg, "ckasim", {pre->header.model_id, dataset.language, task_file_stem(dataset.task)});
  ojson fp;
  fp["dataset"] = dataset.checksum;
  fp["pre"] = file_hash_hex(pretrained);
  fp["fine"] = file_hash_hex(finetuned);
  fp["matrix"] = layer_matrix;
  fp["plots"] = cfg.plots;
  const auto fingerprint = fingerprint_of(fp);
  if (stamp_current(base + ".stamp", fingerprint)) return up_to_date(log);

  const Pairing pairing = make_pairing(dataset);
  std::vector<SimCurve> curves;
  for (const auto& c : combos) {
    const RepSet& a = *available.at(c.first);
    const RepSet& b = *available.at(c.second);
    SimCurve curve = ckasim_curve(a, b, pairing, cfg.jobs);
    curve.task = dataset.task;
    if (layer_matrix) curve.layer_matrix = ckasim_matrix(a, b, pairing, cfg.jobs);
    curves.push_back(std::move(curve));
  }
  CommandResult r;
  std::vector<std::string> outputs{base + ".json", base + ".csv"};
  put(base + ".json", sim_curves_json(curves), r);
  put(base + ".csv", sim_curves_csv(curves), r);
  if (cfg.plots) {
    std::vector<Series> series;
    for (const auto& c : curves) series.push_back({combination_name(c.combination), c.scores});
    put(base + ".svg", svg_line_plot(pre->header.model_id + " " + dataset.task, "ckasim", series), r);
    outputs.push_back(base + ".svg");
  }
  return finish(std::move(r), base + ".stamp", fingerprint, outputs, "ckasim", log);
}

CommandResult cmd_baseline(const RunConfig& cfg, const std::string& dataset_file, std::ostream& log) {
  const ProbingDataset dataset = read_dataset(dataset_file);
  BaselineConfig bc = cfg.baseline;
  bc.vectors_path = cfg.vectors;
  bc.sidecar_path = cfg.sidecar;
  bc.validate();
  const auto base = report_base(cfg, "baseline",
                                {std::string(baseline_name(bc.kind)), dataset.language, task_file_stem(dataset.task)});
  ojson fp;
  fp["dataset"] = dataset.checksum;
  fp["kind"] = baseline_name(bc.kind);
  fp["ngram_range"] = {bc.ngram_range.first, bc.ngram_range.second};
  fp["vocabulary_cap"] = bc.vocabulary_cap;
  fp["sublinear_tf"] = bc.sublinear_tf;
  fp["lowercase"] = bc.lowercase;
  fp["vectors"] = bc.vectors_path.empty() ? "" : file_hash_hex(bc.vectors_path);
  fp["sidecar"] = bc.sidecar_path.empty() ? "" : file_hash_hex(bc.sidecar_path);
  fp["probe"] = probe_json(cfg.probe);
  const auto fingerprint = fingerprint_of(fp);
  if (stamp_current(base + ".stamp", fingerprint)) return up_to_date(log);

  const ProbeResult result = run_baseline(dataset, bc, cfg.probe);
  CommandResult r;
  put(base + ".json", probe_result_json(result), r);
  put(base + ".csv", probe_result_csv(result), r);
  log << "baseline: " << result.model_id << " " << result.task << " test AUC " << result.mean_test_auc() << "\n";
  return finish(std::move(r), base + ".stamp", fingerprint, {base + ".json", base + ".csv"}, "baseline", log);
}

std::vector<ReportRow> collect_reports(const std::string& dir) {
  std::vector<ReportRow> rows;
  for (const char* sub : {"probe", "baseline"}) {
    const fs::path d = fs::path(dir) / sub;
    if (!fs::is_directory(d)) continue;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(d)) {
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const ProbeResult r = parse_probe_result_json(read_text(f.string()));
      rows.push_back({r.model_id, r.instance, r.task, r.language, r.layers.size(), r.mean_test_auc()});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.model_id, a.instance, a.language, a.task) < std::tie(b.model_id, b.instance, b.language, b.task);
  });
  return rows;
}

CommandResult cmd_report(const RunConfig& cfg, std::ostream& log) {
  const auto rows = collect_reports(cfg.out);
  std::string csv = "model_id,instance,task,language,layers,mean_test_auc\n";
  ojson arr = ojson::array();
  for (const auto& r : rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", r.mean_test_auc);
    csv += r.model_id + "," + r.instance + "," + r.task + "," + r.language + "," + std::to_string(r.layers) + "," +
           buf + "\n";
    arr.push_back({{"model_id", r.model_id},
                   {"instance", r.instance},
                   {"task", r.task},
                   {"language", r.language},
                   {"layers", r.layers},
                   {"mean_test_auc", r.mean_test_auc}});
  }
  CommandResult res;
  const auto dir = fs::path(cfg.out) / "report";
  put((dir / "summary.csv").string(), csv, res);
  put((dir / "summary.json").string(), arr.dump(2) + "\n", res);
  log << csv;
  return res;
}

int exit_code_for(const std::string& kind) {
  static const std::map<std::string, int> codes{{"config", 2},    {"parse", 3},     {"input", 4},
                                                {"integrity", 5}, {"format", 5},    {"binding", 6},
                                                {"shape", 6},     {"bounds", 6},    {"generation", 7}};
  auto it = codes.find(kind);
  return it == codes.end() ? 1 : it->second;
}

std::string error_report(const std::string& command, const std::string& kind, const std::string& message) {
  ojson j;
  j["error"] = {{"kind", kind}, {"message", message}, {"command", command}};
  return j.dump() + "\n";
}

}  // namespace morphcall
