#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "morphcall/error.hpp"
#include "morphcall/pipeline.hpp"

using namespace morphcall;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::string out;
  bool no_plots = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON run configuration");
  app->add_option("--seed", c.seed, "random seed (overrides the config)");
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output directory");
  app->add_flag("--no-plots", c.no_plots, "skip SVG plots");
}

RunConfig build(const Common& c) {
  RunConfig cfg = c.config.empty() ? parse_run_config("{}", "") : load_run_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.jobs) cfg.jobs = *c.jobs;
  if (!c.out.empty()) cfg.out = c.out;
  if (c.no_plots) cfg.plots = false;
  cfg.propagate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morphosyntactic probing suite: dataset generation and representation analysis"};
  app.require_subcommand(1);

  Common common;
  std::string language, preset, lexicon, data_root, dataset, pre, fine, kind, vectors, sidecar;
  std::vector<std::string> treebanks, tasks, repsets;
  bool matrix = false;

  auto* gen = app.add_subcommand("generate", "build probing datasets from CoNLL-U treebanks");
  add_common(gen, common);
  gen->add_option("--language", language, "ru, en, de or fr");
  gen->add_option("--treebank", treebanks, "CoNLL-U file or glob (repeatable)");
  gen->add_option("--preset", preset, "treebank preset under <data root>/ud");
  gen->add_option("--task", tasks, "task tag such as features/Number (repeatable; default all)");
  gen->add_option("--lexicon", lexicon, "inflection lexicon TSV");
  gen->add_option("--data-root", data_root, "directory with stopwords/ and articles/");

  auto* probe = app.add_subcommand("probe", "layer-wise logistic-regression probing");
  add_common(probe, common);
  probe->add_option("--dataset", dataset, "dataset JSONL")->required();
  probe->add_option("--repset", repsets, "MCREP file (repeatable)")->required();

  auto* neurons = app.add_subcommand("neurons", "elastic-net neuron ranking");
  add_common(neurons, common);
  neurons->add_option("--dataset", dataset, "dataset JSONL")->required();
  neurons->add_option("--repset", repsets, "MCREP file (repeatable)")->required();

  auto* cka = app.add_subcommand("ckasim", "layer similarity of original and perturbed sentences");
  add_common(cka, common);
  cka->add_option("--dataset", dataset, "perturbation dataset JSONL")->required();
  cka->add_option("--pretrained", pre, "cls-pooled MCREP of the pre-trained model");
  cka->add_option("--finetuned", fine, "cls-pooled MCREP of the fine-tuned model");
  cka->add_flag("--matrix", matrix, "also emit the full layer-by-layer matrix");

  auto* base = app.add_subcommand("baseline", "count-based and static-vector baselines");
  add_common(base, common);
  base->add_option("--dataset", dataset, "dataset JSONL")->required();
  base->add_option("--kind", kind, "char-count, char-ngram-tfidf, subword-tfidf or static-vectors");
  base->add_option("--vectors", vectors, "static vectors in text format");
  base->add_option("--sidecar", sidecar, "subword sidecar JSONL");

  auto* report = app.add_subcommand("report", "layer-averaged summary of all reports");
  add_common(report, common);

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = build(common);
    if (!language.empty()) cfg.language = language;
    if (!treebanks.empty()) cfg.treebanks = treebanks;
    if (!preset.empty()) cfg.preset = preset;
    if (!tasks.empty()) cfg.tasks = tasks;
    if (!lexicon.empty()) cfg.lexicon = lexicon;
    if (!data_root.empty()) cfg.data_root = data_root;
    if (!kind.empty()) cfg.baseline.kind = parse_baseline(kind);
    if (!vectors.empty()) cfg.vectors = vectors;
    if (!sidecar.empty()) cfg.sidecar = sidecar;

    if (command == "generate") {
      cmd_generate(cfg, std::cout);
    } else if (command == "probe") {
      cmd_probe(cfg, dataset, repsets, std::cout);
    } else if (command == "neurons") {
      cmd_neurons(cfg, dataset, repsets, std::cout);
    } else if (command == "ckasim") {
      cmd_ckasim(cfg, dataset, pre, fine, matrix, std::cout);
    } else if (command == "baseline") {
      cmd_baseline(cfg, dataset, std::cout);
    } else {
      cmd_report(cfg, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << error_report(command, e.kind(), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << error_report(command, "internal", e.what());
    return 1;
  }
  return 0;
}
