// Prints one line per acceptance criterion:
//   PASS | FAIL | SKIP | DECLARED  <criterion>  <details>
// Exit status is nonzero iff some line is FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "../support.hpp"
#include "morphcall/analysis.hpp"
#include "morphcall/baselines.hpp"
#include "morphcall/error.hpp"
#include "morphcall/lexicon.hpp"
#include "morphcall/metrics.hpp"
#include "morphcall/perturb.hpp"
#include "morphcall/pipeline.hpp"
#include "morphcall/simkit.hpp"

using namespace morphcall;
namespace fs = std::filesystem;

namespace {

const char* const kLangs[] = {"ru", "en", "de", "fr"};

struct Outcome {
  enum Status { Pass, Fail, Skip, Declared } status = Pass;
  std::string detail;
};

class Notes {
 public:
  void fail(const std::string& what) {
    if (failures_++ < 5) problems_ += (problems_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    return problems_ + (failures_ > 5 ? " (+" + std::to_string(failures_ - 5) + " more)" : "");
  }

 private:
  std::size_t failures_ = 0;
  std::string problems_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

RunConfig fixture_config(const std::string& lang, const std::string& out) {
  RunConfig c;
  c.language = lang;
  c.treebanks = {testing::fixture(lang + ".conllu")};
  c.lexicon = testing::fixture("lexicon/" + lang + ".tsv");
  c.data_root = testing::data_dir();
  c.out = out;
  c.plots = false;
  c.propagate();
  return c;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = testing::slurp(e.path().string());
  }
  return files;
}

// Generated fixture datasets, shared by several criteria.
struct Generated {
  testing::TempDir first, second;
  double seconds = 0;
  std::map<std::string, std::vector<ProbingDataset>> datasets;  // by language
  std::string error;
};

Generated& generated() {
  static Generated out;
  static bool done = false;
  if (!done) {
    done = true;
    try {
      auto t0 = std::chrono::steady_clock::now();
      for (const char* lang : kLangs) {
        std::ostringstream log;
        cmd_generate(fixture_config(lang, out.first.file("out")), log);
        cmd_generate(fixture_config(lang, out.second.file("out")), log);
      }
      out.seconds = seconds_since(t0);
      for (const char* lang : kLangs) {
        auto cfg = fixture_config(lang, out.first.file("out"));
        for (const auto& t : all_tasks(lang, FeatureInventory::defaults())) {
          out.datasets[lang].push_back(read_dataset(dataset_path(cfg, t)));
        }
      }
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  }
  return out;
}

Outcome determinism() {
  auto& g = generated();
  if (!g.error.empty()) return {Outcome::Fail, "generate failed: " + g.error};
  auto a = tree(g.first.file("out"));
  auto b = tree(g.second.file("out"));
  std::size_t datasets = 0;
  for (const auto& [k, v] : a) datasets += k.ends_with(".jsonl");
  Notes n;
  if (a != b) n.fail("output trees differ");
  if (g.seconds >= 60.0) n.fail("runtime " + fmt("%.1f", g.seconds) + " s");
  std::size_t read_back = 0;
  for (const auto& [lang, ds] : g.datasets) read_back += ds.size();
  if (read_back != datasets) n.fail("read back " + std::to_string(read_back) + " of " + std::to_string(datasets));
  return {n.ok() ? Outcome::Pass : Outcome::Fail,
          std::to_string(a.size()) + " files, " + std::to_string(datasets) + " datasets byte-identical across runs, " +
              "checksums verified, two full runs in " + fmt("%.1f", g.seconds) + " s (limit 60)" +
              (n.ok() ? "" : "; " + n.summary())};
}

Outcome split_balance() {
  auto& g = generated();
  if (!g.error.empty()) return {Outcome::Fail, "generate failed: " + g.error};
  Notes n;
  std::size_t checked = 0;
  for (const auto& [lang, datasets] : g.datasets) {
    std::set<std::string> eligible;
    for (const auto& s : filter_by_length(parse_conllu_file(testing::fixture(lang + ".conllu"), lang))) {
      eligible.insert(s.id);
    }
    for (const auto& d : datasets) {
      ++checked;
      const std::string tag = lang + ":" + d.task;
      std::map<std::string, Split> where;
      for (const auto& inst : d.instances) {
        auto [it, fresh] = where.emplace(inst.sentence_id, inst.split);
        if (it->second != inst.split) n.fail(tag + " sentence " + inst.sentence_id + " in two splits");
        if (!eligible.count(inst.sentence_id)) n.fail(tag + " sentence " + inst.sentence_id + " outside 5-25");
        const bool original = d.family() != TaskFamily::Perturbations || inst.label == 0;
        if (original && (inst.tokens.size() < 5 || inst.tokens.size() > 25)) {
          n.fail(tag + " instance " + inst.id + " has " + std::to_string(inst.tokens.size()) + " tokens");
        }
      }
      for (const auto& [split, counts] : d.class_counts()) {
        for (auto c : counts) {
          if (c != counts[0] || c == 0) n.fail(tag + " unbalanced in " + std::string(split_name(split)));
        }
      }
      std::size_t total = 0;
      for (const auto& [s, c] : d.assigned_sentences) total += c;
      if (d.family() == TaskFamily::Features || d.family() == TaskFamily::Masked) {
        if (total != eligible.size()) n.fail(tag + " split " + std::to_string(total) + " of " +
                                             std::to_string(eligible.size()) + " sentences");
      }
      for (Split s : kSplits) {
        const double want = d.config.split_ratios[static_cast<std::size_t>(s)] * static_cast<double>(total);
        const double got = static_cast<double>(d.assigned_sentences.count(s) ? d.assigned_sentences.at(s) : 0);
        if (std::abs(got - want) > 1.0) n.fail(tag + " " + std::string(split_name(s)) + " has " + fmt("%.0f", got) +
                                               " sentences, expected " + fmt("%.1f", want));
        if (d.sentence_counts()[s] > static_cast<std::size_t>(got)) n.fail(tag + " split grew after balancing");
      }
    }
  }
  return {n.ok() ? Outcome::Pass : Outcome::Fail,
          std::to_string(checked) + " datasets: disjoint splits, exact per-class balance, 5-25 tokens, "
          "80/10/10 sentence split within 1" + (n.ok() ? "" : "; " + n.summary())};
}

std::size_t hamming(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size()) return a.size() + b.size();
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

bool strict_subsequence(const std::vector<std::string>& sub, const std::vector<std::string>& full) {
  if (sub.size() >= full.size()) return false;
  std::size_t j = 0;
  for (const auto& t : full) {
    if (j < sub.size() && sub[j] == t) ++j;
  }
  return j == sub.size();
}

Outcome perturbation_validity() {
  auto& g = generated();
  if (!g.error.empty()) return {Outcome::Fail, "generate failed: " + g.error};
  Notes n;
  std::size_t inflectional = 0, removals = 0;
  for (const auto& [lang, datasets] : g.datasets) {
    auto lexicon = InflectionLexicon::load_file(testing::fixture("lexicon/" + lang + ".tsv"), lang);
    for (const auto& d : datasets) {
      if (d.family() != TaskFamily::Perturbations) continue;
      std::map<std::string, const TaskInstance*> originals;
      for (const auto& i : d.instances) {
        if (i.label == 0) originals[i.meta.at("pair")] = &i;
      }
      for (const auto& i : d.instances) {
        if (i.label != 1) continue;
        auto it = originals.find(i.meta.at("pair"));
        if (it == originals.end()) {
          n.fail(i.id + " has no original");
          continue;
        }
        const auto& orig = it->second->tokens;
        if (i.meta.count("feature")) {
          ++inflectional;
          if (hamming(orig, i.tokens) != 1) n.fail(i.id + " edits more than one token");
          const auto pos = std::stoul(i.meta.at("edit_positions"));
          bool sound = false;
          for (const auto& a : lexicon.analyze(i.tokens.at(pos))) {
            auto f = a.bundle.find(i.meta.at("feature"));
            sound |= f != a.bundle.end() && f->second == i.meta.at("new_value");
          }
          if (!sound) n.fail(i.id + " new form lacks " + i.meta.at("feature") + "=" + i.meta.at("new_value"));
        } else {
          ++removals;
          if (!strict_subsequence(i.tokens, orig)) n.fail(i.id + " is not a strict subsequence");
        }
      }
    }
  }

  struct Example {
    const char* lang;
    const char* sentence;
    PerturbationKind kind;
    const char* value;
    std::size_t position;
    const char* expected;
  };
  const Example examples[] = {
      {"ru", "ru-example-case", PerturbationKind::SubjectCase, "Acc", 1, "вас"},
      {"ru", "ru-example-gender", PerturbationKind::PredicateGender, "Fem", 1, "была"},
      {"ru", "ru-example-person", PerturbationKind::PredicatePerson, "2", 1, "поедешь"},
      {"de", "de-example-deictic", PerturbationKind::DeicticNumber, "Plur", 2, "diesen"},
  };
  std::size_t reproduced = 0;
  for (const auto& ex : examples) {
    auto sentences = parse_conllu_file(testing::fixture(std::string(ex.lang) + ".conllu"), ex.lang);
    auto lexicon = InflectionLexicon::load_file(testing::fixture(std::string("lexicon/") + ex.lang + ".tsv"), ex.lang);
    const Sentence* s = nullptr;
    for (const auto& c : sentences) {
      if (c.id == ex.sentence) s = &c;
    }
    if (!s) {
      n.fail(std::string("missing sentence ") + ex.sentence);
      continue;
    }
    AgreementOptions o;
    o.target_value = ex.value;
    auto p = perturb_agreement(*s, ex.kind, lexicon, FeatureInventory::defaults(), o);
    if (!p || p->perturbed.at(ex.position) != ex.expected || hamming(p->original, p->perturbed) != 1) {
      n.fail(std::string(ex.sentence) + " did not give " + ex.expected);
    } else {
      ++reproduced;
    }
  }
  if (inflectional == 0 || removals == 0) n.fail("no pairs of some type were generated");
  return {n.ok() ? Outcome::Pass : Outcome::Fail,
          std::to_string(inflectional) + " inflectional pairs with Hamming distance 1 and sound lexicon bundles, " +
              std::to_string(removals) + " removal pairs as strict subsequences, " + std::to_string(reproduced) +
              "/4 worked examples (vy->vas, byl->byla, poedu->poedesh', dieser->diesen)" +
              (n.ok() ? "" : "; " + n.summary())};
}

Outcome auc_oracle() {
  Notes n;
  const double hand = roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1});
  if (hand != 0.75) n.fail("hand case gave " + fmt("%.17g", hand));
  Rng rng(20210601);
  std::size_t with_ties = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 2 + rng.below(49);
    std::vector<double> s(len);
    std::vector<int> y(len);
    for (std::size_t i = 0; i < len; ++i) {
      s[i] = trial % 2 ? static_cast<double>(rng.below(6)) / 5.0 : rng.uniform();
      y[i] = static_cast<int>(rng.below(2));
    }
    y[0] = 0;
    y[1] = 1;
    with_ties += trial % 2;
    const double a = roc_auc(s, y), b = testing::pairwise_auc(s, y);
    if (a != b) n.fail("trial " + std::to_string(trial) + ": " + fmt("%.17g", a) + " vs " + fmt("%.17g", b));
  }
  return {n.ok() ? Outcome::Pass : Outcome::Fail,
          "1000 random instances (n<=50, " + std::to_string(with_ties) + " with heavy ties) exactly equal to "
          "pairwise counting; [0.1,0.4,0.35,0.8] -> " + fmt("%.2f", hand) + (n.ok() ? "" : "; " + n.summary())};
}

Outcome optimizer_checks() {
  Notes n;
  Rng rng(4242);
  double worst_lr = 0, worst_en = 0;
  for (int t = 0; t < 50; ++t) {
    auto p = testing::gradient_problem(rng, 20, 4, 3);
    const double C = 0.25 * (1 + static_cast<double>(rng.below(16)));
    worst_lr = std::max(worst_lr, testing::logistic_gradient_error(p, C));
    worst_en = std::max(worst_en, testing::elastic_gradient_error(p, 0.01 + rng.uniform() * 0.1, rng.uniform()));
  }
  if (worst_lr >= 1e-4) n.fail("logistic gradient error " + fmt("%.2e", worst_lr));
  if (worst_en >= 1e-4) n.fail("elastic-net gradient error " + fmt("%.2e", worst_en));

  Eigen::MatrixXd X;
  std::vector<int> y;
  testing::noisy_logistic(rng, 400, 6, X, y);
  ProbeConfig pc;
  pc.max_iterations = 5000;
  pc.tolerance = 1e-10;
  ElasticNetConfig ec;
  ec.max_iterations = 20000;
  ec.tolerance = 1e-10;
  const double lr = testing::probe_mean_nll(fit_logreg(X, y, 1e12, pc), X, y);
  const double en = testing::probe_mean_nll(fit_elastic_net(X, y, 0.0, 0.0, ec), X, y);
  const double gap = std::abs(lr - en);
  if (gap >= 1e-3) n.fail("unregularized objective gap " + fmt("%.2e", gap));

  Eigen::MatrixXd Z;
  std::vector<int> yz;
  testing::noisy_logistic(rng, 400, 30, Z, yz);
  const double small = testing::small_weight_fraction(fit_elastic_net(Z, yz, 10.0, 0.0, ElasticNetConfig{}), 1e-6);
  if (small < 0.9) n.fail("l1=10 left " + fmt("%.0f", 100 * (1 - small)) + "% weights");

  return {n.ok() ? Outcome::Pass : Outcome::Fail,
          "50 instances: max gradient rel. error logistic " + fmt("%.1e", worst_lr) + ", elastic net " +
              fmt("%.1e", worst_en) + " (limit 1e-4); l1=l2=0 vs logistic objective gap " + fmt("%.1e", gap) +
              " (limit 1e-3); l1=10 zeroes " + fmt("%.0f", 100 * small) + "% of weights (limit 90%)" +
              (n.ok() ? "" : "; " + n.summary())};
}

RepSet cls_repset(Rng& rng, std::size_t n, std::size_t layers, std::size_t hidden) {
  RepSet r;
  r.header.pooling = Pooling::Cls;
  r.header.n_samples = n;
  r.header.n_layers = layers;
  r.header.hidden_size = hidden;
  r.data.resize(r.header.value_count());
  for (auto& v : r.data) v = static_cast<float>(rng.normal());
  return r;
}

Outcome cka_suite() {
  auto t0 = std::chrono::steady_clock::now();
  Notes n;
  Rng rng(777);
  double self = 0, orth = 0, scale = 0, sym = 0;
  for (int t = 0; t < 50; ++t) {
    const auto rows = 10 + static_cast<Eigen::Index>(rng.below(60));
    const auto d1 = 2 + static_cast<Eigen::Index>(rng.below(20));
    const auto d2 = 2 + static_cast<Eigen::Index>(rng.below(20));
    Eigen::MatrixXd X = testing::gaussian(rng, rows, d1);
    Eigen::MatrixXd Y = testing::gaussian(rng, rows, d2);
    const double c = (rng.uniform() + 0.1) * (rng.below(2) ? 10.0 : -10.0);
    self = std::max(self, std::abs(linear_cka(X, X) - 1.0));
    const double base = linear_cka(X, Y);
    orth = std::max(orth, std::abs(linear_cka(X * testing::orthogonal(rng, d1), Y) - base));
    orth = std::max(orth, std::abs(linear_cka(X, X * testing::orthogonal(rng, d1)) - 1.0));
    scale = std::max(scale, std::abs(linear_cka(X, c * Y) - base));
    sym = std::max(sym, std::abs(linear_cka(Y, X) - base));
    if (base < 0.0 || base > 1.0 + 1e-9) n.fail("score " + fmt("%.6g", base) + " outside [0,1]");
  }
  if (self > 1e-9) n.fail("self-similarity error " + fmt("%.1e", self));
  if (orth > 1e-6) n.fail("orthogonal invariance error " + fmt("%.1e", orth));
  if (scale > 1e-6) n.fail("scaling invariance error " + fmt("%.1e", scale));
  if (sym > 1e-12) n.fail("symmetry error " + fmt("%.1e", sym));

  auto a = cls_repset(rng, 500, 13, 64);
  auto b = cls_repset(rng, 500, 13, 64);
  const auto curve = ckasim_curve(a, b, identity_pairing(500));
  double worst = 0;
  for (double s : curve.scores) worst = std::max(worst, s);
  if (worst >= 0.2) n.fail("independent data scored " + fmt("%.3f", worst));
  const double secs = seconds_since(t0);
  if (secs >= 10.0) n.fail("runtime " + fmt("%.1f", secs) + " s");
  return {n.ok() ? Outcome::Pass : Outcome::Fail,
          "self " + fmt("%.0e", self) + ", orthogonal " + fmt("%.0e", orth) + ", scaling " + fmt("%.0e", scale) +
              ", symmetry " + fmt("%.0e", sym) + "; independent n=500 curve max " + fmt("%.3f", worst) +
              " (limit 0.2); " + fmt("%.2f", secs) + " s (limit 10)" + (n.ok() ? "" : "; " + n.summary())};
}

Outcome synthetic_sweep() {
  Notes n;
  const std::size_t layers = 5, hidden = 8, signal = 3;
  auto d = testing::synthetic_dataset(20000, 2, 101);
  auto r = testing::signal_repset(d, layers, hidden, signal, 0.8, 202);
  auto res = layer_sweep(d, r, ProbeConfig{});
  double signal_auc = 0, worst_noise = 0;
  for (const auto& l : res.layers) {
    if (l.layer == signal) {
      signal_auc = l.test_auc;
      if (l.test_auc < 0.99) n.fail("signal layer AUC " + fmt("%.4f", l.test_auc));
    } else {
      worst_noise = std::max(worst_noise, std::abs(l.test_auc - 0.5));
    }
  }
  if (worst_noise > 0.05) n.fail("noise layer off chance by " + fmt("%.3f", worst_noise));

  auto dn = testing::synthetic_dataset(2000, 2, 303);
  auto rn = testing::signal_repset(dn, layers, hidden, signal, 0.8, 404);
  auto rep = neuron_sweep(dn, rn, NeuronProbeConfig{});
  const double share = static_cast<double>(rep.per_layer_counts.at(signal)) / static_cast<double>(rep.top_set.size());
  if (share < 0.8) n.fail("signal layer holds " + fmt("%.0f", 100 * share) + "% of top neurons");
  return {n.ok() ? Outcome::Pass : Outcome::Fail,
          "signal layer test AUC " + fmt("%.4f", signal_auc) + " (limit 0.99), noise layers within " +
              fmt("%.3f", worst_noise) + " of 0.5 (limit 0.05), " + std::to_string(rep.per_layer_counts.at(signal)) +
              "/" + std::to_string(rep.top_set.size()) + " top neurons in the signal layer (limit 80%)" +
              (n.ok() ? "" : "; " + n.summary())};
}

// Needs MORPHCALL_UD_DIR, a directory holding the UD treebank folders named
// by the presets (UD_Russian-SynTagRus, ...). The Russian agreement
// perturbation also needs MORPHCALL_RU_LEXICON, a full-coverage lexicon TSV.
Outcome reference_scores() {
  const char* ud = std::getenv("MORPHCALL_UD_DIR");
  if (!ud || !*ud) {
    return {Outcome::Skip,
            "set MORPHCALL_UD_DIR to the UD treebank directory (and MORPHCALL_RU_LEXICON for the Russian "
            "perturbation) to run: char TF-IDF ru Number 0.97+-0.03, char TF-IDF ru predicate_person "
            "0.81+-0.05, char count fr Number 0.52+-0.05"};
  }
  auto t0 = std::chrono::steady_clock::now();
  testing::TempDir dir;
  Notes n;
  std::vector<std::string> parts;
  fs::create_directory_symlink(fs::absolute(ud), dir.path() / "ud");
  for (const char* sub : {"stopwords", "articles"}) {
    fs::create_directory_symlink(fs::path(testing::data_dir()) / sub, dir.path() / sub);
  }
  auto run = [&](const std::string& lang, const std::string& task, BaselineKind kind, double target, double tol,
                 const std::string& lexicon) {
    try {
      RunConfig cfg;
      cfg.language = lang;
      cfg.preset = lang;
      cfg.data_root = dir.path().string();
      cfg.lexicon = lexicon;
      cfg.tasks = {task};
      cfg.out = dir.file("out");
      cfg.plots = false;
      cfg.propagate();
      std::ostringstream log;
      cmd_generate(cfg, log);
      auto d = read_dataset(dataset_path(cfg, task));
      BaselineConfig bc;
      bc.kind = kind;
      const double auc = run_baseline(d, bc, cfg.probe).layers.at(0).test_auc;
      const bool ok = std::abs(auc - target) <= tol;
      if (!ok) n.fail(lang + " " + task + " " + fmt("%.3f", auc));
      parts.push_back(lang + " " + task + " " + std::string(baseline_name(kind)) + " " + fmt("%.3f", auc) + " (" +
                      fmt("%.2f", target) + "+-" + fmt("%.2f", tol) + ")");
    } catch (const std::exception& e) {
      n.fail(lang + " " + task + ": " + e.what());
    }
  };
  run("ru", "features/Number", BaselineKind::CharTfidf, 0.97, 0.03, "");
  const char* lex = std::getenv("MORPHCALL_RU_LEXICON");
  if (lex && *lex) {
    run("ru", "perturbations/predicate_person", BaselineKind::CharTfidf, 0.81, 0.05, lex);
  } else {
    n.fail("MORPHCALL_RU_LEXICON not set, predicate_person not run");
  }
  run("fr", "features/Number", BaselineKind::CharCount, 0.52, 0.05, "");
  const double secs = seconds_since(t0);
  std::string detail;
  for (const auto& p : parts) detail += (detail.empty() ? "" : "; ") + p;
  detail += "; " + fmt("%.0f", secs) + " s (target 2700)";
  return {n.ok() ? Outcome::Pass : Outcome::Fail, detail + (n.ok() ? "" : "; " + n.summary())};
}

Outcome transformer_numbers() {
  return {Outcome::Declared,
          "transformer probing scores need GPU extraction and POS fine-tuning; covered here by the synthetic "
          "repset suite, full recipe in README"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"determinism-integrity", determinism},
      {"split-balance", split_balance},
      {"perturbation-validity", perturbation_validity},
      {"auc-oracle", auc_oracle},
      {"optimizer-checks", optimizer_checks},
      {"cka-suite", cka_suite},
      {"synthetic-layer-sweep", synthetic_sweep},
      {"baseline-reference-scores", reference_scores},
      {"transformer-scores", transformer_numbers},
  };
  bool failed = false;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    static const char* labels[] = {"PASS", "FAIL", "SKIP", "DECLARED"};
    std::printf("%-8s %-26s %s\n", labels[o.status], name, o.detail.c_str());
    std::fflush(stdout);
    failed |= o.status == Outcome::Fail;
  }
  return failed ? 1 : 0;
}
