#include "morphcall/perturb.hpp"

#include <algorithm>

#include "morphcall/error.hpp"
#include "morphcall/rng.hpp"
#include "morphcall/taskgen.hpp"
#include "morphcall/utf8.hpp"

namespace morphcall {

std::string_view kind_name(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::StopwordsRemoval: return "stopwords_removal";
    case PerturbationKind::ArticleRemoval: return "article_removal";
    case PerturbationKind::SubjectNumber: return "subject_number";
    case PerturbationKind::SubjectCase: return "subject_case";
    case PerturbationKind::PredicateNumber: return "predicate_number";
    case PerturbationKind::PredicateGender: return "predicate_gender";
    case PerturbationKind::PredicatePerson: return "predicate_person";
    case PerturbationKind::DeicticNumber: return "deictic_number";
  }
  return "";
}

PerturbationKind parse_kind(std::string_view name) {
  for (auto k : kAllPerturbations) {
    if (kind_name(k) == name) return k;
  }
  throw ConfigError("unknown perturbation kind '" + std::string(name) + "'");
}

bool is_removal(PerturbationKind kind) {
  return kind == PerturbationKind::StopwordsRemoval || kind == PerturbationKind::ArticleRemoval;
}

std::string_view governed_feature(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::SubjectNumber:
    case PerturbationKind::PredicateNumber:
    case PerturbationKind::DeicticNumber: return "Number";
    case PerturbationKind::SubjectCase: return "Case";
    case PerturbationKind::PredicateGender: return "Gender";
    case PerturbationKind::PredicatePerson: return "Person";
    default: return "";
  }
}

bool kind_supported(PerturbationKind kind, std::string_view language) {
  if (!is_supported_language(language)) return false;
  switch (kind) {
    case PerturbationKind::StopwordsRemoval:
    case PerturbationKind::SubjectNumber:
    case PerturbationKind::PredicateNumber: return true;
    case PerturbationKind::ArticleRemoval: return language == "en" || language == "fr" || language == "de";
    case PerturbationKind::SubjectCase:
    case PerturbationKind::PredicateGender:
    case PerturbationKind::PredicatePerson: return language == "ru";
    case PerturbationKind::DeicticNumber: return language == "en" || language == "de";
  }
  return false;
}

std::vector<PerturbationKind> supported_kinds(std::string_view language) {
  std::vector<PerturbationKind> out;
  for (auto k : kAllPerturbations) {
    if (kind_supported(k, language)) out.push_back(k);
  }
  return out;
}

std::optional<std::size_t> find_main_subject(const Sentence& sentence) {
  auto root = sentence.root_position();
  if (!root) return std::nullopt;
  const int root_index = sentence.tokens[*root].index;
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const Token& t = sentence.tokens[i];
    if (t.head == root_index && t.deprel.starts_with("nsubj")) {
      if (found) return std::nullopt;
      found = i;
    }
  }
  return found;
}

std::optional<std::size_t> find_main_predicate(const Sentence& sentence) {
  auto root = sentence.root_position();
  if (!root) return std::nullopt;
  const Token& r = sentence.tokens[*root];
  if (r.upos == "VERB" || r.upos == "AUX") return root;
  std::optional<std::size_t> first_aux;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const Token& t = sentence.tokens[i];
    if (t.head != r.index || t.upos != "AUX") continue;
    if (feature_value(t, "VerbForm") == std::optional<std::string>("Fin")) return i;
    if (!first_aux) first_aux = i;
  }
  return first_aux;
}

std::optional<std::size_t> find_deictic(const Sentence& sentence) {
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const Token& t = sentence.tokens[i];
    if ((t.upos == "DET" || t.upos == "PRON") && feature_value(t, "PronType") == std::optional<std::string>("Dem") &&
        has_feature(t, "Number")) {
      return i;
    }
  }
  return std::nullopt;
}

namespace {

std::optional<PerturbedPair> remove_where(const Sentence& sentence, PerturbationKind kind,
                                          const auto& should_remove) {
  PerturbedPair pair;
  pair.original = sentence.forms();
  pair.edit.kind = kind;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    if (should_remove(sentence.tokens[i])) {
      pair.edit.positions.push_back(i);
      pair.edit.old_forms.push_back(sentence.tokens[i].form);
    } else {
      pair.perturbed.push_back(sentence.tokens[i].form);
    }
  }
  if (pair.edit.positions.empty() || pair.perturbed.size() < 2) return std::nullopt;
  return pair;
}

}  // namespace

std::optional<PerturbedPair> remove_stopwords(const Sentence& sentence, const StopList& stoplist) {
  return remove_where(sentence, PerturbationKind::StopwordsRemoval,
                      [&](const Token& t) { return stoplist.is_stopword(t.form); });
}

std::optional<PerturbedPair> remove_articles(const Sentence& sentence, const StopList& stoplist) {
  if (!kind_supported(PerturbationKind::ArticleRemoval, sentence.language) || !stoplist.has_articles()) {
    throw ConfigError("article removal is not available for language '" + sentence.language + "'");
  }
  return remove_where(sentence, PerturbationKind::ArticleRemoval, [&](const Token& t) {
    if (t.upos != "DET" || !stoplist.is_article(t.form)) return false;
    if (t.feats.empty()) return true;
    return feature_value(t, "PronType") == std::optional<std::string>("Art");
  });
}

std::optional<PerturbedPair> perturb_agreement(const Sentence& sentence, PerturbationKind kind,
                                               const InflectionLexicon& lexicon,
                                               const FeatureInventory& inventory,
                                               const AgreementOptions& options) {
  if (is_removal(kind)) throw ConfigError("perturb_agreement called with a removal kind");
  if (!kind_supported(kind, sentence.language)) {
    throw ConfigError(std::string(kind_name(kind)) + " is not available for language '" + sentence.language + "'");
  }
  if (!sentence.has_unique_root()) return std::nullopt;

  std::optional<std::size_t> target;
  switch (kind) {
    case PerturbationKind::SubjectNumber:
    case PerturbationKind::SubjectCase: target = find_main_subject(sentence); break;
    case PerturbationKind::DeicticNumber: target = find_deictic(sentence); break;
    default: target = find_main_predicate(sentence); break;
  }
  if (!target) return std::nullopt;

  const Token& tok = sentence.tokens[*target];
  const std::string feature(governed_feature(kind));
  auto current = feature_value(tok, feature);
  if (!current || tok.syncretic(feature)) return std::nullopt;
  if (!inventory.defines(sentence.language, feature)) return std::nullopt;

  const FeatureBundle base = first_values(tok.feats);
  std::vector<std::pair<std::string, std::string>> candidates;  // (value, form)
  for (const auto& v : inventory.values(sentence.language, feature)) {
    if (v == *current) continue;
    if (auto form = lexicon.inflect(tok.lemma, tok.upos, base, {{feature, v}}, tok.form)) {
      candidates.emplace_back(v, *form);
    }
  }
  if (candidates.empty()) return std::nullopt;

  std::size_t choice = 0;
  if (options.target_value) {
    auto it = std::find_if(candidates.begin(), candidates.end(),
                           [&](const auto& c) { return c.first == *options.target_value; });
    if (it == candidates.end()) return std::nullopt;
    choice = static_cast<std::size_t>(it - candidates.begin());
  } else {
    Rng rng = Rng::derive(options.seed, std::string(kind_name(kind)) + ":" + sentence.id);
    choice = static_cast<std::size_t>(rng.below(candidates.size()));
  }

  std::string new_form = candidates[choice].second;
  if (utf8::starts_upper(tok.form)) new_form = utf8::capitalize(new_form);

  PerturbedPair pair;
  pair.original = sentence.forms();
  pair.perturbed = pair.original;
  pair.perturbed[*target] = new_form;
  pair.edit.kind = kind;
  pair.edit.positions = {*target};
  pair.edit.old_forms = {tok.form};
  pair.edit.new_forms = {new_form};
  pair.edit.feature = feature;
  pair.edit.old_value = *current;
  pair.edit.new_value = candidates[choice].first;
  return pair;
}

namespace {

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back(sep);
    out += items[i];
  }
  return out;
}

}  // namespace

ProbingDataset gen_perturbation_task(const std::vector<Sentence>& sentences, const std::string& language,
                                     PerturbationKind kind, const PerturbationResources& resources,
                                     const GenerationConfig& cfg) {
  cfg.validate();
  if (!kind_supported(kind, language)) {
    throw ConfigError(std::string(kind_name(kind)) + " is not available for language '" + language + "'");
  }
  if (is_removal(kind) && resources.stoplist == nullptr) {
    throw ConfigError(std::string(kind_name(kind)) + " needs a stop list");
  }
  if (!is_removal(kind) && resources.lexicon == nullptr) {
    throw ConfigError(std::string(kind_name(kind)) + " needs an inflection lexicon");
  }
  const std::string task = make_task_tag(TaskFamily::Perturbations, kind_name(kind));

  std::vector<TaskInstance> instances;
  std::size_t pairs = 0;
  for (const auto& s : filter_by_length(sentences, cfg.length_range.first, cfg.length_range.second)) {
    if (s.language != language) throw ConfigError("sentence " + s.id + " is not in language " + language);
    if (!s.has_unique_root()) continue;
    std::optional<PerturbedPair> pair;
    switch (kind) {
      case PerturbationKind::StopwordsRemoval: pair = remove_stopwords(s, *resources.stoplist); break;
      case PerturbationKind::ArticleRemoval: pair = remove_articles(s, *resources.stoplist); break;
      default:
        pair = perturb_agreement(s, kind, *resources.lexicon, resources.inventory, AgreementOptions{cfg.seed, {}});
    }
    if (!pair) continue;
    ++pairs;

    TaskInstance orig;
    orig.id = task + "|" + s.id + "|orig";
    orig.sentence_id = s.id;
    orig.tokens = pair->original;
    orig.label = 0;
    orig.task = task;
    orig.language = language;
    orig.meta["masked"] = "false";
    orig.meta["perturbation"] = std::string(kind_name(kind));
    orig.meta["pair"] = orig.id;

    TaskInstance pert = orig;
    pert.id = task + "|" + s.id + "|pert";
    pert.tokens = pair->perturbed;
    pert.label = 1;
    std::vector<std::string> positions;
    for (auto p : pair->edit.positions) positions.push_back(std::to_string(p));
    pert.meta["edit_positions"] = join(positions, ',');
    pert.meta["old_forms"] = join(pair->edit.old_forms, ' ');
    if (!is_removal(kind)) {
      pert.meta["new_forms"] = join(pair->edit.new_forms, ' ');
      pert.meta["feature"] = pair->edit.feature;
      pert.meta["old_value"] = pair->edit.old_value;
      pert.meta["new_value"] = pair->edit.new_value;
    }
    instances.push_back(std::move(orig));
    instances.push_back(std::move(pert));
  }
  if (pairs < cfg.min_pairs) {
    throw GenerationError(std::string(kind_name(kind)) + ": only " + std::to_string(pairs) +
                          " perturbed pairs, minimum is " + std::to_string(cfg.min_pairs));
  }
  ProbingDataset d = split_and_balance(std::move(instances), 2, {"original", "perturbed"}, cfg);
  d.task = task;
  d.language = language;
  return d;
}

}  // namespace morphcall
