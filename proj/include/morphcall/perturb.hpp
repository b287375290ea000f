#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphcall/dataset.hpp"
#include "morphcall/lexicon.hpp"
#include "morphcall/ud.hpp"

namespace morphcall {

enum class PerturbationKind {
  StopwordsRemoval,
  ArticleRemoval,
  SubjectNumber,
  SubjectCase,
  PredicateNumber,
  PredicateGender,
  PredicatePerson,
  DeicticNumber,
};

inline constexpr PerturbationKind kAllPerturbations[] = {
    PerturbationKind::StopwordsRemoval, PerturbationKind::ArticleRemoval, PerturbationKind::SubjectNumber,
    PerturbationKind::SubjectCase,      PerturbationKind::PredicateNumber, PerturbationKind::PredicateGender,
    PerturbationKind::PredicatePerson,  PerturbationKind::DeicticNumber,
};

std::string_view kind_name(PerturbationKind kind);
PerturbationKind parse_kind(std::string_view name);
bool is_removal(PerturbationKind kind);
// Feature an inflectional kind changes ("Number", "Case", ...). Empty for removals.
std::string_view governed_feature(PerturbationKind kind);
bool kind_supported(PerturbationKind kind, std::string_view language);
std::vector<PerturbationKind> supported_kinds(std::string_view language);

struct Edit {
  PerturbationKind kind = PerturbationKind::StopwordsRemoval;
  std::vector<std::size_t> positions;  // 0-based, in the original
  std::vector<std::string> old_forms;
  std::vector<std::string> new_forms;  // empty for removals
  std::string feature;
  std::string old_value;
  std::string new_value;
};

struct PerturbedPair {
  std::vector<std::string> original;
  std::vector<std::string> perturbed;
  Edit edit;
};

// nsubj* dependent of the root; nullopt when absent, ambiguous, or the root is not unique.
std::optional<std::size_t> find_main_subject(const Sentence& sentence);
// Root if VERB/AUX, else its AUX dependent.
std::optional<std::size_t> find_main_predicate(const Sentence& sentence);
// First DET/PRON with PronType=Dem that carries Number.
std::optional<std::size_t> find_deictic(const Sentence& sentence);

std::optional<PerturbedPair> remove_stopwords(const Sentence& sentence, const StopList& stoplist);
// Throws ConfigError for languages without articles.
std::optional<PerturbedPair> remove_articles(const Sentence& sentence, const StopList& stoplist);

struct AgreementOptions {
  std::uint64_t seed = 42;
  // Forces the new feature value instead of a seeded choice; the pair is
  // still dropped when that value has no distinct form.
  std::optional<std::string> target_value;
};

// Throws ConfigError when kind is not available for the sentence's language.
std::optional<PerturbedPair> perturb_agreement(const Sentence& sentence, PerturbationKind kind,
                                               const InflectionLexicon& lexicon,
                                               const FeatureInventory& inventory,
                                               const AgreementOptions& options = {});

struct PerturbationResources {
  const InflectionLexicon* lexicon = nullptr;
  const StopList* stoplist = nullptr;
  FeatureInventory inventory = FeatureInventory::defaults();
};

// Emits one sentence-level instance pair (original = 0, perturbed = 1) per
// eligible sentence and splits by sentence, so both members share a split.
ProbingDataset gen_perturbation_task(const std::vector<Sentence>& sentences, const std::string& language,
                                     PerturbationKind kind, const PerturbationResources& resources,
                                     const GenerationConfig& cfg);

}  // namespace morphcall
