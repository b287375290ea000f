#include "morphcall/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "morphcall/error.hpp"
#include "morphcall/hash.hpp"

namespace morphcall {

using ojson = nlohmann::ordered_json;

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "dev") return Split::Dev;
  if (name == "test") return Split::Test;
  throw FormatError("unknown split '" + std::string(name) + "'");
}

std::string_view family_name(TaskFamily f) {
  switch (f) {
    case TaskFamily::Features: return "features";
    case TaskFamily::Masked: return "masked";
    case TaskFamily::Values: return "values";
    case TaskFamily::Perturbations: return "perturbations";
  }
  return "features";
}

TaskFamily parse_family(std::string_view name) {
  if (name == "features") return TaskFamily::Features;
  if (name == "masked") return TaskFamily::Masked;
  if (name == "values") return TaskFamily::Values;
  if (name == "perturbations") return TaskFamily::Perturbations;
  throw ConfigError("unknown task family '" + std::string(name) + "'");
}

TaskFamily family_of_task(std::string_view task) {
  return parse_family(task.substr(0, task.find('/')));
}

std::string make_task_tag(TaskFamily family, std::string_view subject) {
  return std::string(family_name(family)) + "/" + std::string(subject);
}

bool TaskInstance::masked() const {
  auto it = meta.find("masked");
  return it != meta.end() && it->second == "true";
}

bool canonical_less(const TaskInstance& a, const TaskInstance& b) {
  if (a.sentence_id != b.sentence_id) return a.sentence_id < b.sentence_id;
  if (a.target_index != b.target_index) return a.target_index < b.target_index;
  return a.label < b.label;
}

void GenerationConfig::validate() const {
  double sum = split_ratios[0] + split_ratios[1] + split_ratios[2];
  for (double r : split_ratios) {
    if (!(r >= 0.0)) throw ConfigError("split ratios must be non-negative");
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  if (length_range.first > length_range.second) throw ConfigError("length range with min > max");
  if (max_instances_per_sentence_per_class == 0) throw ConfigError("per-sentence instance cap must be positive");
}

std::map<Split, std::vector<std::size_t>> ProbingDataset::class_counts() const {
  std::map<Split, std::vector<std::size_t>> counts;
  for (Split s : kSplits) counts[s].assign(static_cast<std::size_t>(std::max(arity, 0)), 0);
  for (const auto& inst : instances) {
    if (inst.label >= 0 && inst.label < arity) ++counts[inst.split][static_cast<std::size_t>(inst.label)];
  }
  return counts;
}

std::map<Split, std::size_t> ProbingDataset::sentence_counts() const {
  std::map<Split, std::set<std::string>> ids;
  for (const auto& inst : instances) ids[inst.split].insert(inst.sentence_id);
  std::map<Split, std::size_t> out;
  for (Split s : kSplits) out[s] = ids[s].size();
  return out;
}

std::vector<std::size_t> ProbingDataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].split == split) out.push_back(i);
  }
  return out;
}

namespace {

ojson instance_to_json(const TaskInstance& inst) {
  ojson j;
  j["id"] = inst.id;
  j["sentence_id"] = inst.sentence_id;
  j["tokens"] = inst.tokens;
  if (inst.target_index) {
    j["target_index"] = *inst.target_index;
  } else {
    j["target_index"] = nullptr;
  }
  j["label"] = inst.label;
  j["task"] = inst.task;
  j["language"] = inst.language;
  j["split"] = split_name(inst.split);
  ojson meta = ojson::object();
  for (const auto& [k, v] : inst.meta) meta[k] = v;
  j["meta"] = std::move(meta);
  return j;
}

TaskInstance instance_from_json(const ojson& j) {
  TaskInstance inst;
  inst.id = j.at("id").get<std::string>();
  inst.sentence_id = j.at("sentence_id").get<std::string>();
  inst.tokens = j.at("tokens").get<std::vector<std::string>>();
  if (!j.at("target_index").is_null()) inst.target_index = j.at("target_index").get<std::size_t>();
  inst.label = j.at("label").get<int>();
  inst.task = j.at("task").get<std::string>();
  inst.language = j.at("language").get<std::string>();
  inst.split = parse_split(j.at("split").get<std::string>());
  for (const auto& [k, v] : j.at("meta").items()) inst.meta[k] = v.get<std::string>();
  return inst;
}

ojson config_to_json(const GenerationConfig& c) {
  ojson j;
  j["seed"] = c.seed;
  j["split_ratios"] = c.split_ratios;
  j["length_range"] = {c.length_range.first, c.length_range.second};
  j["balance"] = "downsample-to-minority";
  j["max_instances_per_sentence_per_class"] = c.max_instances_per_sentence_per_class;
  j["min_pairs"] = c.min_pairs;
  return j;
}

GenerationConfig config_from_json(const ojson& j) {
  GenerationConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.split_ratios = j.at("split_ratios").get<std::array<double, 3>>();
  auto lr = j.at("length_range").get<std::vector<std::size_t>>();
  if (lr.size() != 2) throw FormatError("length_range must have two entries");
  c.length_range = {lr[0], lr[1]};
  c.max_instances_per_sentence_per_class = j.at("max_instances_per_sentence_per_class").get<std::size_t>();
  c.min_pairs = j.at("min_pairs").get<std::size_t>();
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed for " + path);
}

}  // namespace

std::string serialize_instances(const std::vector<TaskInstance>& instances) {
  std::string out;
  for (const auto& inst : instances) {
    out += instance_to_json(inst).dump();
    out.push_back('\n');
  }
  return out;
}

std::string dataset_checksum(const std::vector<TaskInstance>& instances) {
  return to_hex(fnv1a64(serialize_instances(instances)));
}

std::string manifest_path(const std::string& dataset_path) {
  std::string base = dataset_path;
  if (base.size() > 6 && base.ends_with(".jsonl")) base.resize(base.size() - 6);
  return base + ".manifest.json";
}

std::string render_manifest(const ProbingDataset& d) {
  ojson m;
  m["task"] = d.task;
  m["family"] = family_name(d.family());
  m["language"] = d.language;
  m["arity"] = d.arity;
  m["classes"] = d.classes;
  m["n_instances"] = d.instances.size();
  ojson counts;
  ojson sentences;
  ojson assigned;
  auto cc = d.class_counts();
  auto sc = d.sentence_counts();
  for (Split s : kSplits) {
    ojson per;
    for (std::size_t c = 0; c < cc[s].size(); ++c) per[std::to_string(c)] = cc[s][c];
    counts[std::string(split_name(s))] = per;
    sentences[std::string(split_name(s))] = sc[s];
    auto a = d.assigned_sentences.find(s);
    assigned[std::string(split_name(s))] = a == d.assigned_sentences.end() ? 0 : a->second;
  }
  m["counts"] = counts;
  m["sentences"] = sentences;
  m["assigned_sentences"] = assigned;
  m["generation"] = config_to_json(d.config);
  ojson src = ojson::array();
  for (const auto& s : d.sources) src.push_back({{"file", s.file}, {"hash", s.hash}});
  m["sources"] = src;
  ojson notes = ojson::array();
  notes.push_back("splits are assigned by sentence; instance-level split ratios are approximate");
  if (d.family() == TaskFamily::Perturbations) notes.push_back("label 0 = original sentence, label 1 = perturbed sentence");
  if (d.family() == TaskFamily::Masked) notes.push_back("tokens are stored unmasked; mask the target at extraction time");
  m["notes"] = notes;
  m["checksum"] = d.checksum;
  return m.dump(2) + "\n";
}

void write_dataset(const ProbingDataset& dataset, const std::string& path) {
  std::string body = serialize_instances(dataset.instances);
  std::string sum = to_hex(fnv1a64(body));
  if (!dataset.checksum.empty() && dataset.checksum != sum) {
    throw IntegrityError("dataset checksum field does not match its instances");
  }
  ProbingDataset copy_meta = dataset;
  copy_meta.checksum = sum;
  write_file(path, body);
  write_file(manifest_path(path), render_manifest(copy_meta));
}

ProbingDataset read_dataset(const std::string& path) {
  const std::string body = read_file(path);
  const std::string mpath = manifest_path(path);
  ojson m;
  try {
    m = ojson::parse(read_file(mpath));
  } catch (const ojson::exception& e) {
    throw FormatError("malformed manifest " + mpath + ": " + e.what());
  }
  ProbingDataset d;
  try {
    d.checksum = m.at("checksum").get<std::string>();
    d.task = m.at("task").get<std::string>();
    d.language = m.at("language").get<std::string>();
    d.arity = m.at("arity").get<int>();
    d.classes = m.at("classes").get<std::vector<std::string>>();
    d.config = config_from_json(m.at("generation"));
    if (m.contains("assigned_sentences")) {
      for (Split s : kSplits) {
        const auto n = m.at("assigned_sentences").at(std::string(split_name(s))).get<std::size_t>();
        if (n) d.assigned_sentences[s] = n;
      }
    }
    for (const auto& s : m.at("sources")) {
      d.sources.push_back({s.at("file").get<std::string>(), s.at("hash").get<std::string>()});
    }
  } catch (const ojson::exception& e) {
    throw FormatError("malformed manifest " + mpath + ": " + e.what());
  }
  const std::string actual = to_hex(fnv1a64(body));
  if (actual != d.checksum) {
    throw IntegrityError("checksum mismatch for " + path + ": manifest " + d.checksum + ", data " + actual);
  }
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < body.size()) {
    std::size_t end = body.find('\n', start);
    if (end == std::string::npos) end = body.size();
    ++line_no;
    std::string_view line(body.data() + start, end - start);
    if (!line.empty()) {
      try {
        d.instances.push_back(instance_from_json(ojson::parse(line)));
      } catch (const ojson::exception& e) {
        throw ParseError(path, line_no, e.what());
      }
    }
    start = end + 1;
  }
  return d;
}

}  // namespace morphcall
