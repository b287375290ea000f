#include "morphcall/repstore.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "morphcall/error.hpp"
#include "morphcall/hash.hpp"

namespace morphcall {

std::string_view pooling_name(Pooling p) {
  switch (p) {
    case Pooling::TargetMean: return "target-mean";
    case Pooling::MaskToken: return "mask-token";
    case Pooling::SentenceMean: return "sentence-mean";
    case Pooling::Cls: return "cls";
  }
  return "";
}

Pooling parse_pooling(std::string_view name) {
  for (auto p : {Pooling::TargetMean, Pooling::MaskToken, Pooling::SentenceMean, Pooling::Cls}) {
    if (pooling_name(p) == name) return p;
  }
  throw FormatError("unknown pooling '" + std::string(name) + "'");
}

bool pooling_allowed(TaskFamily family, Pooling pooling) {
  switch (family) {
    case TaskFamily::Features:
    case TaskFamily::Values: return pooling == Pooling::TargetMean;
    case TaskFamily::Masked: return pooling == Pooling::MaskToken;
    case TaskFamily::Perturbations: return pooling == Pooling::SentenceMean || pooling == Pooling::Cls;
  }
  return false;
}

std::string_view instance_name(ModelInstance i) {
  return i == ModelInstance::PreTrained ? "pre-trained" : "fine-tuned";
}

ModelInstance parse_instance(std::string_view name) {
  if (name == "pre-trained") return ModelInstance::PreTrained;
  if (name == "fine-tuned") return ModelInstance::FineTuned;
  throw FormatError("unknown model instance '" + std::string(name) + "'");
}

std::string RepSetHeader::metadata_json() const {
  nlohmann::ordered_json j;
  j["model_id"] = model_id;
  j["instance"] = instance_name(instance);
  j["language"] = language;
  j["task_name"] = task_name;
  j["pooling"] = pooling_name(pooling);
  j["n_samples"] = n_samples;
  j["n_layers"] = n_layers;
  j["hidden_size"] = hidden_size;
  j["dataset_checksum"] = dataset_checksum;
  return j.dump();
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

void write_repset(const RepSetHeader& header, std::span<const float> data, const std::string& path) {
  if (data.size() != header.value_count()) {
    throw ShapeError("repset data has " + std::to_string(data.size()) + " floats, header implies " +
                     std::to_string(header.n_samples) + "x" + std::to_string(header.n_layers) + "x" +
                     std::to_string(header.hidden_size) + " = " + std::to_string(header.value_count()));
  }
  const std::string meta = header.metadata_json();
  std::string out;
  out.reserve(12 + meta.size() + data.size() * 4 + 8);
  out.append("MCRP");
  put_u32(out, header.version);
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.append(meta);
  const std::size_t data_start = out.size();
  for (float f : data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  put_u64(out, fnv1a64(std::string_view(out).substr(data_start)));

  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw InputError("write failed for " + path);
}

RepSet read_repset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

  if (bytes.size() < 12) {
    if (bytes.size() >= 4 && bytes.compare(0, 4, "MCRP") != 0) throw FormatError(path + ": bad magic");
    throw IntegrityError(path + ": truncated header");
  }
  if (bytes.compare(0, 4, "MCRP") != 0) throw FormatError(path + ": bad magic");
  RepSet rs;
  rs.header.version = get_u32(p + 4);
  if (rs.header.version != kRepSetVersion) {
    throw FormatError(path + ": unsupported version " + std::to_string(rs.header.version));
  }
  const std::size_t meta_len = get_u32(p + 8);
  if (bytes.size() < 12 + meta_len) throw IntegrityError(path + ": truncated metadata");
  try {
    auto j = nlohmann::json::parse(bytes.substr(12, meta_len));
    rs.header.model_id = j.at("model_id").get<std::string>();
    rs.header.instance = parse_instance(j.at("instance").get<std::string>());
    rs.header.language = j.at("language").get<std::string>();
    rs.header.task_name = j.at("task_name").get<std::string>();
    rs.header.pooling = parse_pooling(j.at("pooling").get<std::string>());
    rs.header.n_samples = j.at("n_samples").get<std::size_t>();
    rs.header.n_layers = j.at("n_layers").get<std::size_t>();
    rs.header.hidden_size = j.at("hidden_size").get<std::size_t>();
    rs.header.dataset_checksum = j.at("dataset_checksum").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": malformed metadata: " + e.what());
  }
  const std::size_t data_start = 12 + meta_len;
  const std::size_t count = rs.header.value_count();
  const std::size_t expected = data_start + count * 4 + 8;
  if (bytes.size() < expected) {
    throw IntegrityError(path + ": truncated, expected " + std::to_string(expected) + " bytes, found " +
                         std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) throw IntegrityError(path + ": trailing bytes after checksum");
  const std::string_view data_bytes = std::string_view(bytes).substr(data_start, count * 4);
  if (fnv1a64(data_bytes) != get_u64(p + data_start + count * 4)) {
    throw IntegrityError(path + ": data checksum mismatch");
  }
  rs.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) rs.data[i] = std::bit_cast<float>(get_u32(p + data_start + 4 * i));
  return rs;
}

void validate_binding(const RepSet& repset, const ProbingDataset& dataset) {
  const auto& h = repset.header;
  if (h.dataset_checksum != dataset.checksum) {
    throw BindingError("repset was extracted for dataset " + h.dataset_checksum + ", not " + dataset.checksum);
  }
  if (h.n_samples != dataset.instances.size()) {
    throw BindingError("repset has " + std::to_string(h.n_samples) + " samples, dataset has " +
                       std::to_string(dataset.instances.size()) + " instances");
  }
  if (!dataset.task.empty() && !pooling_allowed(dataset.family(), h.pooling)) {
    throw BindingError("pooling " + std::string(pooling_name(h.pooling)) + " is not valid for task " + dataset.task);
  }
}

Eigen::MatrixXd slice_layer(const RepSet& repset, std::size_t layer) {
  const auto& h = repset.header;
  if (layer >= h.n_layers) {
    throw BoundsError("layer " + std::to_string(layer) + " out of range [0, " + std::to_string(h.n_layers) + ")");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(h.n_samples), static_cast<Eigen::Index>(h.hidden_size));
  for (std::size_t i = 0; i < h.n_samples; ++i) {
    const float* row = repset.data.data() + (i * h.n_layers + layer) * h.hidden_size;
    for (std::size_t u = 0; u < h.hidden_size; ++u) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(u)) = row[u];
    }
  }
  return out;
}

Eigen::MatrixXd concat_layers(const RepSet& repset) {
  const auto& h = repset.header;
  const std::size_t width = h.n_layers * h.hidden_size;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(h.n_samples), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < h.n_samples; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = repset.data[i * width + j];
    }
  }
  return out;
}

}  // namespace morphcall
