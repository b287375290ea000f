#include <cstring>

#include "../support.hpp"
#include "doctest.h"
#include "morphcall/error.hpp"
#include "morphcall/repstore.hpp"

using namespace morphcall;

namespace {

RepSetHeader header(std::size_t n, std::size_t l, std::size_t h) {
  RepSetHeader hd;
  hd.model_id = "m";
  hd.instance = ModelInstance::FineTuned;
  hd.language = "de";
  hd.task_name = "features/Number";
  hd.pooling = Pooling::TargetMean;
  hd.n_samples = n;
  hd.n_layers = l;
  hd.hidden_size = h;
  hd.dataset_checksum = "0123456789abcdef";
  return hd;
}

std::vector<float> ramp(std::size_t n) {
  std::vector<float> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<float>(i) * 0.25f - 3.0f;
  return v;
}

}  // namespace

TEST_SUITE("repstore") {
  TEST_CASE("round trip is bitwise") {
    testing::TempDir dir;
    auto h = header(4, 3, 5);
    auto data = ramp(h.value_count());
    data[7] = -0.0f;
    const auto path = dir.file("r.mcrep");
    write_repset(h, data, path);
    auto r = read_repset(path);
    CHECK(r.header == h);
    REQUIRE(r.data.size() == data.size());
    CHECK(std::memcmp(r.data.data(), data.data(), data.size() * sizeof(float)) == 0);
    CHECK(r.at(2, 1, 3) == data[(2 * 3 + 1) * 5 + 3]);
  }

  TEST_CASE("file layout") {
    testing::TempDir dir;
    auto h = header(1, 1, 2);
    const auto path = dir.file("r.mcrep");
    write_repset(h, std::vector<float>{1.0f, 2.0f}, path);
    auto bytes = testing::slurp(path);
    CHECK(bytes.substr(0, 4) == "MCRP");
    auto u32 = [&](std::size_t off) {
      std::uint32_t v = 0;
      for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[off + i]);
      return v;
    };
    CHECK(u32(4) == kRepSetVersion);
    const std::size_t meta = u32(8);
    CHECK(bytes.size() == 12 + meta + 8 + 8);
    CHECK(bytes.substr(12, meta) == h.metadata_json());
    // 1.0f little-endian
    CHECK(static_cast<unsigned char>(bytes[12 + meta + 3]) == 0x3f);
    CHECK(static_cast<unsigned char>(bytes[12 + meta + 2]) == 0x80);
  }

  TEST_CASE("empty repset") {
    testing::TempDir dir;
    auto h = header(0, 13, 768);
    write_repset(h, std::vector<float>{}, dir.file("e.mcrep"));
    auto r = read_repset(dir.file("e.mcrep"));
    CHECK(r.header.n_layers == 13);
    CHECK(r.data.empty());
  }

  TEST_CASE("shape mismatch is caught before writing") {
    testing::TempDir dir;
    auto h = header(2, 2, 2);
    auto data = ramp(h.value_count() - 1);
    CHECK_THROWS_AS(write_repset(h, data, dir.file("s.mcrep")), ShapeError);
    CHECK_FALSE(std::filesystem::exists(dir.file("s.mcrep")));
  }

  TEST_CASE("damaged files") {
    testing::TempDir dir;
    auto h = header(3, 2, 4);
    const auto path = dir.file("d.mcrep");
    write_repset(h, ramp(h.value_count()), path);
    const auto good = testing::slurp(path);

    testing::spit(path, good.substr(0, good.size() - 5));
    CHECK_THROWS_AS(read_repset(path), IntegrityError);

    auto flipped = good;
    flipped[flipped.size() - 12] ^= 0x40;
    testing::spit(path, flipped);
    CHECK_THROWS_AS(read_repset(path), IntegrityError);

    auto magic = good;
    magic[0] = 'X';
    testing::spit(path, magic);
    CHECK_THROWS_AS(read_repset(path), FormatError);

    auto version = good;
    version[4] = 9;
    testing::spit(path, version);
    CHECK_THROWS_AS(read_repset(path), FormatError);

    CHECK_THROWS_AS(read_repset(dir.file("missing.mcrep")), InputError);
  }

  TEST_CASE("binding to a dataset") {
    auto a = testing::synthetic_dataset(40);
    auto b = testing::synthetic_dataset(40, 2, 8);
    REQUIRE(a.checksum != b.checksum);
    auto r = testing::signal_repset(a, 2, 3, 0, 1.0);
    CHECK_NOTHROW(validate_binding(r, a));
    CHECK_THROWS_AS(validate_binding(r, b), BindingError);
    r.header.pooling = Pooling::Cls;
    CHECK_THROWS_AS(validate_binding(r, a), BindingError);
    CHECK(pooling_allowed(TaskFamily::Masked, Pooling::MaskToken));
    CHECK(pooling_allowed(TaskFamily::Perturbations, Pooling::SentenceMean));
    CHECK(pooling_allowed(TaskFamily::Perturbations, Pooling::Cls));
    CHECK_FALSE(pooling_allowed(TaskFamily::Features, Pooling::MaskToken));
  }

  TEST_CASE("layer slices") {
    auto h = header(3, 4, 2);
    RepSet r{h, std::vector<float>(h.value_count(), 2.5f)};
    auto m = slice_layer(r, 0);
    CHECK(m.rows() == 3);
    CHECK(m.cols() == 2);
    CHECK((m.array() == 2.5).all());
    CHECK_THROWS_AS(slice_layer(r, 4), BoundsError);

    r.data = ramp(h.value_count());
    auto cat = concat_layers(r);
    for (std::size_t l = 0; l < 4; ++l) {
      auto s = slice_layer(r, l);
      CHECK(cat.middleCols(static_cast<Eigen::Index>(l * 2), 2) == s);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 8; ++j) CHECK(cat(i, j) == r.data[i * 8 + j]);
    }
  }
}
