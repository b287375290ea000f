#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace morphcall {

// xoshiro256** seeded through splitmix64. Every draw, including the bounded
// integer and the normal variate, is specified here rather than delegated to
// <random> distributions, whose output differs between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  // Independent stream for a (seed, tag) pair, e.g. (cfg.seed, sentence id).
  static Rng derive(std::uint64_t seed, std::string_view tag) noexcept;

  std::uint64_t next() noexcept;

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  // Uniform double in [0, 1).
  double uniform() noexcept;

  // Standard normal via Box-Muller.
  double normal() noexcept;

  template <typename T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices from [0, n), returned in ascending order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace morphcall
