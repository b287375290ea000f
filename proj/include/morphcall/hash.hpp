#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace morphcall {

// 64-bit FNV-1a. Used for dataset checksums, MCREP data checksums and for
// deriving per-sentence RNG streams. Not a cryptographic hash.
class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  void update(std::span<const std::byte> bytes) noexcept {
    for (std::byte b : bytes) {
      state_ ^= static_cast<std::uint64_t>(b);
      state_ *= kPrime;
    }
  }
  void update(std::string_view s) noexcept {
    update(std::as_bytes(std::span<const char>(s.data(), s.size())));
  }

  std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = kOffset;
};

inline std::uint64_t fnv1a64(std::string_view s) noexcept {
  Fnv1a64 h;
  h.update(s);
  return h.digest();
}

// 16 lowercase hex digits.
std::string to_hex(std::uint64_t value);

// Hash of a whole file's contents, as hex. Throws InputError if unreadable.
std::string file_hash_hex(const std::string& path);

}  // namespace morphcall
