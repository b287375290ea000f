#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace morphcall::utf8 {

// Decodes to Unicode scalar values. Invalid bytes decode as U+FFFD.
std::u32string decode(std::string_view s);
std::string encode(std::u32string_view s);

std::size_t length(std::string_view s);

// Simple case mapping for Latin, Latin-1, Latin Extended-A, Greek and
// Cyrillic. Other scripts pass through unchanged.
char32_t to_lower(char32_t c) noexcept;
char32_t to_upper(char32_t c) noexcept;

std::string lower(std::string_view s);

// True when the first scalar value is an uppercase letter.
bool starts_upper(std::string_view s);

// Upper-cases the first scalar value.
std::string capitalize(std::string_view s);

}  // namespace morphcall::utf8
