#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fairprobe {

// 64-bit FNV-1a. Used for domain/model fingerprints in reports, not security.
constexpr std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value);

inline std::string digest_of(std::string_view data) { return hex64(fnv1a64(data)); }

}  // namespace fairprobe
