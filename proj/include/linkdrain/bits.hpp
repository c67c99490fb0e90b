#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace linkdrain {

using mask_t = std::uint64_t;

inline constexpr int kMaxLinks = 64;

constexpr mask_t bit(int i) { return mask_t{1} << i; }

constexpr mask_t full_mask(int n) {
  return n >= kMaxLinks ? ~mask_t{0} : (mask_t{1} << n) - 1;
}

constexpr int popcount(mask_t m) { return std::popcount(m); }

constexpr bool contains(mask_t m, int i) { return (m >> i) & 1; }

/// Calls f(i) for each set bit of m, lowest first.
template <typename F>
void for_each_bit(mask_t m, F&& f) {
  while (m != 0) {
    const int i = std::countr_zero(m);
    f(i);
    m &= m - 1;
  }
}

inline std::vector<int> bits_of(mask_t m) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(popcount(m)));
  for_each_bit(m, [&](int i) { out.push_back(i); });
  return out;
}

/// Calls f(sub) for every nonempty submask of m, in ascending mask order.
template <typename F>
void for_each_nonempty_submask(mask_t m, F&& f) {
  // Ascending order keeps witness/tie-break selection deterministic.
  for (mask_t sub = m & (~m + 1); sub != 0; sub = (sub - m) & m) {
    f(sub);
    if (sub == m) break;
  }
}

inline std::string mask_to_string(mask_t m) {
  std::string s = "{";
  bool first = true;
  for_each_bit(m, [&](int i) {
    if (!first) s += ",";
    s += std::to_string(i);
    first = false;
  });
  s += "}";
  return s;
}

}  // namespace linkdrain
