#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mcs {

__extension__ typedef __int128 Wide;

// Exact non-negative rational used for prediction factors and delay percentages.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  // Parses "1", "0.25", "3/4". Throws ParseError on anything else.
  static Ratio parse(std::string_view text);

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  Ratio reduced() const;
  std::string to_string() const;

  friend bool operator==(const Ratio& a, const Ratio& b) {
    return static_cast<Wide>(a.num) * b.den == static_cast<Wide>(b.num) * a.den;
  }
};

// Integer division of num/den rounded half-up. Requires num >= 0, den > 0.
std::int64_t round_half_up_div(Wide num, Wide den);

inline std::int64_t ceil_div(std::int64_t num, std::int64_t den) {
  return num <= 0 ? 0 : (num + den - 1) / den;
}

}  // namespace mcs
