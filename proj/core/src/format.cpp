#include "twotime/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace twotime {

std::string format_sig15(double v) {
  if (v == 0.0) return "0";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, kReportDigits);
  std::string s(buf.data(), res.ptr);
  if (s == "-0") s = "0";
  return s;
}

double round_sig15(double v) {
  if (!std::isfinite(v)) return v;
  const std::string s = format_sig15(v);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace twotime
