#pragma once

// Locale-independent number formatting for reports.

#include <cstdint>
#include <string>
#include <string_view>

namespace twotime {

inline constexpr int kReportDigits = 15;

// Shortest general-format text of `v` at 15 significant digits.
std::string format_sig15(double v);
// `v` rounded to 15 significant digits.
double round_sig15(double v);

// 64-bit FNV-1a digest, as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace twotime
