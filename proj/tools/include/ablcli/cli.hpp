#pragma once

// Command-line front end. `run` does all the work so tests can drive it
// without spawning a process; main() only parses flags into a RunConfig.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace ablcli {

enum class Command { Abl, Kastner, Decomposition, Inequality, ProductRule, Mc, Scenario };
enum class Format { Json, Csv };

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;

struct RunConfig {
  Command command = Command::Abl;

  // file inputs
  std::string pre;
  std::string post;
  std::string observable;
  std::string post_observable;  // decomposition: the B basis
  std::string x;                // product-rule
  std::string y;
  std::string x_value;
  std::string y_value;

  // scenario inputs
  std::string scenario;
  std::string variant;
  std::string dir_a;  // spin-half directions, "x,y,z"
  std::string dir_b;
  std::string dir_c;

  bool mc = false;  // implied by Command::Mc
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = auto
  Format format = Format::Json;
};

std::optional<Command> parse_command(const std::string& name);

// Writes the report to `out`. On failure writes {"error": {"code", "message"}}
// to `err` and returns kExitValidation (domain / input errors) or
// kExitInternal.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace ablcli
