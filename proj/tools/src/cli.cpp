#include "ablcli/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "twotime/ensemble.hpp"
#include "twotime/error.hpp"
#include "twotime/format.hpp"
#include "twotime/json_io.hpp"
#include "twotime/rules.hpp"
#include "twotime/scenarios.hpp"

#ifndef ABL_ENGINE_VERSION
#define ABL_ENGINE_VERSION "0.0.0"
#endif

namespace ablcli {

using twotime::Error;
using twotime::ErrorCode;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kToolName = "abl-engine";

const char* command_name(Command c) {
  switch (c) {
    case Command::Abl: return "abl";
    case Command::Kastner: return "kastner";
    case Command::Decomposition: return "decomposition";
    case Command::Inequality: return "inequality";
    case Command::ProductRule: return "product-rule";
    case Command::Mc: return "mc";
    case Command::Scenario: return "scenario";
  }
  return "?";
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::ValidationError, msg); }

double r15(double v) { return twotime::round_sig15(v); }

// A report is built once as a JSON tree and a CSV table holding the same
// rounded doubles, so both formats print identical numbers.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string cell(double v) { return twotime::format_sig15(r15(v)); }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Report {
  json doc;
  CsvTable table;
};

class Inputs {
 public:
  // Reads a file once, remembering its digest under `role`.
  std::string read(const std::string& role, const std::string& path) {
    if (path.empty()) invalid("--" + role + " is required for this command");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot read " + role + " file '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    digests_[role] = twotime::fnv1a64_hex(bytes);
    return bytes;
  }
  twotime::StateVector state(const std::string& role, const std::string& path) {
    return twotime::parse_state_vector(read(role, path));
  }
  twotime::Observable observable(const std::string& role, const std::string& path) {
    return twotime::parse_observable(read(role, path));
  }
  void note(const std::string& role, const std::string& canonical) {
    digests_[role] = twotime::fnv1a64_hex(canonical);
  }
  const json& digests() const { return digests_; }

 private:
  json digests_ = json::object();
};

json distribution_json(const std::vector<twotime::LabeledValue>& entries) {
  json o = json::object();
  for (const auto& e : entries) o[e.label] = r15(e.value);
  return o;
}

void distribution_table(CsvTable& t, const std::vector<twotime::LabeledValue>& entries,
                        const char* column) {
  t.header = {"label", column};
  for (const auto& e : entries) t.rows.push_back({e.label, cell(e.value)});
}

void add_mc(Report& r, const twotime::SelectionContext& ctx, const RunConfig& cfg) {
  if (cfg.trials == 0) invalid("trials must be >= 1");
  const auto analytic = twotime::abl(ctx);
  const auto stats = twotime::estimate_abl(ctx, cfg.trials, cfg.seed, {cfg.threads});

  json outcomes = json::object();
  r.table = {};
  r.table.header = {"label", "frequency", "std_error", "analytic_abl", "z_score"};
  for (std::size_t i = 0; i < stats.labels.size(); ++i) {
    const double f = stats.frequencies[i];
    const double se = stats.std_errors[i];
    const double p = analytic.entries()[i].value;
    json row = {{"count", stats.counts[i]},
                {"frequency", r15(f)},
                {"std_error", r15(se)},
                {"analytic_abl", r15(p)}};
    // With zero spread the z-score is 0 on exact agreement, undefined otherwise.
    std::optional<double> z;
    if (se > 0) z = (f - p) / se;
    else if (f == p) z = 0.0;
    row["z_score"] = z ? json(r15(*z)) : json(nullptr);
    outcomes[stats.labels[i]] = row;
    r.table.rows.push_back({stats.labels[i], cell(f), cell(se), cell(p), z ? cell(*z) : ""});
  }
  r.doc["mc"] = {{"trials", stats.trials},
                 {"accepted", stats.accepted},
                 {"seed", stats.seed},
                 {"acceptance_rate", r15(stats.acceptance_rate())},
                 {"acceptance_std_error", r15(stats.acceptance_std_error())},
                 {"analytic_acceptance", r15(twotime::marginal_with_q(ctx))},
                 {"outcomes", outcomes}};
}

void add_abl(Report& r, const twotime::SelectionContext& ctx) {
  const auto dist = twotime::abl(ctx);
  r.doc["abl"] = distribution_json(dist.entries());
  r.doc["marginal_with_Q"] = r15(twotime::marginal_with_q(ctx));
  distribution_table(r.table, dist.entries(), "abl");
}

json matrix_json(const twotime::CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({r15(m(i, j).real()), r15(m(i, j).imag())});
    rows.push_back(row);
  }
  return rows;
}

void add_product_rule(Report& r, const twotime::ProductRuleReport& p) {
  r.doc["product_rule"] = {{"x", {{"value", p.x_value}, {"abl", r15(p.abl_x)}}},
                           {"y", {{"value", p.y_value}, {"abl", r15(p.abl_y)}}},
                           {"product", matrix_json(p.product)},
                           {"product_is_zero", p.product_is_zero},
                           {"violation", p.violation}};
  r.table.header = {"quantity", "value"};
  r.table.rows = {{"abl_x", cell(p.abl_x)},
                  {"abl_y", cell(p.abl_y)},
                  {"product_is_zero", p.product_is_zero ? "1" : "0"},
                  {"violation", p.violation ? "1" : "0"}};
}

twotime::Direction parse_direction(const std::string& flag, const std::string& text) {
  double v[3];
  const char* p = text.data();
  const char* end = p + text.size();
  for (int i = 0; i < 3; ++i) {
    auto res = std::from_chars(p, end, v[i]);
    if (res.ec != std::errc()) break;
    p = res.ptr;
    if (i < 2) {
      if (p == end || *p != ',') break;
      ++p;
    } else if (p == end) {
      return {v[0], v[1], v[2]};
    }
  }
  throw Error(ErrorCode::ParseError, "--" + flag + " expects three comma-separated numbers");
}

twotime::ScenarioBundle load_scenario(const RunConfig& cfg, std::string& variant) {
  const auto& s = cfg.scenario;
  if (s == "three-box" || s == "product-rule") {
    if (!cfg.dir_a.empty() || !cfg.dir_b.empty() || !cfg.dir_c.empty())
      invalid("--a/--b/--c apply only to spin-half");
    auto b = s == "three-box" ? twotime::three_box() : twotime::product_rule_scenario();
    if (variant.empty()) variant = b.variants.front().name;
    return b;
  }
  if (s == "three-hole") {
    if (variant.empty()) variant = "AB";
    auto b = twotime::three_hole(twotime::parse_beepers(variant));
    variant = b.variants.front().name;
    return b;
  }
  if (s == "spin-half") {
    auto d = twotime::spin_half_default();
    if (!cfg.dir_a.empty() || !cfg.dir_b.empty() || !cfg.dir_c.empty()) {
      const twotime::Direction za{0, 0, 1}, xb{1, 0, 0};
      const double h = std::sqrt(0.5);
      const twotime::Direction a = cfg.dir_a.empty() ? za : parse_direction("a", cfg.dir_a);
      const twotime::Direction b = cfg.dir_b.empty() ? xb : parse_direction("b", cfg.dir_b);
      const twotime::Direction c =
          cfg.dir_c.empty() ? twotime::Direction{h, 0, h} : parse_direction("c", cfg.dir_c);
      d = twotime::spin_half(a, b, c);
    }
    if (variant.empty()) variant = d.variants.front().name;
    return d;
  }
  invalid("unknown scenario '" + s + "'");
}

Report run_scenario(const RunConfig& cfg, Inputs& inputs) {
  if (cfg.scenario.empty()) invalid("scenario name is required");
  std::string variant = cfg.variant;
  const auto bundle = load_scenario(cfg, variant);
  const auto ctx = bundle.context_for(variant);
  inputs.note("scenario", twotime::to_json(ctx.pre()) + twotime::to_json(ctx.post()) +
                              twotime::to_json(ctx.intervening()));

  Report r;
  r.doc["scenario"] = bundle.name;
  r.doc["variant"] = variant;
  add_abl(r, ctx);
  json expected = json::object();
  for (const auto& e : bundle.expected) expected[e.name] = r15(e.value);
  r.doc["expected"] = expected;
  if (!bundle.flags.empty()) r.doc["flags"] = bundle.flags;
  if (bundle.product_rule) {
    const auto& w = *bundle.product_rule;
    const auto p = twotime::product_rule_check(ctx.pre(), ctx.post(), bundle.variant(w.x_variant),
                                               w.x_value, bundle.variant(w.y_variant), w.y_value);
    CsvTable keep = r.table;
    add_product_rule(r, p);
    r.table = keep;
  }
  if (cfg.mc) add_mc(r, ctx, cfg);
  return r;
}

Report run_command(const RunConfig& cfg, Inputs& in) {
  switch (cfg.command) {
    case Command::Abl:
    case Command::Mc: {
      const twotime::SelectionContext ctx(in.state("pre", cfg.pre), in.state("post", cfg.post),
                                          in.observable("observable", cfg.observable));
      Report r;
      add_abl(r, ctx);
      if (cfg.mc || cfg.command == Command::Mc) add_mc(r, ctx, cfg);
      return r;
    }
    case Command::Kastner: {
      const twotime::SelectionContext ctx(in.state("pre", cfg.pre), in.state("post", cfg.post),
                                          in.observable("observable", cfg.observable));
      const auto w = twotime::kastner(ctx);
      Report r;
      r.doc["kastner"] = distribution_json(w.entries());
      r.doc["sum"] = r15(w.sum());
      distribution_table(r.table, w.entries(), "weight");
      return r;
    }
    case Command::Decomposition: {
      const auto rep = twotime::decomposition_check(in.state("pre", cfg.pre),
                                                    in.observable("observable", cfg.observable),
                                                    in.observable("post-observable",
                                                                  cfg.post_observable));
      Report r;
      json rows = json::object();
      r.table.header = {"label", "lhs", "rhs", "residual"};
      for (const auto& row : rep.rows) {
        rows[row.label] = {{"lhs", r15(row.lhs)}, {"rhs", r15(row.rhs)}, {"residual", r15(row.residual)}};
        r.table.rows.push_back({row.label, cell(row.lhs), cell(row.rhs), cell(row.residual)});
      }
      r.doc["decomposition"] = {{"rows", rows},
                                {"conditions_hold", rep.conditions_hold},
                                {"which_condition", std::string(twotime::to_string(rep.which_condition))},
                                {"max_residual", r15(rep.max_residual())}};
      return r;
    }
    case Command::Inequality: {
      const auto res = twotime::interposition_inequality(in.state("pre", cfg.pre),
                                                         in.observable("observable", cfg.observable),
                                                         in.state("post", cfg.post));
      Report r;
      r.doc["inequality"] = {{"p_direct", r15(res.p_direct)},
                             {"p_with_Q", r15(res.p_with_q)},
                             {"holds", res.holds()}};
      r.table.header = {"quantity", "value"};
      r.table.rows = {{"p_direct", cell(res.p_direct)},
                      {"p_with_Q", cell(res.p_with_q)},
                      {"holds", res.holds() ? "1" : "0"}};
      return r;
    }
    case Command::ProductRule: {
      if (cfg.x_value.empty() || cfg.y_value.empty())
        invalid("--x-value and --y-value are required for product-rule");
      const auto p = twotime::product_rule_check(in.state("pre", cfg.pre), in.state("post", cfg.post),
                                                 in.observable("x", cfg.x), cfg.x_value,
                                                 in.observable("y", cfg.y), cfg.y_value);
      Report r;
      add_product_rule(r, p);
      return r;
    }
    case Command::Scenario:
      return run_scenario(cfg, in);
  }
  throw Error(ErrorCode::InternalError, "unhandled command");
}

void write_error(std::ostream& err, std::string_view code, const std::string& message) {
  const json e = {{"error", {{"code", code}, {"message", message}}}};
  err << e.dump(2) << '\n';
}

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
  for (Command c : {Command::Abl, Command::Kastner, Command::Decomposition, Command::Inequality,
                    Command::ProductRule, Command::Mc, Command::Scenario})
    if (name == command_name(c)) return c;
  return std::nullopt;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.command == Command::Mc && cfg.trials == 0) invalid("trials must be >= 1");
    Inputs inputs;
    Report r = run_command(cfg, inputs);

    json doc = {{"tool", kToolName},
                {"version", ABL_ENGINE_VERSION},
                {"command", command_name(cfg.command)},
                {"seed", cfg.seed},
                {"inputs", inputs.digests()}};
    for (auto& [k, v] : r.doc.items()) doc[k] = v;

    if (cfg.format == Format::Json) {
      out << doc.dump(2) << '\n';
    } else {
      std::ostringstream s;
      for (std::size_t i = 0; i < r.table.header.size(); ++i)
        s << (i ? "," : "") << r.table.header[i];
      s << '\n';
      for (const auto& row : r.table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << csv_escape(row[i]);
        s << '\n';
      }
      out << s.str();
    }
    out.flush();
    return kExitOk;
  } catch (const Error& e) {
    write_error(err, twotime::to_string(e.code()), e.what());
    return e.code() == ErrorCode::InternalError ? kExitInternal : kExitValidation;
  } catch (const std::exception& e) {
    write_error(err, "InternalError", e.what());
    return kExitInternal;
  }
}

}  // namespace ablcli
