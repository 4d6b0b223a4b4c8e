#include "twotime/scenarios.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace twotime {

namespace {

constexpr double kDirectionTol = 1e-10;

StateVector box_pre() { return StateVector::normalized({1.0, 1.0, 1.0}); }
StateVector box_post() { return StateVector::normalized({1.0, 1.0, -1.0}); }

Observable box_full_q() {
  const std::array<StateVector, 3> kets{StateVector::basis(3, 0), StateVector::basis(3, 1),
                                        StateVector::basis(3, 2)};
  return Observable::from_basis(kets, {"A", "B", "C"});
}

// {P_j, 1 - P_j} for box j.
Observable box_binary(std::size_t box) {
  static const char* names[] = {"A", "B", "C"};
  std::vector<StateVector> rest;
  std::string rest_label;
  for (std::size_t k = 0; k < 3; ++k) {
    if (k == box) continue;
    rest.push_back(StateVector::basis(3, k));
    rest_label += rest_label.empty() ? names[k] : std::string("∪") + names[k];
  }
  const StateVector ket = StateVector::basis(3, box);
  std::vector<Outcome> outcomes;
  outcomes.push_back({names[box], projector_from_span(std::span(&ket, 1), names[box])});
  outcomes.push_back({rest_label, projector_from_span(rest, rest_label)});
  return Observable(std::move(outcomes));
}

double dot(const Direction& u, const Direction& v) { return u.x * v.x + u.y * v.y + u.z * v.z; }

void require_unit(const Direction& d, const char* name) {
  const double n = std::sqrt(dot(d, d));
  if (!std::isfinite(n) || std::abs(n - 1.0) > kDirectionTol) {
    throw Error(ErrorCode::InvalidDirection,
                std::string("spin_half: direction ") + name + " is not a unit vector");
  }
}

// Polar and azimuthal angles of a unit vector.
std::pair<double, double> angles(const Direction& n) {
  const double theta = std::acos(std::clamp(n.z, -1.0, 1.0));
  const double phi = std::atan2(n.y, n.x);
  return {theta, phi};
}

}  // namespace

// --- ScenarioBundle --------------------------------------------------------

const Observable& ScenarioBundle::variant(const std::string& variant_name) const {
  for (const NamedObservable& v : variants) {
    if (v.name == variant_name) return v.observable;
  }
  throw Error(ErrorCode::ValidationError,
              "scenario '" + name + "' has no variant '" + variant_name + "'");
}

SelectionContext ScenarioBundle::context_for(const std::string& variant_name) const {
  return context.with_intervening(variant(variant_name));
}

double ScenarioBundle::expected_value(const std::string& key) const {
  for (const ExpectedValue& e : expected) {
    if (e.name == key) return e.value;
  }
  throw Error(ErrorCode::ValidationError,
              "scenario '" + name + "' has no expected value '" + key + "'");
}

std::vector<std::string> ScenarioBundle::variant_names() const {
  std::vector<std::string> out;
  for (const NamedObservable& v : variants) out.push_back(v.name);
  return out;
}

// --- constructors ----------------------------------------------------------

ScenarioBundle three_box() {
  Observable full = box_full_q();
  ScenarioBundle b{
      "three-box",
      SelectionContext(box_pre(), box_post(), full),
      {{"fullQ", full}, {"QA", box_binary(0)}, {"QB", box_binary(1)}},
      {
          {"p(A|fullQ)", 1.0 / 3.0, "ABL numerator 1/9 over denominator 1/9+1/9+1/9"},
          {"p(B|fullQ)", 1.0 / 3.0, "by symmetry of boxes A and B"},
          {"p(A|QA)", 1.0, "ABL with binary observable QA; denominator 1/9 + 0"},
          {"p(B|QB)", 1.0, "ABL with binary observable QB"},
          {"p(b|a,fullQ)", 1.0 / 3.0, "sum of three terms 1/9"},
          {"p(b|a,QA)", 1.0 / 9.0, "1/9 + 0"},
          {"p(b|a)", 1.0 / 9.0, "|<psi1|psi2>|^2 with <psi1|psi2> = 1/3"},
          {"kastner_sum(fullQ)", 3.0, "each weight (1/9)/(1/9)"},
      },
      {},
      std::nullopt,
  };
  return b;
}

BeeperSet parse_beepers(const std::string& text) {
  BeeperSet set;
  if (text == "none" || text.empty()) return set;
  for (char ch : text) {
    if (ch == 'A' || ch == 'a') {
      set.a = true;
    } else if (ch == 'B' || ch == 'b') {
      set.b = true;
    } else {
      throw Error(ErrorCode::ValidationError,
                  "three-hole: beeper configuration must be a subset of {A, B}, got '" + text +
                      "'");
    }
  }
  return set;
}

ScenarioBundle three_hole(BeeperSet beepers) {
  std::string config;
  if (beepers.a) config += "A";
  if (beepers.b) config += "B";
  if (config.empty()) config = "none";

  Observable q = Observable::trivial(3);
  std::vector<ExpectedValue> expected;
  if (beepers.a && beepers.b) {
    q = box_full_q();
    expected = {{"p(A)", 1.0 / 3.0, "both beepers: equally likely through any hole"},
                {"p(B)", 1.0 / 3.0, "both beepers"},
                {"p(C)", 1.0 / 3.0, "both beepers; a silent pair of beepers means C"}};
  } else if (beepers.a) {
    q = box_binary(0);
    expected = {{"p(A)", 1.0, "only F_A in place: through A with probability one"}};
  } else if (beepers.b) {
    q = box_binary(1);
    expected = {{"p(B)", 1.0, "only F_B in place: through B with probability one"}};
  } else {
    expected = {{"p(1)", 1.0, "no beepers: only the trivial property"}};
  }

  ScenarioBundle b{
      "three-hole",
      SelectionContext(box_pre(), box_post(), q),
      {{config, q}},
      std::move(expected),
      {},
      std::nullopt,
  };
  return b;
}

StateVector spin_up(const Direction& n) {
  const auto [theta, phi] = angles(n);
  CVector v(2);
  v << std::cos(theta / 2), std::polar(std::sin(theta / 2), phi);
  return StateVector::normalized(std::move(v));
}

StateVector spin_down(const Direction& n) {
  const auto [theta, phi] = angles(n);
  CVector v(2);
  v << std::sin(theta / 2), -std::polar(std::cos(theta / 2), phi);
  return StateVector::normalized(std::move(v));
}

ScenarioBundle spin_half(Direction a, Direction b, Direction c) {
  require_unit(a, "a");
  require_unit(b, "b");
  require_unit(c, "c");

  const std::array<StateVector, 2> c_kets{spin_up(c), spin_down(c)};
  Observable sigma_c = Observable::from_basis(c_kets, {"up", "down"});

  std::vector<std::string> flags;
  if (1.0 + dot(a, b) <= kZeroProbTol) flags.push_back("antiparallel_pre_post");

  // Bloch-vector forms: |<a+|c+>|^2 = (1 + a.c)/2 and so on.
  const double ac = dot(a, c);
  const double cb = dot(c, b);
  const double up = (1 + ac) * (1 + cb) / 4;
  const double down = (1 - ac) * (1 - cb) / 4;

  ScenarioBundle bundle{
      "spin-half",
      SelectionContext(spin_up(a), spin_up(b), sigma_c),
      {{"sigma_c", sigma_c}},
      {
          {"p(up)", up / (up + down), "(1+a.c)(1+c.b) / [(1+a.c)(1+c.b) + (1-a.c)(1-c.b)]"},
          {"p(down)", down / (up + down), "complement of p(up)"},
          {"p(b|a,Q)", up + down, "sum of (1 +- a.c)(1 +- c.b)/4"},
          {"p(b|a)", (1 + dot(a, b)) / 2, "(1 + a.b)/2"},
      },
      std::move(flags),
      std::nullopt,
  };
  return bundle;
}

ScenarioBundle spin_half_default() {
  const double r = std::sqrt(0.5);
  return spin_half({0, 0, 1}, {1, 0, 0}, {r, 0, r});
}

ScenarioBundle product_rule_scenario() {
  ScenarioBundle b{
      "product-rule",
      SelectionContext(box_pre(), box_post(), box_full_q()),
      {{"QA", box_binary(0)}, {"QB", box_binary(1)}},
      {
          {"p(A|QA)", 1.0, "intervening QA would yield 'through A' with probability one"},
          {"p(B|QB)", 1.0, "intervening QB would yield 'through B' with probability one"},
          {"violation", 1.0, "P_A P_B = 0 although both values are certain"},
      },
      {},
      ProductRuleSetup{"QA", "A", "QB", "B"},
  };
  return b;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"three-box", "three-hole", "spin-half",
                                              "product-rule"};
  return names;
}

}  // namespace twotime
