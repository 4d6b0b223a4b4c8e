#pragma once

// Ready-made pre/post-selection setups: the three-box system, the
// three-hole wall with beeper detectors, spin-1/2 along arbitrary axes, and
// the commuting-projector product-rule setup.

#include <optional>
#include <string>
#include <vector>

#include "twotime/core.hpp"
#include "twotime/rules.hpp"

namespace twotime {

struct ExpectedValue {
  std::string name;
  double value = 0.0;
  std::string note;
};

struct NamedObservable {
  std::string name;
  Observable observable;
};

// Designated values for product_rule_check.
struct ProductRuleSetup {
  std::string x_variant;
  std::string x_value;
  std::string y_variant;
  std::string y_value;
};

struct ScenarioBundle {
  std::string name;
  SelectionContext context;
  std::vector<NamedObservable> variants;
  std::vector<ExpectedValue> expected;
  std::vector<std::string> flags;
  std::optional<ProductRuleSetup> product_rule;

  // Throws ValidationError for an unknown variant name.
  const Observable& variant(const std::string& name) const;
  SelectionContext context_for(const std::string& variant_name) const;
  double expected_value(const std::string& name) const;
  std::vector<std::string> variant_names() const;
};

// pre = (|A>+|B>+|C>)/sqrt3, post = (|A>+|B>-|C>)/sqrt3. Variants "fullQ",
// "QA" = {A, B∪C}, "QB" = {B, A∪C}; the main context uses fullQ.
ScenarioBundle three_box();

struct BeeperSet {
  bool a = false;
  bool b = false;
};

// Beepers {A} -> QA, {B} -> QB, {A,B} -> fullQ, {} -> trivial observable.
// The pi phase shift behind hole C is carried by the post-selection state.
ScenarioBundle three_hole(BeeperSet beepers);

// Parses "A", "B", "AB" / "BA", or "none" / "".
BeeperSet parse_beepers(const std::string& text);

struct Direction {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;
};

// Spin-up along a (pre), spin-up along b (post), sigma along c intervening
// with outcomes "up" and "down". Kets use the half-angle convention
// |n+> = (cos(theta/2), e^{i phi} sin(theta/2)). Directions must be unit
// vectors within 1e-10 (InvalidDirection otherwise). An antiparallel a, b
// pair is flagged "antiparallel_pre_post".
ScenarioBundle spin_half(Direction a, Direction b, Direction c);

// a = +z, b = +x, c at 45 degrees in the x-z plane.
ScenarioBundle spin_half_default();

// Three-box states with x = QA (value "A") and y = QB (value "B").
ScenarioBundle product_rule_scenario();

// "three-box", "three-hole", "spin-half", "product-rule".
const std::vector<std::string>& scenario_names();

// Spin-up / spin-down kets along a unit direction.
StateVector spin_up(const Direction& n);
StateVector spin_down(const Direction& n);

}  // namespace twotime
