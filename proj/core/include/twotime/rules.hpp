#pragma once

// Two-time probability rules for a system pre-selected in |a> and
// post-selected in |b>, with a (possibly hypothetical) intervening
// measurement of a projector-valued observable Q.
//
// Projectors may be degenerate throughout: for an outcome with projector P
// the joint amplitude is <a|P|b>, which reduces to <a|q><q|b> for rank one.

#include <cstddef>
#include <string>
#include <vector>

#include "twotime/core.hpp"

namespace twotime {

// Pre-selection at t_a, post-selection at t_b, and the observable that would
// be measured at some t_a < t < t_b. Construction fails with
// ImpossiblePostSelection when sum_j |<a|P_j|b>|^2 <= kZeroProbTol.
class SelectionContext {
 public:
  SelectionContext(StateVector pre, StateVector post, Observable intervening);

  const StateVector& pre() const { return pre_; }
  const StateVector& post() const { return post_; }
  const Observable& intervening() const { return intervening_; }

  std::size_t dim() const { return pre_.dim(); }

  // Same selection, different intervening observable.
  SelectionContext with_intervening(Observable q) const;
  // Pre and post exchanged.
  SelectionContext time_reversed() const;

 private:
  StateVector pre_;
  StateVector post_;
  Observable intervening_;
};

struct LabeledValue {
  std::string label;
  double value = 0.0;
};

// Normalized distribution over an observable's outcome labels.
class ProbabilityDistribution {
 public:
  explicit ProbabilityDistribution(std::vector<LabeledValue> entries);

  const std::vector<LabeledValue>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  // Throws UnknownOutcomeLabel.
  double at(const std::string& label) const;

 private:
  std::vector<LabeledValue> entries_;
};

// Nonnegative weights with no normalization constraint.
class WeightAssignment {
 public:
  explicit WeightAssignment(std::vector<LabeledValue> entries);

  const std::vector<LabeledValue>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  double at(const std::string& label) const;
  double sum() const;

 private:
  std::vector<LabeledValue> entries_;
};

enum class DecompositionCondition { QEqualsA, QEqualsB, InterferenceTermZero, None };

std::string_view to_string(DecompositionCondition c) noexcept;

struct DecompositionRow {
  std::string label;
  double lhs = 0.0;       // p(q_j|a)
  double rhs = 0.0;       // sum_i p(q_j|a,b_i) p(b_i|a)
  double residual = 0.0;  // |lhs - rhs|
};

struct DecompositionReport {
  std::vector<DecompositionRow> rows;
  bool conditions_hold = false;
  DecompositionCondition which_condition = DecompositionCondition::None;

  double max_residual() const;
};

struct InterpositionResult {
  double p_direct = 0.0;  // |<a|b>|^2
  double p_with_q = 0.0;  // sum_j |<a|P_j|b>|^2

  bool holds() const { return p_direct <= p_with_q + 1e-12; }
};

struct ProductRuleReport {
  std::string x_value;
  std::string y_value;
  double abl_x = 0.0;  // ABL probability of x_value with only x interposed
  double abl_y = 0.0;  // ABL probability of y_value with only y interposed
  CMatrix product;     // P_x P_y
  bool product_is_zero = false;
  bool violation = false;
};

// |<a|P|b>|^2 for the outcome `outcome_label` of the intervening observable.
double sequential_prob(const SelectionContext& ctx, const std::string& outcome_label);

// p(b|a,Q) = sum_j |<a|P_j|b>|^2.
double marginal_with_q(const SelectionContext& ctx);

// p(q_i|a,b) = |<a|P_i|b>|^2 / sum_j |<a|P_j|b>|^2.
ProbabilityDistribution abl(const SelectionContext& ctx);

// ABL with the trivial property 1 standing in for the post-selection.
ProbabilityDistribution abl_trivial_reduction(const StateVector& pre, const Observable& q);

// |<a|P_i|b>|^2 / |<a|b>|^2. Throws OrthogonalPrePost when |<a|b>|^2 <= kZeroProbTol.
WeightAssignment kastner(const SelectionContext& ctx);

// Compares p(q_j|a) against sum_i [p(q_j,b_i|a) / p(b_i|a,Q)] p(b_i|a) for a
// final measurement of b_obs, and classifies which sufficient condition for
// equality holds. b_obs must have >= 2 rank-one outcomes.
DecompositionReport decomposition_check(const StateVector& pre, const Observable& q,
                                        const Observable& b_obs);

InterpositionResult interposition_inequality(const StateVector& pre, const Observable& q,
                                             const StateVector& post);

// Evaluates the ABL probability of x_value with only x interposed and of
// y_value with only y interposed, and the operator product of the two
// designated projectors. A violation is flagged when both probabilities are
// one while the product projector vanishes.
ProductRuleReport product_rule_check(const StateVector& pre, const StateVector& post,
                                     const Observable& x, const std::string& x_value,
                                     const Observable& y, const std::string& y_value);

}  // namespace twotime
