#include "twotime/rules.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

namespace twotime {

namespace {

void require_dim(std::size_t expected, std::size_t got, const char* where) {
  if (expected != got) {
    std::ostringstream os;
    os << where << ": dimension mismatch (" << expected << " vs " << got << ")";
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

// <a|P|b>
Complex sandwich(const StateVector& a, const Projector& p, const StateVector& b) {
  return a.amplitudes().dot(p.matrix() * b.amplitudes());
}

// |<a|P_j|b>|^2 for every outcome of q, in outcome order.
std::vector<double> joint_weights(const StateVector& a, const Observable& q,
                                  const StateVector& b) {
  std::vector<double> w;
  w.reserve(q.size());
  for (const Outcome& o : q.outcomes()) w.push_back(std::norm(sandwich(a, o.projector, b)));
  return w;
}

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

std::string describe(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string_view to_string(DecompositionCondition c) noexcept {
  switch (c) {
    case DecompositionCondition::QEqualsA: return "Q_equals_A";
    case DecompositionCondition::QEqualsB: return "Q_equals_B";
    case DecompositionCondition::InterferenceTermZero: return "interference_term_zero";
    case DecompositionCondition::None: return "none";
  }
  return "none";
}

// --- SelectionContext ------------------------------------------------------

SelectionContext::SelectionContext(StateVector pre, StateVector post, Observable intervening)
    : pre_(std::move(pre)), post_(std::move(post)), intervening_(std::move(intervening)) {
  require_dim(pre_.dim(), post_.dim(), "SelectionContext (post)");
  require_dim(pre_.dim(), intervening_.dim(), "SelectionContext (intervening)");
  const auto w = joint_weights(pre_, intervening_, post_);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total <= kZeroProbTol) {
    throw Error(ErrorCode::ImpossiblePostSelection,
                "pre- and post-selection cannot co-occur with the intervening observable "
                "interposed (p(b|a,Q) = " + describe(total) + ")");
  }
}

SelectionContext SelectionContext::with_intervening(Observable q) const {
  return SelectionContext(pre_, post_, std::move(q));
}

SelectionContext SelectionContext::time_reversed() const {
  return SelectionContext(post_, pre_, intervening_);
}

// --- distributions ---------------------------------------------------------

ProbabilityDistribution::ProbabilityDistribution(std::vector<LabeledValue> entries)
    : entries_(std::move(entries)) {
  double sum = 0.0;
  for (const LabeledValue& e : entries_) {
    if (!(e.value >= 0.0 && e.value <= 1.0)) {
      throw Error(ErrorCode::ValidationError,
                  "ProbabilityDistribution: value for '" + e.label + "' outside [0,1]");
    }
    sum += e.value;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::ValidationError,
                "ProbabilityDistribution: values sum to " + describe(sum) + ", not 1");
  }
}

double ProbabilityDistribution::at(const std::string& label) const {
  for (const LabeledValue& e : entries_) {
    if (e.label == label) return e.value;
  }
  throw Error(ErrorCode::UnknownOutcomeLabel, "unknown outcome label '" + label + "'");
}

WeightAssignment::WeightAssignment(std::vector<LabeledValue> entries)
    : entries_(std::move(entries)) {
  for (const LabeledValue& e : entries_) {
    if (!(e.value >= 0.0) || !std::isfinite(e.value)) {
      throw Error(ErrorCode::ValidationError,
                  "WeightAssignment: weight for '" + e.label + "' must be finite and >= 0");
    }
  }
}

double WeightAssignment::at(const std::string& label) const {
  for (const LabeledValue& e : entries_) {
    if (e.label == label) return e.value;
  }
  throw Error(ErrorCode::UnknownOutcomeLabel, "unknown outcome label '" + label + "'");
}

double WeightAssignment::sum() const {
  double s = 0.0;
  for (const LabeledValue& e : entries_) s += e.value;
  return s;
}

double DecompositionReport::max_residual() const {
  double m = 0.0;
  for (const DecompositionRow& r : rows) m = std::max(m, r.residual);
  return m;
}

// --- rules -----------------------------------------------------------------

double sequential_prob(const SelectionContext& ctx, const std::string& outcome_label) {
  const Projector& p = ctx.intervening().projector(outcome_label);
  return clamp_probability(std::norm(sandwich(ctx.pre(), p, ctx.post())));
}

double marginal_with_q(const SelectionContext& ctx) {
  double total = 0.0;
  for (const Outcome& o : ctx.intervening().outcomes()) {
    total += sequential_prob(ctx, o.label);
  }
  return clamp_probability(total);
}

ProbabilityDistribution abl(const SelectionContext& ctx) {
  const Observable& q = ctx.intervening();
  const auto w = joint_weights(ctx.pre(), q, ctx.post());
  const double denom = std::accumulate(w.begin(), w.end(), 0.0);
  if (denom <= kZeroProbTol) {
    throw Error(ErrorCode::ImpossiblePostSelection,
                "abl: denominator p(b|a,Q) = " + describe(denom) + " vanishes");
  }
  std::vector<LabeledValue> entries;
  entries.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    entries.push_back({q[i].label, clamp_probability(w[i] / denom)});
  }
  return ProbabilityDistribution(std::move(entries));
}

ProbabilityDistribution abl_trivial_reduction(const StateVector& pre, const Observable& q) {
  require_dim(pre.dim(), q.dim(), "abl_trivial_reduction");
  // Numerator <a|P_i 1 P_i|a>; the post-selection property is the identity.
  const auto n = static_cast<Eigen::Index>(pre.dim());
  const CMatrix one = CMatrix::Identity(n, n);
  const CVector& a = pre.amplitudes();
  std::vector<double> num;
  num.reserve(q.size());
  for (const Outcome& o : q.outcomes()) {
    const CMatrix& p = o.projector.matrix();
    num.push_back(a.dot(p * one * p * a).real());
  }
  const double denom = std::accumulate(num.begin(), num.end(), 0.0);
  std::vector<LabeledValue> entries;
  entries.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    entries.push_back({q[i].label, clamp_probability(num[i] / denom)});
  }
  return ProbabilityDistribution(std::move(entries));
}

WeightAssignment kastner(const SelectionContext& ctx) {
  const double direct = std::norm(inner(ctx.pre(), ctx.post()));
  if (direct <= kZeroProbTol) {
    throw Error(ErrorCode::OrthogonalPrePost,
                "kastner: |<a|b>|^2 = " + describe(direct) + " vanishes; the rule is undefined");
  }
  const Observable& q = ctx.intervening();
  const auto w = joint_weights(ctx.pre(), q, ctx.post());
  std::vector<LabeledValue> entries;
  entries.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) entries.push_back({q[i].label, w[i] / direct});
  return WeightAssignment(std::move(entries));
}

DecompositionReport decomposition_check(const StateVector& pre, const Observable& q,
                                        const Observable& b_obs) {
  require_dim(pre.dim(), q.dim(), "decomposition_check (q)");
  require_dim(pre.dim(), b_obs.dim(), "decomposition_check (b_obs)");
  if (b_obs.size() < 2) {
    throw Error(ErrorCode::DegeneratePostObservable,
                "decomposition_check: the final observable needs at least two outcomes");
  }
  for (const Outcome& b : b_obs.outcomes()) {
    if (b.projector.rank() != 1) {
      throw Error(ErrorCode::DegeneratePostObservable,
                  "decomposition_check: final outcome '" + b.label + "' is not rank one");
    }
  }

  const CVector& a = pre.amplitudes();
  const std::size_t nq = q.size();
  const std::size_t nb = b_obs.size();

  // cross[i](j,k) = <a|P_j B_i P_k|a>; its diagonal is p(q_j, b_i | a).
  std::vector<CMatrix> cross(nb, CMatrix::Zero(static_cast<Eigen::Index>(nq),
                                               static_cast<Eigen::Index>(nq)));
  std::vector<CVector> pa;
  pa.reserve(nq);
  for (const Outcome& o : q.outcomes()) pa.push_back(o.projector.matrix() * a);
  for (std::size_t i = 0; i < nb; ++i) {
    const CMatrix& bi = b_obs[i].projector.matrix();
    for (std::size_t j = 0; j < nq; ++j) {
      const CVector bpa = bi * pa[j];
      for (std::size_t k = 0; k < nq; ++k) {
        cross[i](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = pa[k].dot(bpa);
      }
    }
  }

  std::vector<double> p_b_given_a_q(nb), p_b_given_a(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    p_b_given_a_q[i] = cross[i].diagonal().real().sum();
    p_b_given_a[i] = a.dot(b_obs[i].projector.matrix() * a).real();
    if (p_b_given_a_q[i] <= kZeroProbTol) {
      throw Error(ErrorCode::DegeneratePostObservable,
                  "decomposition_check: p(" + b_obs[i].label +
                      "|a,Q) vanishes, the corresponding term is undefined");
    }
  }

  DecompositionReport report;
  report.rows.reserve(nq);
  for (std::size_t j = 0; j < nq; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    DecompositionRow row;
    row.label = q[j].label;
    row.lhs = clamp_probability(a.dot(pa[j]).real());
    double rhs = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
      rhs += cross[i](jj, jj).real() / p_b_given_a_q[i] * p_b_given_a[i];
    }
    row.rhs = rhs;
    row.residual = std::abs(row.lhs - row.rhs);
    report.rows.push_back(std::move(row));
  }

  // Structural cases first, so round-off cannot misclassify them.
  bool q_equals_a = false;
  for (std::size_t j = 0; j < nq; ++j) {
    if (a.dot(pa[j]).real() >= 1.0 - kNormTol) q_equals_a = true;
  }
  bool q_equals_b = true;
  for (const Outcome& b : b_obs.outcomes()) {
    bool inside = false;
    for (const Outcome& o : q.outcomes()) {
      if (max_abs(o.projector.matrix() * b.projector.matrix() - b.projector.matrix()) <=
          kNormTol) {
        inside = true;
        break;
      }
    }
    q_equals_b = q_equals_b && inside;
  }
  bool interference_zero = true;
  for (std::size_t i = 0; i < nb && interference_zero; ++i) {
    for (std::size_t j = 0; j < nq; ++j) {
      for (std::size_t k = 0; k < nq; ++k) {
        if (j == k) continue;
        const auto jj = static_cast<Eigen::Index>(j);
        const auto kk = static_cast<Eigen::Index>(k);
        if (std::abs(cross[i](jj, kk).real()) > kCondTol) interference_zero = false;
      }
    }
  }

  if (q_equals_a) {
    report.which_condition = DecompositionCondition::QEqualsA;
  } else if (q_equals_b) {
    report.which_condition = DecompositionCondition::QEqualsB;
  } else if (interference_zero) {
    report.which_condition = DecompositionCondition::InterferenceTermZero;
  }
  report.conditions_hold = report.which_condition != DecompositionCondition::None;
  return report;
}

InterpositionResult interposition_inequality(const StateVector& pre, const Observable& q,
                                             const StateVector& post) {
  require_dim(pre.dim(), post.dim(), "interposition_inequality (post)");
  require_dim(pre.dim(), q.dim(), "interposition_inequality (q)");
  const auto w = joint_weights(pre, q, post);
  InterpositionResult r;
  r.p_direct = clamp_probability(std::norm(inner(pre, post)));
  r.p_with_q = clamp_probability(std::accumulate(w.begin(), w.end(), 0.0));
  return r;
}

ProductRuleReport product_rule_check(const StateVector& pre, const StateVector& post,
                                     const Observable& x, const std::string& x_value,
                                     const Observable& y, const std::string& y_value) {
  require_dim(x.dim(), y.dim(), "product_rule_check");
  for (const Outcome& ox : x.outcomes()) {
    for (const Outcome& oy : y.outcomes()) {
      const CMatrix& px = ox.projector.matrix();
      const CMatrix& py = oy.projector.matrix();
      if (max_abs(px * py - py * px) > kNormTol) {
        throw Error(ErrorCode::NonCommutingObservables,
                    "product_rule_check: projectors '" + ox.label + "' and '" + oy.label +
                        "' do not commute");
      }
    }
  }

  const SelectionContext ctx_x(pre, post, x);
  const SelectionContext ctx_y(pre, post, y);

  ProductRuleReport report;
  report.x_value = x_value;
  report.y_value = y_value;
  report.abl_x = abl(ctx_x).at(x_value);
  report.abl_y = abl(ctx_y).at(y_value);
  report.product = x.projector(x_value).matrix() * y.projector(y_value).matrix();
  report.product_is_zero = max_abs(report.product) <= kNormTol;
  const bool both_certain =
      std::abs(report.abl_x - 1.0) <= kCondTol && std::abs(report.abl_y - 1.0) <= kCondTol;
  report.violation = both_certain && report.product_is_zero;
  return report;
}

}  // namespace twotime
