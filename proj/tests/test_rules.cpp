#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "twotime/rules.hpp"
#include "twotime/scenarios.hpp"
#include "support.hpp"

using namespace twotime;
namespace ts = testing_support;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InternalError;
}

Observable basis_observable(std::initializer_list<StateVector> kets,
                            std::vector<std::string> labels) {
  const std::vector<StateVector> v(kets);
  return Observable::from_basis(v, labels);
}

StateVector ket2(Complex a, Complex b) { return StateVector::normalized({a, b}); }

const Complex I(0, 1);

}  // namespace

TEST_CASE("SelectionContext validation") {
  const auto e0 = StateVector::basis(2, 0);
  const auto e1 = StateVector::basis(2, 1);
  const auto z = basis_observable({e0, e1}, {"0", "1"});
  // |0> -> |1> is unreachable with z interposed
  CHECK(code_of([&] { SelectionContext c(e0, e1, z); }) == ErrorCode::ImpossiblePostSelection);
  CHECK(code_of([&] { SelectionContext c(e0, StateVector::basis(3, 0), z); }) ==
        ErrorCode::DimensionMismatch);
  const auto plus = ket2(1, 1);
  CHECK_NOTHROW(SelectionContext(e0, plus, z));
}

TEST_CASE("three-box sequential, marginal, ABL and Kastner values") {
  const ScenarioBundle box = three_box();
  const SelectionContext full = box.context_for("fullQ");
  const SelectionContext qa = box.context_for("QA");

  for (const char* label : {"A", "B", "C"}) {
    CHECK(std::abs(sequential_prob(full, label) - 1.0 / 9.0) < 1e-15);
  }
  CHECK(sequential_prob(qa, "B∪C") < 1e-30);
  CHECK(code_of([&] { sequential_prob(full, "D"); }) == ErrorCode::UnknownOutcomeLabel);

  CHECK(std::abs(marginal_with_q(full) - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(marginal_with_q(qa) - 1.0 / 9.0) < 1e-12);

  const auto p_full = abl(full);
  for (const char* label : {"A", "B", "C"}) CHECK(std::abs(p_full.at(label) - 1.0 / 3.0) < 1e-12);
  const auto p_qa = abl(qa);
  CHECK(std::abs(p_qa.at("A") - 1.0) < 1e-12);
  CHECK(p_qa.at("B∪C") == 0.0);

  const auto k = kastner(full);
  for (const char* label : {"A", "B", "C"}) CHECK(std::abs(k.at(label) - 1.0) < 1e-12);
  CHECK(std::abs(k.sum() - 3.0) < 1e-12);
}

TEST_CASE("sequential_prob equals Born times Born after collapse") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = ts::random_dim(rng, 2, 6);
    const auto inst = ts::random_instance(rng, d);
    const SelectionContext ctx(ts::to_state(inst.pre), ts::to_state(inst.post),
                               ts::to_observable(inst.parts));
    const auto w = DensityOperator::pure(ctx.pre());
    const auto post_p = Projector::rank_one(ctx.post(), "b");
    double sum = 0;
    for (const Outcome& o : ctx.intervening().outcomes()) {
      const double s = sequential_prob(ctx, o.label);
      sum += s;
      const double first = born_prob(w, o.projector);
      if (first > kZeroProbTol) {
        CHECK(std::abs(s - first * born_prob(luders_update(w, o.projector), post_p)) < 1e-12);
      }
    }
    CHECK(std::abs(sum - marginal_with_q(ctx)) < 1e-12);
  }
}

TEST_CASE("sequential_prob is one when post equals pre and Q fixes pre") {
  const auto a = ket2(1, I);
  const auto b = ket2(1, -I);
  const SelectionContext ctx(a, a, basis_observable({a, b}, {"first", "second"}));
  CHECK(sequential_prob(ctx, "first") == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sequential_prob(ctx, "second") < 1e-30);
}

TEST_CASE("marginal with the trivial observable is the direct transition probability") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 50; ++t) {
    const auto a = ts::to_state(oracle::random_ket(rng, 4));
    const auto b = ts::to_state(oracle::random_ket(rng, 4));
    const SelectionContext ctx(a, b, Observable::trivial(4));
    CHECK(std::abs(marginal_with_q(ctx) - born_prob_pure(a, b)) < 1e-14);
    const auto p = abl(ctx);
    CHECK(p.size() == 1);
    CHECK(std::abs(p.at("1") - 1.0) < 1e-12);
    CHECK(std::abs(kastner(ctx).at("1") - 1.0) < 1e-12);
  }
}

TEST_CASE("ABL with Q = A concentrates on the pre-selected outcome") {
  const auto a = ket2(1, 1);
  const auto a_perp = ket2(1, -1);
  const auto b = ket2(0.3, 0.8 * I);
  const Observable q = basis_observable({a_perp, a}, {"minus", "plus"});
  const SelectionContext ctx(a, b, q);
  CHECK(abl(ctx).at("plus") == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(abl(ctx).at("minus") < 1e-30);
  // both rules reduce to the same delta selection
  const auto k = kastner(ctx);
  CHECK(std::abs(k.at("plus") - abl(ctx).at("plus")) < 1e-12);
  CHECK(std::abs(k.at("minus") - abl(ctx).at("minus")) < 1e-12);
}

TEST_CASE("abl agrees with the brute-force oracle on random degenerate contexts") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 300; ++t) {
    const std::size_t d = ts::random_dim(rng, 2, 7);
    const auto inst = ts::random_instance(rng, d);
    const SelectionContext ctx(ts::to_state(inst.pre), ts::to_state(inst.post),
                               ts::to_observable(inst.parts));
    const auto expect = oracle::abl(inst.pre, ts::projectors_of(inst.parts), inst.post);
    const auto got = abl(ctx);
    double sum = 0;
    for (std::size_t j = 0; j < expect.size(); ++j) {
      CHECK(std::abs(got.entries()[j].value - expect[j]) < 1e-10);
      sum += got.entries()[j].value;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("abl_trivial_reduction matches independent Born probabilities") {
  const ScenarioBundle box = three_box();
  const auto p = abl_trivial_reduction(box.context.pre(), box.variant("fullQ"));
  for (const char* label : {"A", "B", "C"}) CHECK(std::abs(p.at(label) - 1.0 / 3.0) < 1e-12);

  const auto e0 = StateVector::basis(3, 0);
  const auto eig = abl_trivial_reduction(e0, box.variant("fullQ"));
  CHECK(eig.at("A") == doctest::Approx(1.0));
  CHECK(eig.at("B") == 0.0);
  CHECK(eig.at("C") == 0.0);

  std::mt19937_64 rng(37);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = ts::random_dim(rng, 2, 8);
    const auto inst = ts::random_instance(rng, d);
    const auto got = abl_trivial_reduction(ts::to_state(inst.pre), ts::to_observable(inst.parts));
    for (std::size_t j = 0; j < inst.parts.size(); ++j) {
      double born = 0;
      for (const auto& k : inst.parts[j]) born += std::norm(oracle::braket(k, inst.pre));
      CHECK(std::abs(got.entries()[j].value - born) < 1e-9);
    }
  }
}

TEST_CASE("kastner rejects orthogonal pre/post and obeys the weight-sum identity") {
  const auto e0 = StateVector::basis(2, 0);
  const auto e1 = StateVector::basis(2, 1);
  const Observable x = basis_observable({ket2(1, 1), ket2(1, -1)}, {"+", "-"});
  const SelectionContext ctx(e0, e1, x);
  CHECK(code_of([&] { kastner(ctx); }) == ErrorCode::OrthogonalPrePost);
  // ABL is still defined here
  CHECK(abl(ctx).at("+") == doctest::Approx(0.5));

  std::mt19937_64 rng(41);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = ts::random_dim(rng, 2, 6);
    const auto inst = ts::random_instance(rng, d);
    const SelectionContext c(ts::to_state(inst.pre), ts::to_state(inst.post),
                             ts::to_observable(inst.parts));
    const double direct = born_prob_pure(c.pre(), c.post());
    if (direct <= kZeroProbTol) continue;
    CHECK(std::abs(kastner(c).sum() * direct - marginal_with_q(c)) < 1e-9);
  }
}

TEST_CASE("decomposition_check: Q = A has zero residuals") {
  const auto a = StateVector::basis(2, 0);
  const Observable q = basis_observable({a, StateVector::basis(2, 1)}, {"z+", "z-"});
  const Observable b_obs = basis_observable({ket2(1, 1), ket2(1, -1)}, {"x+", "x-"});
  const auto report = decomposition_check(a, q, b_obs);
  CHECK(report.which_condition == DecompositionCondition::QEqualsA);
  CHECK(report.conditions_hold);
  CHECK(report.max_residual() < 1e-15);
}

TEST_CASE("decomposition_check: Q = B has zero residuals") {
  std::mt19937_64 rng(43);
  const auto basis = oracle::random_basis(rng, 3);
  const auto pre = ts::to_state(oracle::random_ket(rng, 3));
  // Q groups the B eigenkets, so every |b_i> is an eigenket of Q.
  std::vector<Outcome> q_out;
  q_out.push_back({"q01", projector_from_span(std::vector{ts::to_state(basis[0]),
                                                          ts::to_state(basis[1])},
                                              "q01")});
  q_out.push_back({"q2", Projector::rank_one(ts::to_state(basis[2]), "q2")});
  const Observable q(std::move(q_out));
  const Observable b_obs = Observable::from_basis(
      std::vector{ts::to_state(basis[0]), ts::to_state(basis[1]), ts::to_state(basis[2])},
      {"b0", "b1", "b2"});
  const auto report = decomposition_check(pre, q, b_obs);
  CHECK(report.which_condition == DecompositionCondition::QEqualsB);
  CHECK(report.max_residual() < 1e-9);
}

TEST_CASE("decomposition_check: vanishing interference term") {
  // a = +z, Q = sigma_x, B = sigma_y: every cross term is purely imaginary.
  const auto a = StateVector::basis(2, 0);
  const Observable q = basis_observable({ket2(1, 1), ket2(1, -1)}, {"x+", "x-"});
  const Observable b_obs = basis_observable({ket2(1, I), ket2(1, -I)}, {"y+", "y-"});
  const auto report = decomposition_check(a, q, b_obs);
  CHECK(report.which_condition == DecompositionCondition::InterferenceTermZero);
  CHECK(report.max_residual() < 1e-9);
}

TEST_CASE("decomposition_check: spin-1/2 counterexample") {
  // a = +z, B = sigma_x, Q = sigma along 45 degrees in the x-z plane.
  const double h = M_PI / 8;
  const auto a = StateVector::basis(2, 0);
  const auto c_up = ket2(std::cos(h), std::sin(h));
  const auto c_down = ket2(-std::sin(h), std::cos(h));
  const auto x_up = ket2(1, 1);
  const auto x_down = ket2(1, -1);
  const Observable q = basis_observable({c_up, c_down}, {"up", "down"});
  const Observable b_obs = basis_observable({x_up, x_down}, {"x+", "x-"});
  const auto report = decomposition_check(a, q, b_obs);

  // Independent evaluation of both sides with explicit 2-dim amplitudes.
  const std::array<oracle::Ket, 2> qs{ts::to_ket(c_up), ts::to_ket(c_down)};
  const std::array<oracle::Ket, 2> bs{ts::to_ket(x_up), ts::to_ket(x_down)};
  const oracle::Ket ak = ts::to_ket(a);
  for (std::size_t j = 0; j < 2; ++j) {
    const double lhs = std::norm(oracle::braket(ak, qs[j]));
    double rhs = 0;
    for (const auto& b : bs) {
      double with_q = 0;
      for (const auto& qq : qs) with_q += std::norm(oracle::braket(ak, qq) * oracle::braket(qq, b));
      rhs += std::norm(oracle::braket(ak, qs[j]) * oracle::braket(qs[j], b)) / with_q *
             std::norm(oracle::braket(ak, b));
    }
    CHECK(std::abs(report.rows[j].lhs - lhs) < 1e-12);
    CHECK(std::abs(report.rows[j].rhs - rhs) < 1e-12);
  }
  CHECK(report.which_condition == DecompositionCondition::None);
  CHECK_FALSE(report.conditions_hold);
  // 1 / (6 sqrt 2)
  CHECK(std::abs(report.max_residual() - 1.0 / (6.0 * std::sqrt(2.0))) < 1e-12);
  CHECK(report.max_residual() > 0.05);
}

TEST_CASE("decomposition_check rejects degenerate or unreachable final observables") {
  const auto a = StateVector::basis(3, 0);
  const auto box = three_box();
  CHECK(code_of([&] { decomposition_check(a, box.variant("fullQ"), box.variant("QA")); }) ==
        ErrorCode::DegeneratePostObservable);
  CHECK(code_of([&] {
          decomposition_check(a, box.variant("fullQ"), Observable::trivial(3));
        }) == ErrorCode::DegeneratePostObservable);
  // p(b_i|a,Q) = 0 for b = |B>, |C> when a = |A> and Q = B
  CHECK(code_of([&] {
          decomposition_check(a, box.variant("fullQ"), box.variant("fullQ"));
        }) == ErrorCode::DegeneratePostObservable);
}

TEST_CASE("property: residuals vanish whenever a condition is reported") {
  std::mt19937_64 rng(47);
  int flagged = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t d = ts::random_dim(rng, 2, 5);
    const auto pre = ts::to_state(oracle::random_ket(rng, d));
    const auto q = ts::to_observable(oracle::random_partition(rng, d, ts::random_dim(rng, 2, d)));
    std::vector<StateVector> bk;
    for (const auto& k : oracle::random_basis(rng, d)) bk.push_back(ts::to_state(k));
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < d; ++i) labels.push_back("b" + std::to_string(i));
    const auto report = decomposition_check(pre, q, Observable::from_basis(bk, labels));
    if (report.conditions_hold) {
      ++flagged;
      CHECK(report.max_residual() < 1e-9);
    }
  }
  // Random instances essentially never satisfy a condition.
  CHECK(flagged == 0);
}

TEST_CASE("interposition_inequality examples") {
  const auto box = three_box();
  const auto r = interposition_inequality(box.context.pre(), box.variant("fullQ"),
                                          box.context.post());
  CHECK(std::abs(r.p_direct - 1.0 / 9.0) < 1e-15);
  CHECK(std::abs(r.p_with_q - 1.0 / 3.0) < 1e-15);
  CHECK(r.holds());

  const auto triv = interposition_inequality(box.context.pre(), Observable::trivial(3),
                                             box.context.post());
  CHECK(std::abs(triv.p_direct - triv.p_with_q) < 1e-15);

  // Constructive interference: interposing z on |+> -> |+> lowers the
  // transition probability from 1 to 1/2.
  const auto plus = ket2(1, 1);
  const Observable z =
      basis_observable({StateVector::basis(2, 0), StateVector::basis(2, 1)}, {"0", "1"});
  const auto c = interposition_inequality(plus, z, plus);
  CHECK(c.p_direct == doctest::Approx(1.0));
  CHECK(c.p_with_q == doctest::Approx(0.5));
  CHECK_FALSE(c.holds());
}

TEST_CASE("product_rule_check") {
  const auto box = three_box();
  const auto& pre = box.context.pre();
  const auto& post = box.context.post();

  SUBCASE("three-box QA/QB violates the product rule") {
    const auto r = product_rule_check(pre, post, box.variant("QA"), "A", box.variant("QB"), "B");
    CHECK(std::abs(r.abl_x - 1.0) < 1e-12);
    CHECK(std::abs(r.abl_y - 1.0) < 1e-12);
    CHECK(r.product_is_zero);
    CHECK(r.violation);
  }
  SUBCASE("x = y is consistent") {
    const auto r = product_rule_check(pre, post, box.variant("QA"), "A", box.variant("QA"), "A");
    CHECK_FALSE(r.product_is_zero);
    CHECK_FALSE(r.violation);
  }
  SUBCASE("commuting diagonal observables on a 2x2 product space") {
    // x = sigma_z (x) 1, y = 1 (x) sigma_z; pre = |++>, post = |00>.
    const auto e = [](std::size_t i) { return StateVector::basis(4, i); };
    const auto span2 = [](const StateVector& u, const StateVector& v, const std::string& l) {
      return projector_from_span(std::vector{u, v}, l);
    };
    const Observable x({{"0", span2(e(0), e(1), "0")}, {"1", span2(e(2), e(3), "1")}});
    const Observable y({{"0", span2(e(0), e(2), "0")}, {"1", span2(e(1), e(3), "1")}});
    const auto pp = StateVector::normalized({1.0, 1.0, 1.0, 1.0});
    const auto r = product_rule_check(pp, e(0), x, "0", y, "0");
    CHECK(r.abl_x == doctest::Approx(1.0));
    CHECK(r.abl_y == doctest::Approx(1.0));
    CHECK_FALSE(r.product_is_zero);
    CHECK_FALSE(r.violation);
    // Enumeration: with the joint observable {|00>,|01>,|10>,|11>}
    // interposed, outcome 00 is certain too, so the product value holds.
    const auto joint = Observable::from_basis(std::vector{e(0), e(1), e(2), e(3)},
                                              {"00", "01", "10", "11"});
    CHECK(abl(SelectionContext(pp, e(0), joint)).at("00") == doctest::Approx(1.0));
  }
  SUBCASE("non-commuting observables are rejected") {
    const Observable z =
        basis_observable({StateVector::basis(2, 0), StateVector::basis(2, 1)}, {"0", "1"});
    const Observable x = basis_observable({ket2(1, 1), ket2(1, -1)}, {"+", "-"});
    const auto a = ket2(1, 0.5);
    CHECK(code_of([&] { product_rule_check(a, a, z, "0", x, "+"); }) ==
          ErrorCode::NonCommutingObservables);
  }
}

TEST_CASE("property: time symmetry and phase invariance") {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = ts::random_dim(rng, 2, 6);
    const auto inst = ts::random_instance(rng, d);
    const SelectionContext ctx(ts::to_state(inst.pre), ts::to_state(inst.post),
                               ts::to_observable(inst.parts));
    const auto fwd = abl(ctx);
    const auto rev = abl(ctx.time_reversed());
    const SelectionContext phased(ctx.pre().with_phase(1.3), ctx.post().with_phase(-0.4),
                                  ctx.intervening());
    const auto ph = abl(phased);
    const auto k = kastner(ctx);
    const auto kp = kastner(phased);
    for (std::size_t j = 0; j < fwd.size(); ++j) {
      CHECK(std::abs(fwd.entries()[j].value - rev.entries()[j].value) < 1e-9);
      CHECK(std::abs(fwd.entries()[j].value - ph.entries()[j].value) < 1e-9);
      CHECK(std::abs(k.entries()[j].value - kp.entries()[j].value) < 1e-9 * (1 + k.entries()[j].value));
      const auto& label = fwd.entries()[j].label;
      CHECK(std::abs(sequential_prob(ctx, label) - sequential_prob(phased, label)) < 1e-9);
    }
  }
}

TEST_CASE("property: ABL assigns zero to outcomes with vanishing amplitude") {
  std::mt19937_64 rng(59);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = ts::random_dim(rng, 3, 6);
    const auto inst = ts::random_instance(rng, d);
    const Observable q = ts::to_observable(inst.parts);
    const auto a = ts::to_state(inst.pre);
    // Post-selection orthogonal to P_0|a>.
    const CVector u = (q[0].projector.matrix() * a.amplitudes()).normalized();
    CVector r = ts::to_state(inst.post).amplitudes();
    r -= u * u.dot(r);
    const SelectionContext ctx(a, StateVector::normalized(r), q);
    CHECK(abl(ctx).entries()[0].value < 1e-20);
  }
}
