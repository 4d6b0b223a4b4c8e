#pragma once

// Finite-dimensional Hilbert-space primitives: normalized states, density
// operators, projectors and projector-valued observables, together with the
// trace rule and the ideal (Lueders) measurement update.
//
// All value types validate their invariants on construction and are
// immutable afterwards.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twotime/error.hpp"

namespace twotime {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Tolerance for invariant validation (norms, hermiticity, idempotency).
inline constexpr double kNormTol = 1e-10;
// Gram-Schmidt residual below which a span is considered degenerate.
inline constexpr double kRankTol = 1e-10;
// Conditioning denominators at or below this are treated as zero.
inline constexpr double kZeroProbTol = 1e-12;
// Tolerance for the vanishing-interference consistency condition.
inline constexpr double kCondTol = 1e-9;
// Largest dimension for which density operators are accepted (the PSD check
// runs a dense eigen-decomposition).
inline constexpr std::size_t kMaxDensityDim = 64;

class StateVector {
 public:
  // Throws ValidationError unless the vector is nonempty, finite and has
  // unit norm within kNormTol.
  explicit StateVector(CVector amplitudes);

  // Rescales `v` to unit norm. Throws ValidationError for a zero vector.
  static StateVector normalized(CVector v);
  static StateVector normalized(std::initializer_list<Complex> amplitudes);
  static StateVector basis(std::size_t dim, std::size_t index);

  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const CVector& amplitudes() const { return amps_; }
  Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

  // Same ray, multiplied by exp(i * angle).
  StateVector with_phase(double angle) const;

 private:
  CVector amps_;
};

class DensityOperator {
 public:
  // Hermitian, unit trace, positive semidefinite; dim <= kMaxDensityDim.
  explicit DensityOperator(CMatrix matrix);

  static DensityOperator pure(const StateVector& psi);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }

 private:
  CMatrix m_;
};

class Projector {
 public:
  // Hermitian and idempotent within kNormTol.
  Projector(CMatrix matrix, std::string label);

  static Projector identity(std::size_t dim, std::string label = "1");
  static Projector rank_one(const StateVector& v, std::string label);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  const std::string& label() const { return label_; }
  // Trace, rounded to the nearest integer.
  std::size_t rank() const;

 private:
  CMatrix m_;
  std::string label_;
};

struct Outcome {
  std::string label;
  Projector projector;
};

// A labeled, orthogonal resolution of the identity. Outcome order is
// significant: it fixes sampling order and report order.
class Observable {
 public:
  explicit Observable(std::vector<Outcome> outcomes);

  // The single-outcome observable {1}.
  static Observable trivial(std::size_t dim, std::string label = "1");
  // Rank-one outcomes from an orthonormal basis.
  static Observable from_basis(std::span<const StateVector> basis,
                               const std::vector<std::string>& labels);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return outcomes_.size(); }
  const std::vector<Outcome>& outcomes() const { return outcomes_; }
  const Outcome& operator[](std::size_t i) const { return outcomes_[i]; }
  std::vector<std::string> labels() const;

  // Throws UnknownOutcomeLabel.
  std::size_t index_of(const std::string& label) const;
  const Projector& projector(const std::string& label) const;

 private:
  std::size_t dim_ = 0;
  std::vector<Outcome> outcomes_;
};

// <x|y>, conjugate-linear in x.
Complex inner(const StateVector& x, const StateVector& y);

// Orthogonal projector onto span(vectors). Throws DegenerateSpan when the
// inputs are linearly dependent within kRankTol.
Projector projector_from_span(std::span<const StateVector> vectors, std::string label);

// Tr[W P], clamped to [0, 1].
double born_prob(const DensityOperator& w, const Projector& p);
// |<psi|q>|^2.
double born_prob_pure(const StateVector& psi, const StateVector& q);

// P W P / Tr[W P]. Throws ImpossibleOutcome when Tr[W P] <= kZeroProbTol.
DensityOperator luders_update(const DensityOperator& w, const Projector& p);

// Clamps round-off into [0, 1]; values further than kNormTol outside the
// interval raise InternalError.
double clamp_probability(double p);

}  // namespace twotime
