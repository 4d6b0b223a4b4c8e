#include "twotime/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include <Eigen/Eigenvalues>

namespace twotime {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateSpan: return "DegenerateSpan";
    case ErrorCode::ImpossibleOutcome: return "ImpossibleOutcome";
    case ErrorCode::UnknownOutcomeLabel: return "UnknownOutcomeLabel";
    case ErrorCode::ImpossiblePostSelection: return "ImpossiblePostSelection";
    case ErrorCode::OrthogonalPrePost: return "OrthogonalPrePost";
    case ErrorCode::DegeneratePostObservable: return "DegeneratePostObservable";
    case ErrorCode::NonCommutingObservables: return "NonCommutingObservables";
    case ErrorCode::NoAcceptedTrials: return "NoAcceptedTrials";
    case ErrorCode::InvalidDirection: return "InvalidDirection";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InternalError: return "InternalError";
  }
  return "InternalError";
}

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::ValidationError, what);
}

void require_same_dim(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    std::ostringstream os;
    os << where << ": dimension mismatch (" << a << " vs " << b << ")";
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

bool all_finite(const CMatrix& m) {
  return m.real().allFinite() && m.imag().allFinite();
}

double max_abs_entry(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

void require_square_finite(const CMatrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    invalid(std::string(what) + ": matrix must be square with dim >= 1");
  }
  if (!all_finite(m)) invalid(std::string(what) + ": entries must be finite");
}

void require_hermitian(const CMatrix& m, const char* what) {
  if (max_abs_entry(m - m.adjoint()) > kNormTol) {
    invalid(std::string(what) + ": not Hermitian within NORM_TOL");
  }
}

}  // namespace

// --- StateVector -----------------------------------------------------------

StateVector::StateVector(CVector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() == 0) invalid("StateVector: dim must be >= 1");
  if (!amps_.real().allFinite() || !amps_.imag().allFinite()) {
    invalid("StateVector: amplitudes must be finite");
  }
  const double norm = amps_.norm();
  if (std::abs(norm - 1.0) > kNormTol) {
    std::ostringstream os;
    os.precision(17);
    os << "StateVector: norm must equal 1 within NORM_TOL (got " << norm << ")";
    invalid(os.str());
  }
}

StateVector StateVector::normalized(CVector v) {
  if (v.size() == 0) invalid("StateVector: dim must be >= 1");
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    invalid("StateVector: cannot normalize a zero or non-finite vector");
  }
  return StateVector(v / norm);
}

StateVector StateVector::normalized(std::initializer_list<Complex> amplitudes) {
  CVector v(static_cast<Eigen::Index>(amplitudes.size()));
  Eigen::Index i = 0;
  for (const Complex& a : amplitudes) v(i++) = a;
  return normalized(std::move(v));
}

StateVector StateVector::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) invalid("StateVector::basis: index out of range");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return StateVector(std::move(v));
}

StateVector StateVector::with_phase(double angle) const {
  return StateVector(amps_ * std::polar(1.0, angle));
}

// --- DensityOperator -------------------------------------------------------

DensityOperator::DensityOperator(CMatrix matrix) : m_(std::move(matrix)) {
  require_square_finite(m_, "DensityOperator");
  if (dim() > kMaxDensityDim) {
    invalid("DensityOperator: dim exceeds the supported envelope of 64");
  }
  require_hermitian(m_, "DensityOperator");
  if (std::abs(m_.trace() - Complex(1.0)) > kNormTol) {
    invalid("DensityOperator: trace must equal 1 within NORM_TOL");
  }
  const CMatrix herm = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::InternalError, "DensityOperator: eigen-decomposition failed");
  }
  if (solver.eigenvalues().minCoeff() < -kNormTol) {
    invalid("DensityOperator: not positive semidefinite (eigenvalue below -NORM_TOL)");
  }
}

DensityOperator DensityOperator::pure(const StateVector& psi) {
  const CVector& v = psi.amplitudes();
  return DensityOperator(v * v.adjoint());
}

// --- Projector -------------------------------------------------------------

Projector::Projector(CMatrix matrix, std::string label)
    : m_(std::move(matrix)), label_(std::move(label)) {
  require_square_finite(m_, "Projector");
  require_hermitian(m_, "Projector");
  if (max_abs_entry(m_ * m_ - m_) > kNormTol) {
    invalid("Projector: not idempotent (P*P != P within NORM_TOL)");
  }
}

Projector Projector::identity(std::size_t dim, std::string label) {
  const auto n = static_cast<Eigen::Index>(dim);
  return Projector(CMatrix::Identity(n, n), std::move(label));
}

Projector Projector::rank_one(const StateVector& v, std::string label) {
  return Projector(v.amplitudes() * v.amplitudes().adjoint(), std::move(label));
}

std::size_t Projector::rank() const {
  return static_cast<std::size_t>(std::llround(m_.trace().real()));
}

// --- Observable ------------------------------------------------------------

Observable::Observable(std::vector<Outcome> outcomes) : outcomes_(std::move(outcomes)) {
  if (outcomes_.empty()) invalid("Observable: at least one outcome is required");
  dim_ = outcomes_.front().projector.dim();

  std::set<std::string> seen;
  for (const Outcome& o : outcomes_) {
    if (o.label.empty()) invalid("Observable: outcome labels must be nonempty");
    if (!seen.insert(o.label).second) {
      invalid("Observable: outcome labels must be unique (duplicate '" + o.label + "')");
    }
    if (o.projector.dim() != dim_) {
      invalid("Observable: all projectors must share one dimension");
    }
  }

  const auto n = static_cast<Eigen::Index>(dim_);
  CMatrix sum = CMatrix::Zero(n, n);
  for (std::size_t j = 0; j < outcomes_.size(); ++j) {
    const CMatrix& pj = outcomes_[j].projector.matrix();
    sum += pj;
    for (std::size_t k = j + 1; k < outcomes_.size(); ++k) {
      if (max_abs_entry(pj * outcomes_[k].projector.matrix()) > kNormTol) {
        invalid("Observable: projectors '" + outcomes_[j].label + "' and '" +
                outcomes_[k].label + "' are not mutually orthogonal");
      }
    }
  }
  if (max_abs_entry(sum - CMatrix::Identity(n, n)) > kNormTol) {
    invalid("Observable: projectors do not sum to the identity (completeness)");
  }
}

Observable Observable::trivial(std::size_t dim, std::string label) {
  std::vector<Outcome> outcomes;
  outcomes.push_back({label, Projector::identity(dim, label)});
  return Observable(std::move(outcomes));
}

Observable Observable::from_basis(std::span<const StateVector> basis,
                                  const std::vector<std::string>& labels) {
  if (basis.size() != labels.size()) {
    invalid("Observable::from_basis: one label per basis vector is required");
  }
  std::vector<Outcome> outcomes;
  outcomes.reserve(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    outcomes.push_back({labels[i], Projector::rank_one(basis[i], labels[i])});
  }
  return Observable(std::move(outcomes));
}

std::vector<std::string> Observable::labels() const {
  std::vector<std::string> out;
  out.reserve(outcomes_.size());
  for (const Outcome& o : outcomes_) out.push_back(o.label);
  return out;
}

std::size_t Observable::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < outcomes_.size(); ++i) {
    if (outcomes_[i].label == label) return i;
  }
  throw Error(ErrorCode::UnknownOutcomeLabel, "unknown outcome label '" + label + "'");
}

const Projector& Observable::projector(const std::string& label) const {
  return outcomes_[index_of(label)].projector;
}

// --- operations ------------------------------------------------------------

Complex inner(const StateVector& x, const StateVector& y) {
  require_same_dim(x.dim(), y.dim(), "inner");
  return x.amplitudes().dot(y.amplitudes());
}

Projector projector_from_span(std::span<const StateVector> vectors, std::string label) {
  if (vectors.empty()) {
    throw Error(ErrorCode::DegenerateSpan, "projector_from_span: empty span");
  }
  const std::size_t dim = vectors.front().dim();
  std::vector<CVector> basis;
  basis.reserve(vectors.size());
  for (const StateVector& v : vectors) {
    require_same_dim(dim, v.dim(), "projector_from_span");
    // Modified Gram-Schmidt, with one re-orthogonalization pass.
    CVector r = v.amplitudes();
    for (int pass = 0; pass < 2; ++pass) {
      for (const CVector& e : basis) r -= e * e.dot(r);
    }
    const double residual = r.norm();
    if (residual <= kRankTol) {
      throw Error(ErrorCode::DegenerateSpan,
                  "projector_from_span: vectors are linearly dependent within RANK_TOL");
    }
    basis.push_back(r / residual);
  }
  const auto n = static_cast<Eigen::Index>(dim);
  CMatrix p = CMatrix::Zero(n, n);
  for (const CVector& e : basis) p.noalias() += e * e.adjoint();
  p = 0.5 * (p + p.adjoint()).eval();
  return Projector(std::move(p), std::move(label));
}

double clamp_probability(double p) {
  if (!std::isfinite(p) || p < -kNormTol || p > 1.0 + kNormTol) {
    std::ostringstream os;
    os.precision(17);
    os << "probability " << p << " lies outside [0,1] beyond NORM_TOL";
    throw Error(ErrorCode::InternalError, os.str());
  }
  return std::clamp(p, 0.0, 1.0);
}

double born_prob(const DensityOperator& w, const Projector& p) {
  require_same_dim(w.dim(), p.dim(), "born_prob");
  // Tr[W P] = sum_ij W_ij P_ji
  const double tr = (w.matrix().cwiseProduct(p.matrix().transpose())).sum().real();
  return clamp_probability(tr);
}

double born_prob_pure(const StateVector& psi, const StateVector& q) {
  return clamp_probability(std::norm(inner(psi, q)));
}

DensityOperator luders_update(const DensityOperator& w, const Projector& p) {
  const double prob = born_prob(w, p);
  if (prob <= kZeroProbTol) {
    throw Error(ErrorCode::ImpossibleOutcome,
                "luders_update: conditioning on outcome '" + p.label() +
                    "' which has zero probability");
  }
  CMatrix updated = p.matrix() * w.matrix() * p.matrix() / prob;
  updated = 0.5 * (updated + updated.adjoint()).eval();
  return DensityOperator(std::move(updated));
}

}  // namespace twotime
