#pragma once

// Bridges between oracle kets and library types, plus random generators.

#include <random>
#include <string>
#include <vector>

#include "twotime/core.hpp"
#include "twotime/rules.hpp"
#include "oracle.hpp"

namespace testing_support {

inline twotime::StateVector to_state(const oracle::Ket& k) {
  twotime::CVector v(static_cast<Eigen::Index>(k.size()));
  for (std::size_t i = 0; i < k.size(); ++i) v(static_cast<Eigen::Index>(i)) = k[i];
  return twotime::StateVector::normalized(std::move(v));
}

inline oracle::Ket to_ket(const twotime::StateVector& s) {
  oracle::Ket k(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) k[i] = s[i];
  return k;
}

inline oracle::Mat to_mat(const twotime::CMatrix& m) {
  oracle::Mat out = oracle::zeros(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return out;
}

inline twotime::Observable to_observable(const std::vector<std::vector<oracle::Ket>>& parts) {
  std::vector<twotime::Outcome> outcomes;
  for (std::size_t j = 0; j < parts.size(); ++j) {
    std::vector<twotime::StateVector> span;
    for (const auto& k : parts[j]) span.push_back(to_state(k));
    const std::string label = "q" + std::to_string(j);
    outcomes.push_back({label, twotime::projector_from_span(span, label)});
  }
  return twotime::Observable(std::move(outcomes));
}

inline std::vector<oracle::Mat> projectors_of(const std::vector<std::vector<oracle::Ket>>& parts) {
  std::vector<oracle::Mat> out;
  for (const auto& p : parts) out.push_back(oracle::projector(p));
  return out;
}

// A random (pre, Q, post) triple in dimension d with 2..d outcomes.
struct RandomInstance {
  oracle::Ket pre;
  oracle::Ket post;
  std::vector<std::vector<oracle::Ket>> parts;
};

inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t d) {
  std::uniform_int_distribution<std::size_t> blocks(2, d);
  RandomInstance r;
  r.pre = oracle::random_ket(rng, d);
  r.post = oracle::random_ket(rng, d);
  r.parts = oracle::random_partition(rng, d, blocks(rng));
  return r;
}

inline std::size_t random_dim(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace testing_support
