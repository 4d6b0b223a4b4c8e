#pragma once

// Monte Carlo simulation of pre- and post-selected ensembles.
//
// Each trial starts in the pre-selected state, performs the interposed
// ideal measurements in order (Born sampling followed by Lueders collapse),
// and ends with a genuine binary measurement {|b><b|, 1 - |b><b|}. Only
// trials that pass the final measurement are counted as accepted.
//
// Trial i draws its randomness from TrialStream(seed, i), so results are
// bit-identical for any thread count.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "twotime/core.hpp"
#include "twotime/philox.hpp"
#include "twotime/rules.hpp"

namespace twotime {

struct TrialOutcome {
  std::vector<std::string> intermediate_labels;  // one per interposed observable
  bool post_selected = false;
};

struct EnsembleOptions {
  unsigned threads = 1;  // 0 = hardware concurrency
};

struct EnsembleStats {
  std::uint64_t trials = 0;
  std::uint64_t accepted = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> labels;
  std::vector<std::uint64_t> counts;  // accepted trials per label
  std::vector<double> frequencies;
  std::vector<double> std_errors;  // sqrt(f (1 - f) / accepted)

  double acceptance_rate() const;
  double acceptance_std_error() const;
  double frequency(const std::string& label) const;
  double std_error(const std::string& label) const;
};

// Accepted-trial counts keyed by the sequence of outcome indices, one index
// per interposed observable.
struct PathCounts {
  std::uint64_t trials = 0;
  std::uint64_t accepted = 0;
  std::uint64_t seed = 0;
  std::map<std::vector<std::size_t>, std::uint64_t> accepted_by_path;
};

struct InterpositionRates {
  double rate_without = 0.0;
  double rate_with = 0.0;
  double std_error_without = 0.0;
  double std_error_with = 0.0;

  double combined_std_error() const;
};

// Index of the sampled branch: the first positive-probability branch whose
// cumulative sum reaches u. Zero-probability branches are never returned.
std::size_t sample_branch(std::span<const double> probabilities, double u);

TrialOutcome run_trial(const StateVector& pre, std::span<const Observable> observables,
                       const StateVector& post, TrialStream& rng);

PathCounts simulate_paths(const StateVector& pre, std::span<const Observable> observables,
                          const StateVector& post, std::uint64_t trials, std::uint64_t seed,
                          EnsembleOptions options = {});

// Frequencies of the intervening outcomes among post-selected trials.
// Throws NoAcceptedTrials when no trial passes post-selection.
EnsembleStats estimate_abl(const SelectionContext& ctx, std::uint64_t trials,
                           std::uint64_t seed, EnsembleOptions options = {});

// Post-selection acceptance rate with and without q interposed. The two
// runs use independent streams derived from `seed`.
InterpositionRates estimate_interposition_effect(const StateVector& pre, const Observable& q,
                                                 const StateVector& post, std::uint64_t trials,
                                                 std::uint64_t seed,
                                                 EnsembleOptions options = {});

// Thread count from ABL_ENGINE_THREADS; 0, unset or unparsable means auto.
unsigned threads_from_env();

}  // namespace twotime
