#include "twotime/ensemble.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string_view>
#include <thread>

namespace twotime {

namespace {

// Per-thread trial runner. Works on state vectors: for a pure state the
// Lueders update P|psi><psi|P / <psi|P|psi> is the ray of P|psi>.
class TrialRunner {
 public:
  TrialRunner(const StateVector& pre, std::span<const Observable> observables,
              const StateVector& post)
      : pre_(pre.amplitudes()), post_(post.amplitudes()) {
    for (const Observable& obs : observables) {
      if (obs.dim() != pre.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "simulation: observable dimension mismatch");
      }
      std::vector<CMatrix> ps;
      ps.reserve(obs.size());
      for (const Outcome& o : obs.outcomes()) ps.push_back(o.projector.matrix());
      projectors_.push_back(std::move(ps));
    }
    if (post.dim() != pre.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "simulation: post-selection dimension mismatch");
    }
    std::size_t widest = 1;
    for (const auto& ps : projectors_) widest = std::max(widest, ps.size());
    branches_.assign(widest, CVector(pre_.size()));
    probs_.resize(widest);
    path_.resize(projectors_.size());
    state_ = pre_;
  }

  // Runs one trial; the sampled path is left in path().
  bool run(TrialStream& rng) {
    state_ = pre_;
    for (std::size_t m = 0; m < projectors_.size(); ++m) {
      const auto& ps = projectors_[m];
      for (std::size_t k = 0; k < ps.size(); ++k) {
        branches_[k].noalias() = ps[k] * state_;
        probs_[k] = branches_[k].squaredNorm();
      }
      const std::size_t k = sample_branch(std::span(probs_.data(), ps.size()), rng.next_uniform());
      path_[m] = k;
      state_ = branches_[k] / std::sqrt(probs_[k]);
    }
    const double pass = std::clamp(std::norm(post_.dot(state_)), 0.0, 1.0);
    const double final_probs[2] = {pass, 1.0 - pass};
    return sample_branch(final_probs, rng.next_uniform()) == 0;
  }

  const std::vector<std::size_t>& path() const { return path_; }

 private:
  CVector pre_;
  CVector post_;
  std::vector<std::vector<CMatrix>> projectors_;
  std::vector<CVector> branches_;
  std::vector<double> probs_;
  std::vector<std::size_t> path_;
  CVector state_;
};

unsigned resolve_threads(unsigned requested, std::uint64_t trials) {
  unsigned n = requested;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t cap = std::max<std::uint64_t>(1, trials / 4096);
  return static_cast<unsigned>(std::min<std::uint64_t>(n, cap));
}

// splitmix64 finalizer; derives decorrelated seeds from one user seed.
std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double binomial_se(double f, std::uint64_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(f * (1.0 - f) / static_cast<double>(n));
}

}  // namespace

std::size_t sample_branch(std::span<const double> probabilities, double u) {
  double cumulative = 0.0;
  std::size_t last_positive = probabilities.size();
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    if (!(probabilities[k] > 0.0)) continue;
    cumulative += probabilities[k];
    last_positive = k;
    if (u <= cumulative) return k;
  }
  if (last_positive == probabilities.size()) {
    throw Error(ErrorCode::InternalError, "sample_branch: no branch has positive probability");
  }
  // u beyond a total that round-off left slightly below 1.
  return last_positive;
}

TrialOutcome run_trial(const StateVector& pre, std::span<const Observable> observables,
                       const StateVector& post, TrialStream& rng) {
  TrialRunner runner(pre, observables, post);
  TrialOutcome out;
  out.post_selected = runner.run(rng);
  out.intermediate_labels.reserve(observables.size());
  for (std::size_t m = 0; m < observables.size(); ++m) {
    out.intermediate_labels.push_back(observables[m][runner.path()[m]].label);
  }
  return out;
}

PathCounts simulate_paths(const StateVector& pre, std::span<const Observable> observables,
                          const StateVector& post, std::uint64_t trials, std::uint64_t seed,
                          EnsembleOptions options) {
  if (trials == 0) throw Error(ErrorCode::ValidationError, "trials must be >= 1");

  // Mixed-radix flat index over outcome paths.
  std::vector<std::size_t> radix;
  std::size_t n_paths = 1;
  for (const Observable& o : observables) {
    radix.push_back(o.size());
    n_paths *= o.size();
  }

  const unsigned n_threads = resolve_threads(options.threads, trials);
  std::vector<std::vector<std::uint64_t>> partial(n_threads,
                                                  std::vector<std::uint64_t>(n_paths, 0));
  // Validate inputs on the calling thread so errors propagate normally.
  TrialRunner probe(pre, observables, post);

  auto work = [&](unsigned t) {
    TrialRunner runner = probe;
    const std::uint64_t begin = trials * t / n_threads;
    const std::uint64_t end = trials * (t + 1) / n_threads;
    auto& counts = partial[t];
    for (std::uint64_t i = begin; i < end; ++i) {
      TrialStream rng(seed, i);
      if (!runner.run(rng)) continue;
      std::size_t flat = 0;
      for (std::size_t m = 0; m < radix.size(); ++m) flat = flat * radix[m] + runner.path()[m];
      ++counts[flat];
    }
  };

  if (n_threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }

  PathCounts result;
  result.trials = trials;
  result.seed = seed;
  for (std::size_t flat = 0; flat < n_paths; ++flat) {
    std::uint64_t c = 0;
    for (const auto& p : partial) c += p[flat];
    if (c == 0) continue;
    std::vector<std::size_t> path(radix.size());
    std::size_t rem = flat;
    for (std::size_t m = radix.size(); m-- > 0;) {
      path[m] = rem % radix[m];
      rem /= radix[m];
    }
    result.accepted += c;
    result.accepted_by_path.emplace(std::move(path), c);
  }
  return result;
}

EnsembleStats estimate_abl(const SelectionContext& ctx, std::uint64_t trials,
                           std::uint64_t seed, EnsembleOptions options) {
  const Observable& q = ctx.intervening();
  const PathCounts paths =
      simulate_paths(ctx.pre(), std::span(&q, 1), ctx.post(), trials, seed, options);
  if (paths.accepted == 0) {
    throw Error(ErrorCode::NoAcceptedTrials,
                "no trial passed post-selection; increase the trial count");
  }

  EnsembleStats stats;
  stats.trials = trials;
  stats.accepted = paths.accepted;
  stats.seed = seed;
  stats.labels = q.labels();
  stats.counts.assign(q.size(), 0);
  for (const auto& [path, count] : paths.accepted_by_path) stats.counts[path.front()] = count;
  for (std::uint64_t c : stats.counts) {
    const double f = static_cast<double>(c) / static_cast<double>(stats.accepted);
    stats.frequencies.push_back(f);
    stats.std_errors.push_back(binomial_se(f, stats.accepted));
  }
  return stats;
}

InterpositionRates estimate_interposition_effect(const StateVector& pre, const Observable& q,
                                                 const StateVector& post, std::uint64_t trials,
                                                 std::uint64_t seed, EnsembleOptions options) {
  const PathCounts without = simulate_paths(pre, {}, post, trials, mix_seed(seed), options);
  const PathCounts with =
      simulate_paths(pre, std::span(&q, 1), post, trials, mix_seed(seed + 1), options);
  InterpositionRates r;
  const auto n = static_cast<double>(trials);
  r.rate_without = static_cast<double>(without.accepted) / n;
  r.rate_with = static_cast<double>(with.accepted) / n;
  r.std_error_without = binomial_se(r.rate_without, trials);
  r.std_error_with = binomial_se(r.rate_with, trials);
  return r;
}

double InterpositionRates::combined_std_error() const {
  return std::hypot(std_error_without, std_error_with);
}

double EnsembleStats::acceptance_rate() const {
  return trials == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(trials);
}

double EnsembleStats::acceptance_std_error() const {
  return binomial_se(acceptance_rate(), trials);
}

double EnsembleStats::frequency(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return frequencies[i];
  }
  throw Error(ErrorCode::UnknownOutcomeLabel, "unknown outcome label '" + label + "'");
}

double EnsembleStats::std_error(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return std_errors[i];
  }
  throw Error(ErrorCode::UnknownOutcomeLabel, "unknown outcome label '" + label + "'");
}

unsigned threads_from_env() {
  const char* raw = std::getenv("ABL_ENGINE_THREADS");
  if (raw == nullptr) return 0;
  const std::string_view s(raw);
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return 0;
  return value;
}

}  // namespace twotime
