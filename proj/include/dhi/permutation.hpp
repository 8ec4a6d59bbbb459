#pragma once

// Permutation test of the DHI assumption.
//
// Under H0 the key g^{ab} is uniform on G, so the z-multiplicities of a
// sample of size n behave like a draw without replacement of n items from a
// population holding N copies of each of the N group elements: a
// multivariate hypergeometric vector (M_1, ..., M_N). Replicates of
// sum_k (M_k / n) ln M_k form the null distribution that the observed raw
// sample entropy is compared against.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dhi/entropy.hpp"
#include "dhi/error.hpp"
#include "dhi/group.hpp"
#include "dhi/parallel.hpp"
#include "dhi/rng.hpp"
#include "dhi/sampling.hpp"

namespace dhi {

/// Largest order whose N^2-element null population fits in 64 bits.
inline constexpr std::uint64_t kMaxNullOrder = (std::uint64_t{1} << 32) - 1;

namespace detail {

inline double log_factorial(std::uint64_t x) {
  static const auto table = [] {
    std::array<double, 256> t{};
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  if (x < table.size()) return table[x];
  // Stirling series; the first omitted term is below 1e-19 for x >= 256.
  const double v = static_cast<double>(x);
  const double inv = 1.0 / v;
  const double inv2 = inv * inv;
  return (v + 0.5) * std::log(v) - v + 0.91893853320467274178 +
         inv * (1.0 / 12 - inv2 * (1.0 / 360 - inv2 * (1.0 / 1260 - inv2 / 1680)));
}

inline double log_choose(std::uint64_t n, std::uint64_t k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

}  // namespace detail

/// One draw from the hypergeometric law: successes among `draws` items taken
/// without replacement from `population` items of which `successes` are
/// marked.
///
/// Inverse-CDF search that starts at the mode and walks outward, alternating
/// below and above, using the exact pmf ratio recurrences. The visiting order
/// is fixed, so the draw is an exact inversion of a single uniform.
inline std::uint64_t sample_hypergeometric(Engine& engine, std::uint64_t population, std::uint64_t successes,
                                           std::uint64_t draws) {
  if (successes > population || draws > population) {
    throw Error(ErrorKind::InvalidInput, "hypergeometric parameters exceed population");
  }
  const std::uint64_t failures = population - successes;
  const std::uint64_t lo = draws > failures ? draws - failures : 0;
  const std::uint64_t hi = std::min(successes, draws);
  if (lo == hi) return lo;

  const auto mode_estimate = static_cast<std::uint64_t>(static_cast<unsigned __int128>(draws + 1) *
                                                        (successes + 1) / (population + 2));
  const std::uint64_t mode = std::clamp(mode_estimate, lo, hi);

  const double k = static_cast<double>(successes);
  const double r = static_cast<double>(draws);
  const double f = static_cast<double>(failures);
  // pmf(x + 1) / pmf(x)
  auto ratio_up = [&](double x) { return (k - x) * (r - x) / ((x + 1.0) * (f - r + x + 1.0)); };

  const double pmf_mode = std::exp(detail::log_choose(successes, mode) + detail::log_choose(failures, draws - mode) -
                                   detail::log_choose(population, draws));
  double u = uniform_unit(engine);
  if (u < pmf_mode) return mode;
  u -= pmf_mode;

  std::uint64_t below = mode;
  std::uint64_t above = mode;
  double pmf_below = pmf_mode;
  double pmf_above = pmf_mode;
  while (below > lo || above < hi) {
    if (below > lo) {
      pmf_below /= ratio_up(static_cast<double>(below - 1));
      --below;
      if (u < pmf_below) return below;
      u -= pmf_below;
    }
    if (above < hi) {
      pmf_above *= ratio_up(static_cast<double>(above));
      ++above;
      if (u < pmf_above) return above;
      u -= pmf_above;
    }
  }
  // Only reachable through rounding in the accumulated pmf.
  return mode;
}

inline void check_null_parameters(std::uint64_t order, std::uint64_t n) {
  if (order == 0) throw Error(ErrorKind::InvalidInput, "group order must be positive");
  if (order > kMaxNullOrder) {
    throw Error(ErrorKind::ResourceLimit, "order " + std::to_string(order) + " too large for the null population");
  }
  if (n == 0) throw Error(ErrorKind::InvalidInput, "sample size must be positive");
  if (n > order * order) {
    throw Error(ErrorKind::InvalidInput, "sample size " + std::to_string(n) + " exceeds population N^2 = " +
                                             std::to_string(order * order));
  }
}

/// (M_1, ..., M_N) by sequential conditional draws: category k receives a
/// hypergeometric draw of the remaining sample from the remaining population.
inline std::vector<std::uint64_t> sample_null_multiplicities(std::uint64_t order, std::uint64_t n, Engine& engine) {
  check_null_parameters(order, n);
  std::vector<std::uint64_t> counts(order, 0);
  std::uint64_t remaining_draws = n;
  for (std::uint64_t k = 0; k + 1 < order && remaining_draws > 0; ++k) {
    const std::uint64_t remaining_population = (order - k) * order;
    counts[k] = sample_hypergeometric(engine, remaining_population, order, remaining_draws);
    remaining_draws -= counts[k];
  }
  counts[order - 1] += remaining_draws;
  return counts;
}

inline std::vector<std::uint64_t> sample_null_multiplicities(std::uint64_t order, std::uint64_t n,
                                                             std::uint64_t seed) {
  Engine engine = make_engine(seed);
  return sample_null_multiplicities(order, n, engine);
}

/// sum_k (M_k / n) ln M_k; with `shifted`, minus ln n as well.
inline double null_statistic(std::span<const std::uint64_t> counts, std::uint64_t n, bool shifted = false) {
  std::uint64_t total = 0;
  for (std::uint64_t m : counts) total += m;
  if (total != n || n == 0) {
    throw Error(ErrorKind::InvalidInput, "multiplicities sum to " + std::to_string(total) + ", expected " +
                                             std::to_string(n));
  }
  const double raw = plugin_log_mass(counts);
  return shifted ? raw - std::log(static_cast<double>(n)) : raw;
}

struct NullDistribution {
  std::uint64_t order = 0;
  std::uint64_t n = 0;
  std::uint64_t replicates = 0;
  std::vector<double> values;  // raw values, in replicate order
  std::uint64_t seed = 0;

  friend bool operator==(const NullDistribution&, const NullDistribution&) = default;
};

/// Replicate r draws from substream derive_seed(seed, r).
inline NullDistribution build_null_distribution(std::uint64_t order, std::uint64_t n, std::uint64_t replicates,
                                                std::uint64_t seed, unsigned threads = 1) {
  if (replicates == 0) throw Error(ErrorKind::InvalidInput, "replicate count must be positive");
  check_null_parameters(order, n);
  NullDistribution null{order, n, replicates, std::vector<double>(replicates), seed};
  parallel_chunks(replicates, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      Engine engine = make_engine(derive_seed(seed, r));
      const auto counts = sample_null_multiplicities(order, n, engine);
      null.values[r] = null_statistic(counts, n);
    }
  });
  return null;
}

struct NullComparison {
  double proportion_lower = 0.0;    // #{replicate < observed} / R
  double p_value = 0.0;             // #{replicate >= observed} / R
  double distance_to_center = 0.0;  // |observed - mean(replicates)|
  double relative_distance = 0.0;   // distance_to_center / max_r |observed - replicate_r|
  bool outside_support = false;
};

inline NullComparison compare_to_null(double observed, std::span<const double> replicates) {
  if (replicates.empty()) throw Error(ErrorKind::InvalidInput, "empty null distribution");
  std::uint64_t lower = 0;
  CompensatedSum sum;
  double farthest = 0.0;
  double lowest = replicates.front();
  double highest = replicates.front();
  for (double v : replicates) {
    if (v < observed) ++lower;
    sum.add(v);
    farthest = std::max(farthest, std::abs(observed - v));
    lowest = std::min(lowest, v);
    highest = std::max(highest, v);
  }
  const double count = static_cast<double>(replicates.size());
  NullComparison out;
  out.proportion_lower = static_cast<double>(lower) / count;
  out.p_value = static_cast<double>(replicates.size() - lower) / count;
  out.distance_to_center = std::abs(observed - sum.value() / count);
  out.relative_distance = farthest > 0.0 ? std::min(1.0, out.distance_to_center / farthest) : 0.0;
  out.outside_support = observed > highest || observed < lowest;
  return out;
}

struct DhiTestReport {
  CyclicGroup group;
  std::uint64_t n = 0;
  std::uint64_t replicates = 0;
  double observed_raw_entropy = 0.0;
  double observed_statistic_T = 0.0;
  double proportion_lower = 0.0;
  double p_value = 0.0;
  double distance_to_center = 0.0;
  double relative_distance = 0.0;
  bool outside_support = false;
  std::uint64_t sample_seed = 0;
  std::uint64_t null_seed = 0;

  friend bool operator==(const DhiTestReport&, const DhiTestReport&) = default;
};

struct PermutationOptions {
  SamplingOptions sampling;
  unsigned threads = 1;
};

/// (i) sample n triples and take the raw sample entropy, (ii) build R null
/// replicates, (iii) locate the observed value in the null distribution.
/// A small p-value rejects DHI for the group.
inline DhiTestReport dhi_permutation_test(const CyclicGroup& group, std::uint64_t n, std::uint64_t replicates,
                                          std::uint64_t sample_seed, std::uint64_t null_seed,
                                          const PermutationOptions& options = {}) {
  check_null_parameters(group.order, n);
  SamplingOptions sampling = options.sampling;
  sampling.threads = options.threads;
  const SampleStatistic observed = sample_statistic(sample_triples(group, n, sample_seed, sampling));
  const NullDistribution null = build_null_distribution(group.order, n, replicates, null_seed, options.threads);
  const NullComparison cmp = compare_to_null(observed.raw_entropy_S, null.values);

  DhiTestReport report;
  report.group = group;
  report.n = n;
  report.replicates = replicates;
  report.observed_raw_entropy = observed.raw_entropy_S;
  report.observed_statistic_T = observed.statistic_T;
  report.proportion_lower = cmp.proportion_lower;
  report.p_value = cmp.p_value;
  report.distance_to_center = cmp.distance_to_center;
  report.relative_distance = cmp.relative_distance;
  report.outside_support = cmp.outside_support;
  report.sample_seed = sample_seed;
  report.null_seed = null_seed;
  return report;
}

}  // namespace dhi
