#pragma once

// Shannon entropies in nats, the exact multiplicity table over all N^2
// exponent pairs, and the exact DHI statistic
//
//   T_N = sum_k (m_k / N^2) ln m_k - ln N,
//
// where m_k counts pairs (a, b) in [1, N]^2 with g^{ab} = g^k. T_N is zero
// exactly when g^{ab} is uniform on the group.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dhi/error.hpp"
#include "dhi/group.hpp"
#include "dhi/parallel.hpp"

namespace dhi {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// ---------------------------------------------------------------------------
// Generic entropies of a joint pmf p(x, y, z)

class JointPmf3 {
 public:
  JointPmf3(std::size_t nx, std::size_t ny, std::size_t nz, std::vector<double> probabilities)
      : nx_(nx), ny_(ny), nz_(nz), p_(std::move(probabilities)) {
    if (nx == 0 || ny == 0 || nz == 0) throw Error(ErrorKind::InvalidDistribution, "empty support");
    if (p_.size() != nx * ny * nz) {
      throw Error(ErrorKind::InvalidDistribution, "probability array has wrong size");
    }
    CompensatedSum total;
    for (double v : p_) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorKind::InvalidDistribution, "negative or non-finite probability");
      }
      total.add(v);
    }
    if (std::abs(total.value() - 1.0) > 1e-12) {
      throw Error(ErrorKind::InvalidDistribution, "probabilities do not sum to 1");
    }
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t nz() const { return nz_; }

  double operator()(std::size_t i, std::size_t j, std::size_t k) const { return p_[(i * ny_ + j) * nz_ + k]; }

  double xy_marginal(std::size_t i, std::size_t j) const {
    CompensatedSum s;
    for (std::size_t k = 0; k < nz_; ++k) s.add((*this)(i, j, k));
    return s.value();
  }

  double z_marginal(std::size_t k) const {
    CompensatedSum s;
    for (std::size_t i = 0; i < nx_; ++i)
      for (std::size_t j = 0; j < ny_; ++j) s.add((*this)(i, j, k));
    return s.value();
  }

 private:
  std::size_t nx_, ny_, nz_;
  std::vector<double> p_;
};

/// H(X, Y) = -sum p(x, y, z) ln p(x, y), skipping zero cells.
inline double joint_entropy(const JointPmf3& pmf) {
  CompensatedSum h;
  for (std::size_t i = 0; i < pmf.nx(); ++i) {
    for (std::size_t j = 0; j < pmf.ny(); ++j) {
      const double pxy = pmf.xy_marginal(i, j);
      if (pxy > 0.0) h.add(-pxy * std::log(pxy));
    }
  }
  return std::max(0.0, h.value());
}

/// H(X, Y | Z) = -sum p(x, y, z) ln p(x, y | z). Every z-marginal must be positive.
inline double conditional_entropy(const JointPmf3& pmf) {
  std::vector<double> pz(pmf.nz());
  for (std::size_t k = 0; k < pmf.nz(); ++k) {
    pz[k] = pmf.z_marginal(k);
    if (!(pz[k] > 0.0)) {
      throw Error(ErrorKind::InvalidDistribution, "zero z-marginal at index " + std::to_string(k));
    }
  }
  CompensatedSum h;
  for (std::size_t i = 0; i < pmf.nx(); ++i)
    for (std::size_t j = 0; j < pmf.ny(); ++j)
      for (std::size_t k = 0; k < pmf.nz(); ++k) {
        const double p = pmf(i, j, k);
        if (p > 0.0) h.add(-p * std::log(p / pz[k]));
      }
  return std::max(0.0, h.value());
}

// ---------------------------------------------------------------------------
// Multiplicity tables

/// Counts m_k per category k in [0, order). Categories are exponent residues:
/// category k stands for the group element g^k. Stored sparsely, sorted by
/// category; absent categories have count 0.
class MultiplicityTable {
 public:
  struct Entry {
    std::uint64_t category = 0;
    std::uint64_t count = 0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  MultiplicityTable() = default;

  /// `entries` must be sorted by strictly increasing category.
  MultiplicityTable(std::uint64_t order, std::vector<Entry> entries) : order_(order), entries_(std::move(entries)) {
    std::uint64_t previous = 0;
    bool first = true;
    for (const auto& e : entries_) {
      if (e.category >= order_) throw Error(ErrorKind::InvalidInput, "category outside [0, order)");
      if (!first && e.category <= previous) throw Error(ErrorKind::InvalidInput, "categories not increasing");
      previous = e.category;
      first = false;
      total_ += e.count;
    }
  }

  /// Dense constructor: counts[k] is the multiplicity of category k.
  static MultiplicityTable from_dense(std::span<const std::uint64_t> counts) {
    std::vector<Entry> entries;
    entries.reserve(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (counts[k] != 0) entries.push_back({k, counts[k]});
    }
    return MultiplicityTable(counts.size(), std::move(entries));
  }

  std::uint64_t order() const { return order_; }
  std::uint64_t total() const { return total_; }
  const std::vector<Entry>& entries() const { return entries_; }

  std::uint64_t count(std::uint64_t category) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), category,
                               [](const Entry& e, std::uint64_t c) { return e.category < c; });
    return (it != entries_.end() && it->category == category) ? it->count : 0;
  }

  friend bool operator==(const MultiplicityTable&, const MultiplicityTable&) = default;

 private:
  std::uint64_t order_ = 0;
  std::uint64_t total_ = 0;
  std::vector<Entry> entries_;
};

/// sum_k (m_k / n) ln m_k with n = sum_k m_k, zero counts skipped.
///
/// Evaluated over the histogram of multiplicity values in ascending order,
/// so the result is a function of the multiset of counts only: two count
/// vectors that are permutations of each other give bit-identical values.
template <typename Counts>
double plugin_log_mass(const Counts& counts) {
  std::map<std::uint64_t, std::uint64_t> histogram;
  std::uint64_t n = 0;
  for (std::uint64_t m : counts) {
    if (m == 0) continue;
    ++histogram[m];
    n += m;
  }
  if (n == 0) return 0.0;
  CompensatedSum s;
  const double dn = static_cast<double>(n);
  for (const auto& [m, categories] : histogram) {
    if (m == 1) continue;
    const double dm = static_cast<double>(m);
    s.add(static_cast<double>(categories) * (dm / dn) * std::log(dm));
  }
  return s.value();
}

inline double plugin_log_mass(const MultiplicityTable& table) {
  std::vector<std::uint64_t> counts;
  counts.reserve(table.entries().size());
  for (const auto& e : table.entries()) counts.push_back(e.count);
  return plugin_log_mass(counts);
}

// ---------------------------------------------------------------------------
// Exact engine

struct ExactOptions {
  std::uint64_t order_bound = std::uint64_t{1} << 20;
  unsigned threads = 1;
};

/// m_c = #{(a, b) in [1, N]^2 : a*b = c (mod N)} for every c in [0, N).
///
/// Row a of the multiplication table mod N hits each multiple of
/// d = gcd(a, N) exactly d times, so m_c = sum over a with gcd(a, N) | c of
/// gcd(a, N). Workers tally gcd(a, N) over disjoint a-ranges into private
/// arrays, merged in worker order; the spread to multiples is integer-exact,
/// so the table is identical for any thread count.
inline MultiplicityTable exact_multiplicities(const CyclicGroup& group, const ExactOptions& options = {}) {
  const std::uint64_t n = group.order;
  if (n == 0) throw Error(ErrorKind::InvalidInput, "group order must be positive");
  if (n > options.order_bound) {
    throw Error(ErrorKind::ResourceLimit, "order " + std::to_string(n) + " exceeds exact bound " +
                                              std::to_string(options.order_bound));
  }

  const unsigned workers = std::max(1u, options.threads);
  std::vector<std::vector<std::uint64_t>> partial(std::min<std::uint64_t>(workers, n));
  parallel_chunks(n, workers, [&](std::size_t w, std::size_t begin, std::size_t end) {
    auto& tally = partial[w];
    tally.assign(n + 1, 0);
    for (std::size_t i = begin; i < end; ++i) {
      ++tally[std::gcd(static_cast<std::uint64_t>(i + 1), n)];
    }
  });

  std::vector<std::uint64_t> rows_with_gcd(n + 1, 0);
  for (const auto& tally : partial) {
    for (std::size_t d = 0; d < tally.size(); ++d) rows_with_gcd[d] += tally[d];
  }

  std::vector<std::uint64_t> counts(n, 0);
  for (std::uint64_t d = 1; d <= n; ++d) {
    if (rows_with_gcd[d] == 0) continue;
    const std::uint64_t weight = d * rows_with_gcd[d];
    for (std::uint64_t c = 0; c < n; c += d) counts[c] += weight;
  }
  return MultiplicityTable::from_dense(counts);
}

/// H(g^a, g^b | g^{ab}) = sum_k (m_k / N^2) ln m_k over the full table.
inline double exact_conditional_entropy(const CyclicGroup& group, const ExactOptions& options = {}) {
  return plugin_log_mass(exact_multiplicities(group, options));
}

struct ExactTestResult {
  CyclicGroup group;
  double conditional_entropy = 0.0;  // nats
  double statistic_T = 0.0;          // conditional_entropy - ln N
  double independence_gap = 0.0;     // 2 ln N - conditional_entropy
};

inline ExactTestResult exact_dhi_statistic(const CyclicGroup& group, const ExactOptions& options = {}) {
  const double h = exact_conditional_entropy(group, options);
  const double log_n = std::log(static_cast<double>(group.order));
  return ExactTestResult{group, h, h - log_n, std::max(0.0, 2.0 * log_n - h)};
}

struct IndependenceResult {
  double gap = 0.0;
  bool independent = false;
};

/// H0: H(g^a, g^b | g^{ab}) = 2 ln N, i.e. (g^a, g^b) independent of g^{ab}.
inline IndependenceResult independence_test(const CyclicGroup& group, const ExactOptions& options = {}) {
  const double gap = exact_dhi_statistic(group, options).independence_gap;
  return {gap, gap <= 1e-12};
}

/// Closed form of T_N for a group of prime order q: m_0 = 2q - 1 and every
/// other category has m_c = q - 1. Rearranged as
///   ((2q - 1) / q^2) (ln(2q - 1) - ln(q - 1)) + ln(1 - 1/q)
/// to avoid cancelling two terms of size ln q.
inline double analytic_subgroup_statistic(std::uint64_t q) {
  if (!is_prime(q)) throw Error(ErrorKind::InvalidInput, std::to_string(q) + " is not prime");
  const double dq = static_cast<double>(q);
  const double zero_share = (2.0 * dq - 1.0) / (dq * dq);
  const double log_ratio = q == 2 ? std::log(3.0) : std::log(2.0 * dq - 1.0) - std::log(dq - 1.0);
  return zero_share * log_ratio + std::log1p(-1.0 / dq);
}

}  // namespace dhi
