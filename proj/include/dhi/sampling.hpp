#pragma once

// Seeded samples of Diffie-Hellman triples (g^a, g^b, g^{ab}) with (a, b)
// drawn uniformly with replacement from [1, N]^2, and the plug-in entropy
// statistics computed from them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dhi/entropy.hpp"
#include "dhi/error.hpp"
#include "dhi/group.hpp"
#include "dhi/parallel.hpp"
#include "dhi/rng.hpp"

namespace dhi {

struct ExponentPair {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
};

struct SampledTriple {
  Element x = 0;  // g^a
  Element y = 0;  // g^b
  Element z = 0;  // g^{ab}
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t residue = 0;  // a*b mod N, so z = g^residue
  std::uint64_t count = 0;    // repeats of this triple in the sample

  friend bool operator==(const SampledTriple&, const SampledTriple&) = default;
};

/// Distinct triples with repeat counts, sorted by (x, y, z).
struct TripleSample {
  CyclicGroup group;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::vector<SampledTriple> triples;

  friend bool operator==(const TripleSample&, const TripleSample&) = default;
};

struct SampleStatistic {
  std::uint64_t n = 0;
  double raw_entropy_S = 0.0;        // sum_k (m_k / n) ln m_k over z-multiplicities
  double conditional_entropy = 0.0;  // plug-in H(g^a, g^b | g^{ab}) with repeat counts
  double statistic_T = 0.0;          // conditional_entropy - ln n

  friend bool operator==(const SampleStatistic&, const SampleStatistic&) = default;
};

struct SamplingOptions {
  // Number of independent substreams the n draws are split across. Part of
  // the sample's identity: a different shard count gives a different sample.
  unsigned shards = 1;
  unsigned threads = 1;
  // Below this order, powers of g are tabulated instead of recomputed.
  std::uint64_t power_table_bound = std::uint64_t{1} << 22;
};

namespace detail {

class PowerOracle {
 public:
  PowerOracle(const CyclicGroup& group, std::uint64_t table_bound) : group_(group) {
    if (group.order <= table_bound) {
      table_.resize(group.order);
      Element v = 1;
      for (auto& t : table_) {
        t = v;
        v = mul_mod(v, group.generator, group.modulus);
      }
    }
  }

  /// g^e for e in [0, N].
  Element operator()(std::uint64_t e) const {
    if (!table_.empty()) return table_[e == group_.order ? 0 : e];
    return mod_pow(group_.generator, e, group_.modulus);
  }

 private:
  CyclicGroup group_;
  std::vector<Element> table_;
};

inline std::uint64_t product_residue(std::uint64_t a, std::uint64_t b, std::uint64_t order) {
  return mul_mod(a % order, b % order, order);
}

inline std::vector<SampledTriple> collapse(std::vector<SampledTriple> draws) {
  std::sort(draws.begin(), draws.end(), [](const SampledTriple& l, const SampledTriple& r) {
    return std::tie(l.x, l.y, l.z) < std::tie(r.x, r.y, r.z);
  });
  std::vector<SampledTriple> out;
  for (const auto& t : draws) {
    if (!out.empty() && out.back().x == t.x && out.back().y == t.y && out.back().z == t.z) {
      out.back().count += t.count;
    } else {
      out.push_back(t);
    }
  }
  return out;
}

}  // namespace detail

/// Builds a sample from explicit exponent pairs, each in [1, N].
inline TripleSample make_sample(const CyclicGroup& group, std::span<const ExponentPair> pairs, std::uint64_t seed = 0,
                                const SamplingOptions& options = {}) {
  if (pairs.empty()) throw Error(ErrorKind::InvalidInput, "sample must contain at least one pair");
  const detail::PowerOracle pow(group, options.power_table_bound);
  std::vector<SampledTriple> draws;
  draws.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    if (a < 1 || a > group.order || b < 1 || b > group.order) {
      throw Error(ErrorKind::InvalidInput, "exponent pair outside [1, N]^2");
    }
    const std::uint64_t c = detail::product_residue(a, b, group.order);
    draws.push_back({pow(a), pow(b), pow(c), a, b, c, 1});
  }
  return TripleSample{group, pairs.size(), seed, detail::collapse(std::move(draws))};
}

/// n pairs drawn independently and uniformly from [1, N]^2. Shard s draws
/// its slice of the n pairs from substream derive_seed(seed, s).
inline TripleSample sample_triples(const CyclicGroup& group, std::uint64_t n, std::uint64_t seed,
                                   const SamplingOptions& options = {}) {
  if (n == 0) throw Error(ErrorKind::InvalidInput, "sample size must be positive");
  if (group.order == 0) throw Error(ErrorKind::InvalidInput, "group order must be positive");
  const unsigned shards = std::max(1u, options.shards);
  const detail::PowerOracle pow(group, options.power_table_bound);

  std::vector<SampledTriple> draws(n);
  parallel_chunks(shards, options.threads, [&](std::size_t, std::size_t first_shard, std::size_t last_shard) {
    for (std::size_t s = first_shard; s < last_shard; ++s) {
      Engine engine = make_engine(derive_seed(seed, s));
      const std::uint64_t begin = n * s / shards;
      const std::uint64_t end = n * (s + 1) / shards;
      for (std::uint64_t i = begin; i < end; ++i) {
        const std::uint64_t a = 1 + uniform_below(engine, group.order);
        const std::uint64_t b = 1 + uniform_below(engine, group.order);
        const std::uint64_t c = detail::product_residue(a, b, group.order);
        draws[i] = {pow(a), pow(b), pow(c), a, b, c, 1};
      }
    }
  });
  return TripleSample{group, n, seed, detail::collapse(std::move(draws))};
}

/// Multiplicity of each key value g^k among the n sampled z-components,
/// indexed by exponent residue k.
inline MultiplicityTable z_multiplicities(const TripleSample& sample) {
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  for (const auto& t : sample.triples) counts[t.residue] += t.count;
  std::vector<MultiplicityTable::Entry> entries;
  entries.reserve(counts.size());
  for (const auto& [k, m] : counts) entries.push_back({k, m});
  std::sort(entries.begin(), entries.end(), [](const auto& l, const auto& r) { return l.category < r.category; });
  return MultiplicityTable(sample.group.order, std::move(entries));
}

/// Plug-in estimates p(x, y, z) = k_xyz / n and p(x, y | z) = k_xyz / m_z give
///
///   H = sum_xyz (k_xyz / n) ln(m_z / k_xyz) = S - sum_xyz (k_xyz / n) ln k_xyz,
///
/// with S = sum_z (m_z / n) ln m_z the raw sample entropy. T = H - ln n.
inline SampleStatistic sample_statistic(const TripleSample& sample) {
  const double raw = plugin_log_mass(z_multiplicities(sample));
  std::vector<std::uint64_t> repeats;
  repeats.reserve(sample.triples.size());
  for (const auto& t : sample.triples) repeats.push_back(t.count);
  const double h = raw - plugin_log_mass(repeats);
  return SampleStatistic{sample.n, raw, h, h - std::log(static_cast<double>(sample.n))};
}

}  // namespace dhi
