#pragma once

// Survey driver: prime classification, cross-group comparison runs over a
// prime range, and the sample-size schedule study for a single group.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dhi/entropy.hpp"
#include "dhi/error.hpp"
#include "dhi/group.hpp"
#include "dhi/permutation.hpp"
#include "dhi/rng.hpp"

namespace dhi {

/// All primes in [lo, hi], ascending, tagged safe or not.
inline std::vector<PrimeClass> classify_primes(std::uint64_t lo, std::uint64_t hi) {
  if (lo < 2 || hi > kMaxModulus) {
    throw Error(ErrorKind::InvalidConfig, "prime range must lie within [2, 2^63]");
  }
  std::vector<PrimeClass> out;
  for (std::uint64_t p = lo; p <= hi; ++p) {
    if (is_prime(p)) out.push_back({p, is_safe_prime(p) ? PrimeKind::SafePrime : PrimeKind::OtherPrime});
    if (p == hi) break;
  }
  return out;
}

enum class SurveyMode { Exact, Sampled };

inline const char* to_string(SurveyMode mode) { return mode == SurveyMode::Exact ? "Exact" : "Sampled"; }

struct SurveyConfig {
  SurveyMode mode = SurveyMode::Exact;
  std::uint64_t n = 0;  // shared sample size, Sampled mode only
  std::uint64_t replicates = 1000;
  std::uint64_t base_seed = 0;
  bool full_groups = true;
  bool prime_subgroups = false;  // emitted for safe primes only
  unsigned threads = 1;
  std::uint64_t exact_bound = std::uint64_t{1} << 20;
  unsigned shards = 1;
};

struct SurveyRecord {
  std::uint64_t prime = 0;
  PrimeKind kind = PrimeKind::OtherPrime;
  Family family = Family::FullGroup;
  std::uint64_t order = 0;
  SurveyMode mode = SurveyMode::Exact;
  std::uint64_t n = 0;
  std::optional<std::uint64_t> replicates;
  double statistic = 0.0;  // T_N in Exact mode, raw sample entropy in Sampled mode
  std::optional<double> p_value;
  std::optional<double> proportion_lower;
  std::optional<double> distance_to_center;
  std::optional<double> relative_distance;
  std::optional<std::uint64_t> sample_seed;
  std::optional<std::uint64_t> null_seed;

  friend bool operator==(const SurveyRecord&, const SurveyRecord&) = default;
};

/// Row order used everywhere records are written: prime, family, n.
inline bool survey_record_less(const SurveyRecord& l, const SurveyRecord& r) {
  if (l.prime != r.prime) return l.prime < r.prime;
  if (l.family != r.family) return l.family < r.family;
  return l.n < r.n;
}

/// Seeds for one (prime, family) work item: {sample seed, null seed}.
inline std::pair<std::uint64_t, std::uint64_t> survey_seeds(std::uint64_t base_seed, std::uint64_t prime,
                                                            Family family) {
  const auto f = static_cast<std::uint64_t>(family);
  return {derive_seed(base_seed, {prime, f, 0}), derive_seed(base_seed, {prime, f, 1})};
}

inline SurveyRecord survey_one(const PrimeClass& prime, Family family, const SurveyConfig& config,
                               unsigned inner_threads) {
  const CyclicGroup group =
      family == Family::FullGroup ? make_full_group(prime.prime) : make_prime_subgroup(prime.prime);
  SurveyRecord rec;
  rec.prime = prime.prime;
  rec.kind = prime.kind;
  rec.family = family;
  rec.order = group.order;
  rec.mode = config.mode;
  if (config.mode == SurveyMode::Exact) {
    rec.statistic = exact_dhi_statistic(group, {config.exact_bound, inner_threads}).statistic_T;
    return rec;
  }
  const auto [sample_seed, null_seed] = survey_seeds(config.base_seed, prime.prime, family);
  PermutationOptions options;
  options.sampling.shards = config.shards;
  options.threads = inner_threads;
  const DhiTestReport report = dhi_permutation_test(group, config.n, config.replicates, sample_seed, null_seed, options);
  rec.n = config.n;
  rec.replicates = config.replicates;
  rec.statistic = report.observed_raw_entropy;
  rec.p_value = report.p_value;
  rec.proportion_lower = report.proportion_lower;
  rec.distance_to_center = report.distance_to_center;
  rec.relative_distance = report.relative_distance;
  rec.sample_seed = sample_seed;
  rec.null_seed = null_seed;
  return rec;
}

/// Runs one record per requested (prime, family) pair in [lo, hi].
///
/// Items are handed to `config.threads` workers. `on_record`, when given,
/// sees records in final sorted order as soon as every earlier record is
/// done, so a streaming writer produces the same bytes as a batch one.
inline std::vector<SurveyRecord> run_survey(std::uint64_t lo, std::uint64_t hi, const SurveyConfig& config,
                                            const std::function<void(const SurveyRecord&)>& on_record = {}) {
  if (!config.full_groups && !config.prime_subgroups) {
    throw Error(ErrorKind::InvalidConfig, "no group family selected");
  }
  const auto primes = classify_primes(lo, hi);

  struct Item {
    PrimeClass prime;
    Family family;
  };
  std::vector<Item> items;
  for (const auto& pc : primes) {
    if (pc.prime < 3) continue;
    if (config.full_groups) items.push_back({pc, Family::FullGroup});
    if (config.prime_subgroups && pc.kind == PrimeKind::SafePrime) items.push_back({pc, Family::PrimeSubgroup});
  }

  if (config.mode == SurveyMode::Sampled) {
    if (config.n == 0 || config.replicates == 0) {
      throw Error(ErrorKind::InvalidConfig, "sampled mode needs n >= 1 and replicates >= 1");
    }
    for (const auto& item : items) {
      const std::uint64_t order = item.family == Family::FullGroup ? item.prime.prime - 1 : (item.prime.prime - 1) / 2;
      if (order > kMaxNullOrder || static_cast<unsigned __int128>(config.n) > static_cast<unsigned __int128>(order) * order) {
        throw Error(ErrorKind::InvalidConfig, "n = " + std::to_string(config.n) + " exceeds N^2 for p = " +
                                                  std::to_string(item.prime.prime));
      }
    }
  } else {
    for (const auto& item : items) {
      const std::uint64_t order = item.family == Family::FullGroup ? item.prime.prime - 1 : (item.prime.prime - 1) / 2;
      if (order > config.exact_bound) {
        throw Error(ErrorKind::InvalidConfig, "order of p = " + std::to_string(item.prime.prime) +
                                                  " exceeds the exact bound " + std::to_string(config.exact_bound));
      }
    }
  }

  std::vector<std::optional<SurveyRecord>> results(items.size());
  std::mutex mutex;
  std::size_t flushed = 0;
  auto flush_ready = [&] {
    while (flushed < results.size() && results[flushed]) {
      if (on_record) on_record(*results[flushed]);
      ++flushed;
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, std::max<std::size_t>(items.size(), 1)));
  // One item at a time per worker; a lone worker gets every thread for the exact engine.
  const unsigned inner_threads = workers == 1 ? std::max(1u, config.threads) : 1;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      try {
        SurveyRecord rec = survey_one(items[i].prime, items[i].family, config, inner_threads);
        std::lock_guard lock(mutex);
        results[i] = std::move(rec);
        if (!failure) flush_ready();
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        next = items.size();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SurveyRecord> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

// ---------------------------------------------------------------------------
// Sample-size schedule for Z_1193^*

inline const std::vector<std::uint64_t>& default_table1_schedule() {
  static const std::vector<std::uint64_t> schedule{
      59,     118,    354,    885,    1829,   3304,   5428,   8319,   12095,  16874,   22774,
      29913,  38409,  48380,  59944,  73219,  88323,  105374, 124490, 145789, 169389,  195408,
      223964, 255175, 289159, 326034, 365918, 408929, 455185, 504804, 557904, 614603,  675019,
      739270, 807474, 879749, 956213, 1036984, 1122180, 1211919, 1306319};
  return schedule;
}

struct Table1Record {
  std::uint64_t n = 0;
  double sample_entropy = 0.0;
  double proportion_lower = 0.0;
  double distance_to_center = 0.0;
  double relative_distance = 0.0;

  friend bool operator==(const Table1Record&, const Table1Record&) = default;
};

inline Table1Record to_table1_record(const DhiTestReport& report) {
  return {report.n, report.observed_raw_entropy, report.proportion_lower, report.distance_to_center,
          report.relative_distance};
}

struct Table1Options {
  Family family = Family::FullGroup;
  unsigned threads = 1;
  unsigned shards = 1;
};

/// One permutation test per schedule entry. Entry n uses sample seed
/// derive_seed(sample_seed, n) and null seed derive_seed(null_seed, n).
inline std::vector<DhiTestReport> table1_reports(std::uint64_t p, std::span<const std::uint64_t> schedule,
                                                 std::uint64_t replicates, std::uint64_t sample_seed,
                                                 std::uint64_t null_seed, const Table1Options& options = {}) {
  if (schedule.empty()) throw Error(ErrorKind::InvalidConfig, "empty sample-size schedule");
  if (replicates == 0) throw Error(ErrorKind::InvalidConfig, "replicates must be positive");
  const CyclicGroup group = options.family == Family::FullGroup ? make_full_group(p) : make_prime_subgroup(p);
  const auto population = static_cast<unsigned __int128>(group.order) * group.order;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] == 0 || schedule[i] > population || group.order > kMaxNullOrder) {
      throw Error(ErrorKind::InvalidConfig, "schedule entry " + std::to_string(schedule[i]) + " outside [1, N^2]");
    }
    if (i > 0 && schedule[i] <= schedule[i - 1]) {
      throw Error(ErrorKind::InvalidConfig, "schedule must be strictly increasing");
    }
  }
  PermutationOptions perm;
  perm.sampling.shards = options.shards;
  perm.threads = options.threads;
  std::vector<DhiTestReport> reports;
  reports.reserve(schedule.size());
  for (std::uint64_t n : schedule) {
    reports.push_back(
        dhi_permutation_test(group, n, replicates, derive_seed(sample_seed, n), derive_seed(null_seed, n), perm));
  }
  return reports;
}

inline std::vector<Table1Record> reproduce_table1(std::uint64_t p, std::span<const std::uint64_t> schedule,
                                                  std::uint64_t replicates, std::uint64_t sample_seed,
                                                  std::uint64_t null_seed, const Table1Options& options = {}) {
  std::vector<Table1Record> out;
  for (const auto& report : table1_reports(p, schedule, replicates, sample_seed, null_seed, options)) {
    out.push_back(to_table1_record(report));
  }
  return out;
}

}  // namespace dhi
