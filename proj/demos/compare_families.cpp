// Exact statistic for every safe prime in a range, full group next to its
// prime-order subgroup.
//
//   compare_families [lo] [hi]

#include <cstdio>
#include <cstdlib>

#include "dhi/dhi.hpp"

int main(int argc, char** argv) {
  const std::uint64_t lo = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2000;
  const std::uint64_t hi = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 2400;

  std::printf("%8s %12s %12s\n", "p", "full", "subgroup");
  for (const auto& c : dhi::classify_primes(lo, hi)) {
    if (c.kind != dhi::PrimeKind::SafePrime) continue;
    const double full = dhi::exact_dhi_statistic(dhi::make_full_group(c.prime)).statistic_T;
    const double sub = dhi::exact_dhi_statistic(dhi::make_prime_subgroup(c.prime)).statistic_T;
    std::printf("%8llu %12.6g %12.6g\n", static_cast<unsigned long long>(c.prime), full, sub);
  }
}
