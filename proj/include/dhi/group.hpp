#pragma once

// Finite cyclic groups used as Diffie-Hellman exchange groups: the full
// multiplicative group Z_p^* and the prime-order subgroup of quadratic
// residues when p is a safe prime. All arithmetic is on 63-bit words with
// 128-bit intermediates.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dhi/error.hpp"

namespace dhi {

using Element = std::uint64_t;

enum class Family { FullGroup, PrimeSubgroup };

inline const char* to_string(Family family) {
  return family == Family::FullGroup ? "FullGroup" : "PrimeSubgroup";
}

struct CyclicGroup {
  std::uint64_t modulus = 0;
  std::uint64_t order = 0;
  Element generator = 0;
  Family family = Family::FullGroup;

  friend bool operator==(const CyclicGroup&, const CyclicGroup&) = default;
};

enum class PrimeKind { SafePrime, OtherPrime };

inline const char* to_string(PrimeKind kind) {
  return kind == PrimeKind::SafePrime ? "SafePrime" : "OtherPrime";
}

struct PrimeClass {
  std::uint64_t prime = 0;
  PrimeKind kind = PrimeKind::OtherPrime;

  friend bool operator==(const PrimeClass&, const PrimeClass&) = default;
};

inline constexpr std::uint64_t kMaxModulus = std::uint64_t{1} << 63;

inline constexpr std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

namespace detail {

inline constexpr std::uint64_t pow_mod_unchecked(std::uint64_t base, std::uint64_t exponent,
                                                 std::uint64_t modulus) {
  std::uint64_t result = 1 % modulus;
  base %= modulus;
  while (exponent > 0) {
    if (exponent & 1) result = mul_mod(result, base, modulus);
    base = mul_mod(base, base, modulus);
    exponent >>= 1;
  }
  return result;
}

inline constexpr bool miller_rabin_round(std::uint64_t n, std::uint64_t d, int s, std::uint64_t a) {
  a %= n;
  if (a == 0) return true;
  std::uint64_t x = pow_mod_unchecked(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (int r = 1; r < s; ++r) {
    x = mul_mod(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

}  // namespace detail

/// base^exponent mod modulus by square-and-multiply. Exponent 0 gives 1.
inline std::uint64_t mod_pow(std::uint64_t base, std::uint64_t exponent, std::uint64_t modulus) {
  if (modulus < 2) throw Error(ErrorKind::InvalidModulus, "modulus must be at least 2");
  return detail::pow_mod_unchecked(base, exponent, modulus);
}

/// Deterministic primality for every 64-bit input.
///
/// Trial division by the primes below 40, then Miller-Rabin with the first
/// twelve prime bases {2, ..., 37}. That witness set has no strong
/// pseudoprime below 3.3e24, which covers the whole uint64 range.
inline constexpr bool is_prime(std::uint64_t n) {
  constexpr std::array<std::uint64_t, 12> bases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  if (n < 2) return false;
  for (std::uint64_t b : bases) {
    if (n == b) return true;
    if (n % b == 0) return false;
  }
  if (n < 41 * 41) return true;
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : bases) {
    if (!detail::miller_rabin_round(n, d, s, a)) return false;
  }
  return true;
}

/// p = 2q + 1 with both p and q prime.
inline constexpr bool is_safe_prime(std::uint64_t p) {
  return p >= 5 && is_prime(p) && is_prime((p - 1) / 2);
}

/// Distinct prime factors of n in increasing order, by trial division.
inline std::vector<std::uint64_t> distinct_prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> factors;
  if (n < 2) return factors;
  auto strip = [&](std::uint64_t f) {
    if (n % f == 0) {
      factors.push_back(f);
      while (n % f == 0) n /= f;
    }
  };
  strip(2);
  strip(3);
  for (std::uint64_t f = 5; f <= n / f; f += 6) {
    strip(f);
    strip(f + 2);
  }
  if (n > 1) factors.push_back(n);
  return factors;
}

/// True when h generates Z_p^*, given the distinct prime factors of p - 1.
inline bool is_primitive_root(std::uint64_t h, std::uint64_t p,
                              const std::vector<std::uint64_t>& factors_of_p_minus_1) {
  if (h % p == 0) return false;
  for (std::uint64_t r : factors_of_p_minus_1) {
    if (mod_pow(h % p, (p - 1) / r, p) == 1) return false;
  }
  return true;
}

/// Smallest primitive root of the prime p.
inline Element find_generator(std::uint64_t p) {
  if (p < 3 || !is_prime(p)) {
    throw Error(ErrorKind::InvalidInput, "find_generator needs an odd prime, got " + std::to_string(p));
  }
  const auto factors = distinct_prime_factors(p - 1);
  for (std::uint64_t h = 2; h < p; ++h) {
    if (is_primitive_root(h, p, factors)) return h;
  }
  // Unreachable for prime p: every prime has a primitive root.
  throw Error(ErrorKind::InvalidInput, "no primitive root found for " + std::to_string(p));
}

inline CyclicGroup make_full_group(std::uint64_t p) {
  if (p < 3 || p > kMaxModulus || !is_prime(p)) {
    throw Error(ErrorKind::InvalidInput, "full group needs an odd prime modulus, got " + std::to_string(p));
  }
  return CyclicGroup{p, p - 1, find_generator(p), Family::FullGroup};
}

/// Order-q subgroup of quadratic residues of Z_p^* for a safe prime p = 2q + 1.
/// The generator is h^2 for the smallest h >= 2 whose square is not 1.
inline CyclicGroup make_prime_subgroup(std::uint64_t p) {
  if (p > kMaxModulus || !is_safe_prime(p)) {
    throw Error(ErrorKind::InvalidInput, std::to_string(p) + " is not a safe prime");
  }
  const std::uint64_t q = (p - 1) / 2;
  Element g = 1;
  for (std::uint64_t h = 2; h < p; ++h) {
    g = mul_mod(h, h, p);
    if (g != 1) break;
  }
  // q is prime, so any element other than 1 with g^q = 1 has order exactly q.
  if (g == 1 || mod_pow(g, q, p) != 1) {
    throw Error(ErrorKind::InvalidInput, "failed to find an order-q generator mod " + std::to_string(p));
  }
  return CyclicGroup{p, q, g, Family::PrimeSubgroup};
}

/// Euler's criterion: 0 if p | a, +1 for a nonzero quadratic residue, -1 otherwise.
inline int legendre_symbol(std::int64_t a, std::uint64_t p) {
  if (p < 3 || (p & 1) == 0 || !is_prime(p)) {
    throw Error(ErrorKind::InvalidInput, "legendre symbol needs an odd prime, got " + std::to_string(p));
  }
  const auto sp = static_cast<std::int64_t>(p);
  auto residue = static_cast<std::uint64_t>(((a % sp) + sp) % sp);
  if (residue == 0) return 0;
  const std::uint64_t e = mod_pow(residue, (p - 1) / 2, p);
  return e == 1 ? 1 : -1;
}

/// generator^exponent for exponent in [1, N]; exponent N is the identity.
inline Element element_of(const CyclicGroup& group, std::uint64_t exponent) {
  if (exponent < 1 || exponent > group.order) {
    throw Error(ErrorKind::InvalidInput, "exponent " + std::to_string(exponent) + " outside [1, " +
                                             std::to_string(group.order) + "]");
  }
  return mod_pow(group.generator, exponent, group.modulus);
}

/// Checks every structural invariant of a CyclicGroup.
inline bool is_valid_group(const CyclicGroup& group) {
  const auto p = group.modulus;
  if (!is_prime(p) || p < 3) return false;
  if (group.generator < 2 || group.generator >= p) return false;
  if (mod_pow(group.generator, group.order, p) != 1) return false;
  for (std::uint64_t r : distinct_prime_factors(group.order)) {
    if (mod_pow(group.generator, group.order / r, p) == 1) return false;
  }
  if (group.family == Family::FullGroup) return group.order == p - 1;
  return is_prime(group.order) && (p - 1) % group.order == 0;
}

}  // namespace dhi
