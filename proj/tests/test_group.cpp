#include <gtest/gtest.h>

#include <set>

#include "dhi/group.hpp"
#include "oracles.hpp"

using namespace dhi;

TEST(ModPow, Examples) {
  EXPECT_EQ(mod_pow(5, 0, 13), 1u);
  EXPECT_EQ(mod_pow(2, 10, 1193), 1024u);
  EXPECT_EQ(mod_pow(3, 1192, 1193), 1u);
}

TEST(ModPow, MatchesRepeatedMultiplication) {
  for (std::uint64_t m : {2u, 7u, 97u, 1000u}) {
    for (std::uint64_t b = 0; b < m; b += 3) {
      std::uint64_t v = 1 % m;
      for (std::uint64_t e = 0; e < 40; ++e) {
        EXPECT_EQ(mod_pow(b, e, m), v) << b << "^" << e << " mod " << m;
        v = v * b % m;
      }
    }
  }
}

TEST(ModPow, LargeModulusUsesWideProducts) {
  const std::uint64_t p = 9223372036854775783ULL;  // largest prime below 2^63
  EXPECT_EQ(mod_pow(2, p - 1, p), 1u);
  EXPECT_EQ(mod_pow(p - 1, 2, p), 1u);
}

TEST(ModPow, RejectsTinyModulus) {
  EXPECT_THROW(mod_pow(1, 1, 1), Error);
  try {
    mod_pow(0, 3, 0);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidModulus);
  }
}

TEST(IsPrime, Examples) {
  EXPECT_TRUE(is_prime(1193));
  EXPECT_FALSE(is_prime(1));
  EXPECT_FALSE(is_prime(1194));
  EXPECT_FALSE(is_prime(0));
  EXPECT_TRUE(is_prime(2));
}

TEST(IsPrime, AgreesWithTrialDivisionBelow100k) {
  for (std::uint64_t n = 0; n < 100000; ++n) ASSERT_EQ(is_prime(n), oracle::is_prime(n)) << n;
}

TEST(IsPrime, StrongPseudoprimesAndLargeValues) {
  // Strong pseudoprimes to several small bases.
  EXPECT_FALSE(is_prime(3215031751ULL));
  EXPECT_FALSE(is_prime(3825123056546413051ULL));
  EXPECT_TRUE(is_prime(9223372036854775783ULL));
  EXPECT_FALSE(is_prime(9223372036854775807ULL));  // 2^63 - 1 = 7^2 * 73 * ...
  EXPECT_TRUE(is_prime(18446744073709551557ULL));  // largest 64-bit prime
  EXPECT_FALSE(is_prime(4294967297ULL));           // 641 * 6700417
}

TEST(IsSafePrime, Examples) {
  EXPECT_TRUE(is_safe_prime(11));
  EXPECT_FALSE(is_safe_prime(13));
  EXPECT_TRUE(is_safe_prime(7));
  // 9011 is prime but (9011 - 1) / 2 = 4505 = 5 * 901.
  EXPECT_TRUE(oracle::is_prime(9011));
  EXPECT_FALSE(oracle::is_prime(4505));
  EXPECT_FALSE(is_safe_prime(9011));
}

TEST(IsSafePrime, ImpliesBothPrime) {
  for (std::uint64_t p = 0; p < 20000; ++p) {
    ASSERT_EQ(is_safe_prime(p), oracle::is_safe_prime(p)) << p;
    if (is_safe_prime(p)) {
      ASSERT_TRUE(is_prime(p));
      ASSERT_TRUE(is_prime((p - 1) / 2));
    }
  }
}

TEST(FindGenerator, SmallestPrimitiveRoot) {
  EXPECT_EQ(find_generator(7), 3u);
  EXPECT_EQ(find_generator(11), 2u);
  EXPECT_EQ(find_generator(13), 2u);
  for (std::uint64_t p = 3; p < 2000; ++p) {
    if (!oracle::is_prime(p)) continue;
    std::uint64_t expected = 2;
    while (oracle::order_of(expected, p) != p - 1) ++expected;
    ASSERT_EQ(find_generator(p), expected) << p;
  }
}

TEST(FindGenerator, RejectsNonPrime) {
  EXPECT_THROW(find_generator(9), Error);
  EXPECT_THROW(find_generator(2), Error);
}

TEST(MakeFullGroup, Examples) {
  const auto g1193 = make_full_group(1193);
  EXPECT_EQ(g1193.order, 1192u);
  EXPECT_EQ(g1193.family, Family::FullGroup);
  EXPECT_EQ(make_full_group(3), (CyclicGroup{3, 2, 2, Family::FullGroup}));
  EXPECT_EQ(make_full_group(11), (CyclicGroup{11, 10, 2, Family::FullGroup}));
  EXPECT_THROW(make_full_group(15), Error);
  EXPECT_THROW(make_full_group(2), Error);
}

TEST(MakePrimeSubgroup, Examples) {
  EXPECT_EQ(make_prime_subgroup(11), (CyclicGroup{11, 5, 4, Family::PrimeSubgroup}));
  EXPECT_EQ(make_prime_subgroup(7), (CyclicGroup{7, 3, 4, Family::PrimeSubgroup}));
  try {
    make_prime_subgroup(13);
    FAIL() << "13 is not a safe prime";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(Groups, ConstructedGroupsSatisfyInvariants) {
  for (std::uint64_t p = 3; p < 3000; ++p) {
    if (!oracle::is_prime(p)) continue;
    const auto full = make_full_group(p);
    ASSERT_TRUE(is_valid_group(full)) << p;
    ASSERT_EQ(oracle::order_of(full.generator, p), p - 1);
    if (oracle::is_safe_prime(p)) {
      const auto sub = make_prime_subgroup(p);
      ASSERT_TRUE(is_valid_group(sub)) << p;
      ASSERT_EQ(oracle::order_of(sub.generator, p), (p - 1) / 2);
    }
  }
}

TEST(Groups, GeneratorIsABijection) {
  for (std::uint64_t p : {3u, 7u, 11u, 1193u, 2131u, 9011u, 10007u}) {
    std::vector<CyclicGroup> groups{make_full_group(p)};
    if (is_safe_prime(p)) groups.push_back(make_prime_subgroup(p));
    for (const auto& g : groups) {
      std::set<Element> seen;
      for (std::uint64_t e = 1; e <= g.order; ++e) seen.insert(element_of(g, e));
      EXPECT_EQ(seen.size(), g.order) << p;
    }
  }
}

TEST(Legendre, Examples) {
  EXPECT_EQ(legendre_symbol(2, 7), 1);
  EXPECT_EQ(legendre_symbol(0, 7), 0);
  EXPECT_EQ(legendre_symbol(3, 7), -1);
  EXPECT_EQ(legendre_symbol(-1, 7), -1);
  EXPECT_EQ(legendre_symbol(14, 7), 0);
  EXPECT_THROW(legendre_symbol(3, 8), Error);
  EXPECT_THROW(legendre_symbol(3, 2), Error);
  EXPECT_THROW(legendre_symbol(3, 9), Error);
}

TEST(Legendre, MatchesSquaresTable) {
  for (std::uint64_t p = 3; p < 200; ++p) {
    if (!oracle::is_prime(p)) continue;
    std::set<std::uint64_t> squares;
    for (std::uint64_t x = 1; x < p; ++x) squares.insert(x * x % p);
    for (std::uint64_t a = 1; a < p; ++a) {
      ASSERT_EQ(legendre_symbol(static_cast<std::int64_t>(a), p), squares.count(a) ? 1 : -1);
    }
  }
}

TEST(Legendre, Multiplicative) {
  for (std::uint64_t p = 3; p <= 61; ++p) {
    if (!oracle::is_prime(p)) continue;
    for (std::int64_t a = 1; a < static_cast<std::int64_t>(p); ++a)
      for (std::int64_t b = 1; b < static_cast<std::int64_t>(p); ++b)
        ASSERT_EQ(legendre_symbol(a * b % static_cast<std::int64_t>(p), p), legendre_symbol(a, p) * legendre_symbol(b, p));
  }
}

TEST(ElementOf, Examples) {
  EXPECT_EQ(element_of(make_full_group(7), 6), 1u);
  EXPECT_EQ(element_of(make_full_group(11), 3), 8u);
  EXPECT_EQ(element_of(make_prime_subgroup(11), 2), 5u);
  EXPECT_THROW(element_of(make_full_group(7), 0), Error);
  EXPECT_THROW(element_of(make_full_group(7), 7), Error);
}
