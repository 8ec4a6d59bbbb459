#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dhi/entropy.hpp"
#include "oracles.hpp"

using namespace dhi;

namespace {

JointPmf3 uniform_xy_constant_z() { return JointPmf3(2, 2, 1, {0.25, 0.25, 0.25, 0.25}); }

// (X, Y) uniform on 2x2 and Z = 2X + Y, so Z identifies the pair.
JointPmf3 z_identifies_pair() {
  std::vector<double> p(2 * 2 * 4, 0.0);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) p[(i * 2 + j) * 4 + (2 * i + j)] = 0.25;
  return JointPmf3(2, 2, 4, p);
}

// p(x, y, z) = p(x, y) p(z).
JointPmf3 product_pmf(const std::vector<double>& pxy, std::size_t nx, std::size_t ny, const std::vector<double>& pz) {
  std::vector<double> p;
  for (double a : pxy)
    for (double c : pz) p.push_back(a * c);
  return JointPmf3(nx, ny, pz.size(), p);
}

}  // namespace

TEST(JointEntropy, Examples) {
  EXPECT_NEAR(joint_entropy(uniform_xy_constant_z()), std::log(4.0), 1e-15);
  EXPECT_EQ(joint_entropy(JointPmf3(1, 1, 1, {1.0})), 0.0);
  EXPECT_EQ(joint_entropy(JointPmf3(2, 2, 1, {1.0, 0.0, 0.0, 0.0})), 0.0);
  // p(x, y) in {1/2, 1/4, 1/4}: (1/2) ln 2 + (1/2) ln 4.
  const JointPmf3 pmf(2, 2, 1, {0.5, 0.25, 0.25, 0.0});
  EXPECT_NEAR(joint_entropy(pmf), 1.0397207708399179, 1e-15);
}

TEST(JointPmf3, RejectsInvalid) {
  EXPECT_THROW(JointPmf3(1, 1, 1, {0.5}), Error);
  EXPECT_THROW(JointPmf3(1, 1, 2, {1.5, -0.5}), Error);
  EXPECT_THROW(JointPmf3(1, 1, 2, {1.0}), Error);
  try {
    JointPmf3(1, 1, 1, {std::nan("")});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidDistribution);
  }
}

TEST(ConditionalEntropy, Examples) {
  EXPECT_NEAR(conditional_entropy(uniform_xy_constant_z()), std::log(4.0), 1e-15);
  EXPECT_NEAR(conditional_entropy(z_identifies_pair()), 0.0, 1e-15);
  const auto indep = product_pmf({0.1, 0.2, 0.3, 0.4}, 2, 2, {0.5, 0.3, 0.2});
  EXPECT_NEAR(conditional_entropy(indep), joint_entropy(indep), 1e-12);
}

TEST(ConditionalEntropy, ZeroZMarginalIsAnError) {
  const JointPmf3 pmf(1, 2, 2, {0.5, 0.0, 0.5, 0.0});
  try {
    conditional_entropy(pmf);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidDistribution);
  }
}

TEST(ConditionalEntropy, BoundedByJointEntropy) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t nx = 1 + rng() % 4, ny = 1 + rng() % 4, nz = 1 + rng() % 4;
    std::vector<double> p(nx * ny * nz);
    double s = 0;
    for (auto& v : p) s += (v = u(rng) < 0.2 ? 0.0 : u(rng));
    if (s == 0) continue;
    for (auto& v : p) v /= s;
    const JointPmf3 pmf(nx, ny, nz, p);
    bool positive_z = true;
    for (std::size_t k = 0; k < nz; ++k) positive_z = positive_z && pmf.z_marginal(k) > 0;
    if (!positive_z) continue;
    const double h = conditional_entropy(pmf);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, joint_entropy(pmf) + 1e-12);
  }
}

TEST(ExactMultiplicities, Examples) {
  const auto one = exact_multiplicities(CyclicGroup{2, 1, 1, Family::PrimeSubgroup});
  EXPECT_EQ(one.total(), 1u);
  EXPECT_EQ(one.count(0), 1u);

  const auto five = exact_multiplicities(make_prime_subgroup(11));
  EXPECT_EQ(five.total(), 25u);
  EXPECT_EQ(five.count(0), 9u);
  for (std::uint64_t c = 1; c < 5; ++c) EXPECT_EQ(five.count(c), 4u);

  const auto four = exact_multiplicities(make_full_group(5));
  EXPECT_EQ(four.count(0), 8u);
  EXPECT_EQ(four.count(1), 2u);
  EXPECT_EQ(four.count(2), 4u);
  EXPECT_EQ(four.count(3), 2u);
}

TEST(ExactMultiplicities, MatchesNaiveDoubleLoop) {
  for (std::uint64_t n = 1; n <= 400; ++n) {
    const auto table = exact_multiplicities(CyclicGroup{0, n, 0, Family::FullGroup});
    const auto naive = oracle::product_counts(n);
    ASSERT_EQ(table.total(), n * n);
    for (std::uint64_t c = 0; c < n; ++c) ASSERT_EQ(table.count(c), naive[c]) << "N=" << n << " c=" << c;
  }
}

TEST(ExactMultiplicities, ThreadCountDoesNotChangeTable) {
  const auto g = make_full_group(10007);
  const auto one = exact_multiplicities(g, {1u << 20, 1});
  for (unsigned t : {2u, 3u, 8u}) EXPECT_EQ(exact_multiplicities(g, {1u << 20, t}), one);
}

TEST(ExactMultiplicities, OrderBound) {
  try {
    exact_multiplicities(make_full_group(1193), {1000, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ResourceLimit);
  }
}

TEST(ExactConditionalEntropy, Examples) {
  EXPECT_EQ(exact_conditional_entropy(CyclicGroup{2, 1, 1, Family::PrimeSubgroup}), 0.0);
  EXPECT_NEAR(exact_conditional_entropy(make_prime_subgroup(11)), 1.678229238957769, 1e-13);
  // Hypothetical uniform table m_k = N gives ln N.
  std::vector<std::uint64_t> uniform(37, 37);
  EXPECT_NEAR(plugin_log_mass(uniform), std::log(37.0), 1e-14);
}

TEST(ExactConditionalEntropy, MatchesElementSpaceEnumeration) {
  for (std::uint64_t p = 3; p <= 211; ++p) {
    if (!oracle::is_prime(p)) continue;
    const auto g = make_full_group(p);
    if (g.order > 200) continue;
    EXPECT_NEAR(exact_conditional_entropy(g), oracle::element_space_conditional_entropy(g.generator, g.order, p), 1e-12)
        << p;
  }
}

TEST(ExactDhiStatistic, InvariantUnderGeneratorChoice) {
  for (std::uint64_t p = 5; p <= 200; ++p) {
    if (!oracle::is_prime(p)) continue;
    auto g = make_full_group(p);
    const double t = exact_dhi_statistic(g).statistic_T;
    std::uint64_t second = g.generator + 1;
    while (oracle::order_of(second, p) != p - 1) ++second;
    EXPECT_NEAR(oracle::element_space_conditional_entropy(second, p - 1, p) - std::log(p - 1.0), t, 1e-12) << p;
  }
}

TEST(ExactDhiStatistic, Examples) {
  const auto trivial = exact_dhi_statistic(CyclicGroup{2, 1, 1, Family::PrimeSubgroup});
  EXPECT_EQ(trivial.statistic_T, 0.0);
  const auto five = exact_dhi_statistic(make_prime_subgroup(11));
  EXPECT_NEAR(five.statistic_T, 0.06879132652366882, 1e-13);
  EXPECT_NEAR(five.conditional_entropy - std::log(5.0), five.statistic_T, 1e-15);
  EXPECT_NEAR(2 * std::log(5.0) - five.conditional_entropy, five.independence_gap, 1e-15);
}

TEST(ExactDhiStatistic, FullGroupsNeverUniform) {
  for (std::uint64_t p = 3; p <= 200; ++p) {
    if (!oracle::is_prime(p)) continue;
    const auto r = exact_dhi_statistic(make_full_group(p));
    EXPECT_GT(r.statistic_T, 0.0) << p;
    EXPECT_GT(r.independence_gap, 0.0) << p;
  }
}

TEST(IndependenceTest, Examples) {
  const auto trivial = independence_test(CyclicGroup{2, 1, 1, Family::PrimeSubgroup});
  EXPECT_EQ(trivial.gap, 0.0);
  EXPECT_TRUE(trivial.independent);
  const auto five = independence_test(make_prime_subgroup(11));
  EXPECT_NEAR(five.gap, 1.5406465859104315, 1e-13);
  EXPECT_FALSE(five.independent);
  const auto big = independence_test(make_full_group(1193));
  EXPECT_FALSE(big.independent);
  EXPECT_GT(big.gap, 0.0);
}

TEST(AnalyticSubgroupStatistic, Examples) {
  EXPECT_NEAR(analytic_subgroup_statistic(5), 0.06879132652366882, 1e-14);
  // q = 2: pairs from {1, 2}^2 give m_0 = 3, m_1 = 1.
  EXPECT_NEAR(analytic_subgroup_statistic(2), 0.75 * std::log(3.0) - std::log(2.0), 1e-15);
  EXPECT_THROW(analytic_subgroup_statistic(6), Error);
  for (std::uint64_t q : {101ull, 10007ull, 1000003ull, 2147483647ull}) {
    const double v = analytic_subgroup_statistic(q);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 10 * std::log(double(q)) / double(q));
  }
}

TEST(AnalyticSubgroupStatistic, AgreesWithNaiveEnumeration) {
  for (std::uint64_t q = 2; q < 300; ++q) {
    if (!oracle::is_prime(q)) continue;
    const double naive = oracle::log_mass(oracle::product_counts(q)) - std::log(double(q));
    EXPECT_NEAR(analytic_subgroup_statistic(q), naive, 1e-12) << q;
  }
}

TEST(PluginLogMass, PermutationInvariantBitForBit) {
  std::vector<std::uint64_t> a{3, 0, 1, 7, 2, 2, 9, 1};
  std::vector<std::uint64_t> b{2, 9, 1, 0, 7, 1, 3, 2};
  EXPECT_EQ(plugin_log_mass(a), plugin_log_mass(b));
}
