#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "expsum/analysis.hpp"
#include "expsum/geometry.hpp"
#include "expsum/variety.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace expsum;
using namespace std::complex_literals;

namespace {


// sum_{j<n} (e^{a_j} - 1 - a_j) through the plain exponential in long double.
std::complex<long double> remainder_long_double(const std::vector<Complex>& a) {
  std::complex<long double> total = 0.0L;
  for (std::size_t j = 0; j + 1 < a.size(); ++j) {
    const std::complex<long double> x(a[j].real(), a[j].imag());
    total += std::exp(x) - 1.0L - x;
  }
  return total;
}

}  // namespace

TEST(Decompose, CandidateIsZero) {
  for (std::size_t n : {2u, 3u, 17u, 1000u}) {
    const Decomposition d = decompose(candidate(n).point());
    for (const Complex& a : d.a) EXPECT_EQ(a, 0.0 + 0i);
    for (const Complex& s : d.S) EXPECT_EQ(s, 0.0 + 0i);
    EXPECT_EQ(d.M, 0.0);
    EXPECT_EQ(d.abs2_sum, 0.0);
    EXPECT_EQ(d.S.size(), kDefaultPowerSums);
  }
  const Decomposition two = decompose(Point{-kPi / 2 * 1i, kPi / 2 * 1i});
  EXPECT_EQ(two.a[0], 0.0 + 0i);
  EXPECT_EQ(two.a[1], 0.0 + 0i);
}

TEST(Decompose, FirstPowerSumIsMinusLast) {
  const Decomposition d = decompose(random_feasible(3, 1, 1.0));
  EXPECT_LE(std::abs(d.power_sum(1) + d.a_last()), 1e-10 * (1.0 + std::abs(d.a_last())));
  Complex direct = 0.0;
  for (std::size_t j = 0; j + 1 < d.n; ++j) direct += d.a[j] * d.a[j] * d.a[j];
  EXPECT_NEAR(std::abs(d.power_sum(3) - direct), 0.0, 1e-12 * (1.0 + std::abs(direct)));
}

TEST(CheckHypotheses, CandidateMeetsAllWithEqualityInDistance) {
  const HypothesisReport h = check_hypotheses(candidate(10).point());
  EXPECT_TRUE(h.all_hold());
  EXPECT_NEAR(h[6].margin, 0.0, 1e-10);
  EXPECT_NEAR(h[2].margin, candidate(10).b[9].imag(), 0.0);
}

TEST(CheckHypotheses, ZeroPointFailsFeasibility) {
  const HypothesisReport h = check_hypotheses(Point{0.0 + 0i, 0.0 + 0i});
  EXPECT_FALSE(h[1].holds);
  EXPECT_DOUBLE_EQ(h[1].margin, -2.0);
}

TEST(CheckHypotheses, RandomFeasiblePointIsGenericallyTooFar) {
  const HypothesisReport h = check_hypotheses(random_feasible(5, 3, 1.0));
  EXPECT_TRUE(h[1].holds);
  EXPECT_TRUE(h[2].holds);
  EXPECT_TRUE(h[3].holds);
  EXPECT_TRUE(h[4].holds);
  EXPECT_FALSE(h[6].holds);
}

TEST(Lemma1, CandidateHoldsWithZeroMargin) {
  const Decomposition d = decompose(candidate(7).point());
  const LemmaReport r = lemma1(d, d.frame);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.margin, 0.0);
  EXPECT_TRUE(r.note.empty());
}

TEST(Lemma1, HoldsOnPerturbedPointsMeetingHypotheses) {
  std::mt19937_64 rng(21);
  int accepted = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 5 + trial % 10;
    const Point p = gen::perturbed_candidate(n, gen::log_uniform(rng, 1e-8, 1e-3), rng);
    if (!check_hypotheses(p).all_hold()) continue;
    ++accepted;
    const Decomposition d = decompose(p);
    const LemmaReport r = lemma1(d, d.frame);
    EXPECT_LE(r.lhs.real(), r.rhs.real() + 1e-9);
    EXPECT_TRUE(r.holds);
  }
  EXPECT_GT(accepted, 0);
}

TEST(Lemma1, NotesUnmetDistanceHypothesis) {
  const Decomposition d = decompose(random_feasible(5, 3, 1.0));
  const LemmaReport r = lemma1(d, d.frame);
  EXPECT_NE(r.note.find("(6) violated"), std::string::npos) << r.note;
  EXPECT_GT(r.lhs.real(), 0.0);
  EXPECT_GT(r.rhs.real(), 0.0);
}

TEST(Lemma2, Examples) {
  const LemmaReport cand = lemma2(decompose(candidate(6).point()));
  EXPECT_EQ(cand.lhs, 0.0 + 0i);
  EXPECT_EQ(cand.rhs, 0.0 + 0i);
  EXPECT_TRUE(cand.holds);

  const LemmaReport feasible = lemma2(decompose(random_feasible(4, 2, 1.0)));
  EXPECT_TRUE(feasible.holds);
  EXPECT_LE(feasible.margin, 1e-9 * 4.0 * (1.0 + std::abs(feasible.rhs)));

  const LemmaReport infeasible = lemma2(decompose(Point{0.0 + 0i, 0.0 + 0i}));
  EXPECT_FALSE(infeasible.holds);
  EXPECT_NE(infeasible.note.find("(1) violated"), std::string::npos);
}

TEST(Lemma3, Examples) {
  const LemmaReport cand = lemma3(decompose(candidate(6).point()));
  EXPECT_EQ(cand.margin, 0.0);
  EXPECT_TRUE(cand.holds);

  const LemmaReport feasible = lemma3(decompose(random_feasible(6, 9, 1.0)));
  EXPECT_TRUE(feasible.holds);
  EXPECT_LE(feasible.margin, 1e-9 * 6.0 * (1.0 + std::abs(feasible.rhs)));

  // Feasible but translated off center.
  const Point shifted = translate(random_feasible(6, 9, 1.0), Complex(-0.4, 0.2));
  const LemmaReport off = lemma3(decompose(shifted));
  EXPECT_FALSE(off.holds);
  EXPECT_NE(off.note.find("(3)"), std::string::npos);
}

TEST(Lemma3, AgreesWithLongDoubleRoute) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Decomposition d = decompose(random_feasible(3 + seed % 20, seed, 1.0));
    const LemmaReport r = lemma3(d);
    const auto reference = remainder_long_double(d.a);
    EXPECT_NEAR(r.lhs.real(), static_cast<double>(reference.real()), 1e-12 * (1.0 + std::abs(r.lhs)));
    EXPECT_NEAR(r.lhs.imag(), static_cast<double>(reference.imag()), 1e-12 * (1.0 + std::abs(r.lhs)));
  }
}

TEST(Lemma45, CandidateLargeN) {
  const CandidateFrame f = candidate(1000);
  const Decomposition d = decompose(f.point());
  const LemmaReport r = lemma4_and_5(d, f.point(), f);
  ASSERT_EQ(r.parts.size(), 3u);
  EXPECT_EQ(d.M, 0.0);
  for (const SubCheck& part : r.parts) EXPECT_TRUE(part.holds) << part.name;
  EXPECT_TRUE(r.holds);
  // (sqrt(D) + |b|)^2 = 4 D with D = |k|^2 (1 - 1/n).
  EXPECT_NEAR(r.rhs.real(), 4.0 * oracle::kDist2N1000, 1e-10);
}

TEST(Lemma45, ThresholdReportedBelowIt) {
  EXPECT_EQ(coordinate_bound_threshold(), oracle::kCoordinateThreshold);
  const CandidateFrame f = candidate(3);
  const LemmaReport r = lemma4_and_5(decompose(f.point()), f.point(), f);
  EXPECT_EQ(r.value("threshold_n"), oracle::kCoordinateThreshold);
  // 0.72 log 3 < |k|/3, so the coordinate bound fails but is informational.
  EXPECT_FALSE(r.parts[1].holds);
  EXPECT_FALSE(r.parts[1].counted);
  EXPECT_TRUE(r.holds);
  EXPECT_NE(r.note.find("below threshold"), std::string::npos);
}

TEST(Lemma45, PerturbedPointLargeN) {
  std::mt19937_64 rng(45);
  const std::size_t n = 10000;
  int evaluated = 0;
  for (int trial = 0; trial < 20 && evaluated == 0; ++trial) {
    const Point p = gen::perturbed_candidate(n, 1e-7, rng);
    if (!check_hypotheses(p).all_hold()) continue;
    ++evaluated;
    const Decomposition d = decompose(p);
    const LemmaReport r = lemma4_and_5(d, p, d.frame);
    EXPECT_TRUE(r.parts[0].holds);
    EXPECT_TRUE(r.parts[2].holds);
    EXPECT_TRUE(r.holds);
  }
  EXPECT_EQ(evaluated, 1);
}

TEST(Lemma6, CandidateBothRoutesZero) {
  const LemmaReport r = lemma6(decompose(candidate(9).point()));
  EXPECT_EQ(r.lhs, 0.0 + 0i);
  EXPECT_EQ(r.rhs, 0.0 + 0i);
  EXPECT_TRUE(r.holds);
}

TEST(Lemma6, RoutesAgreeOnRandomFeasiblePoint) {
  const LemmaReport r = lemma6(decompose(random_feasible(5, 11, 0.5)));
  EXPECT_LE(r.margin, 1e-12 * std::abs(r.lhs));
  EXPECT_TRUE(r.holds);
  EXPECT_GT(r.value("series_terms"), 2.0);
}

TEST(Lemma6, PowerSumBoundPartAlwaysHolds) {
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 30;
    const Decomposition d = decompose(Point(oracle::random_vector(rng, n, 2.0)));
    const LemmaReport r = lemma6(d);
    EXPECT_TRUE(r.parts[1].holds);
  }
}

TEST(Lemma6, DivergenceGuard) {
  std::vector<Complex> z(4, Complex(0.0, 0.0));
  z[0] = Complex(900.0, 0.0);
  z[3] = Complex(-900.0, 0.0);
  try {
    lemma6(decompose(Point(z)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SeriesDivergence);
  }
}

TEST(Lemma8, CandidateHolds) {
  const Decomposition d = decompose(candidate(12).point());
  const LemmaReport r = lemma8_and_conclusion(d, d.frame);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.value("abs_a_n"), 0.0);
  EXPECT_NEAR(r.value("n^-0.25"), std::pow(12.0, -0.25), 1e-15);
}

TEST(Lemma8, DistanceBudgetMissedByPerturbation) {
  // Walk along a tangent direction until the distance budget is exceeded by
  // roughly 1e-4; the margins are reported but (6) is flagged.
  std::mt19937_64 rng(8);
  const std::size_t n = 8;
  Point p = gen::perturbed_candidate(n, 1e-2, rng);
  const HypothesisReport h = check_hypotheses(p);
  ASSERT_FALSE(h[6].holds);
  const Decomposition d = decompose(p);
  const LemmaReport r = lemma8_and_conclusion(d, d.frame);
  EXPECT_NE(r.note.find("(6)"), std::string::npos);
  EXPECT_GT(r.value("upper"), 0.0);
  // A feasible centered point always satisfies lower <= upper.
  EXPECT_LE(r.value("lower"), r.value("upper"));
}

TEST(VerifyLemmas, ProducesAllReportsInOrder) {
  const std::vector<LemmaReport> reports = verify_lemmas(candidate(4).point());
  ASSERT_EQ(reports.size(), 6u);
  const char* names[] = {"L1", "L2", "L3", "L4+5", "L6", "L8"};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(reports[i].lemma, names[i]);
    EXPECT_EQ(reports[i].margin == 0.0 || reports[i].lemma == "L4+5", true) << names[i];
  }
}

// Properties.

TEST(AnalysisProperty, PowerSumBoundOnArbitraryVectors) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> size(1, 49);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Complex> a = oracle::random_vector(rng, size(rng), 5.0 / std::sqrt(2.0));
    const std::vector<Complex> S = power_sums(a, 32);
    double abs2 = 0.0, M = 0.0;
    for (const Complex& x : a) {
      abs2 += std::norm(x);
      M = std::max(M, std::abs(x));
    }
    for (std::size_t l = 2; l <= 32; ++l) {
      const double bound = abs2 * std::pow(M, static_cast<double>(l - 2));
      EXPECT_LE(std::abs(S[l - 1]), bound * (1.0 + 1e-13)) << "l = " << l;
    }
  }
}

TEST(AnalysisProperty, IdentitySuiteOnRandomFeasiblePoints) {
  for (std::size_t n = 2; n <= 30; ++n) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Decomposition d = decompose(random_feasible(n, seed, 1.0));
      const LemmaReport l2 = lemma2(d);
      const LemmaReport l3 = lemma3(d);
      EXPECT_TRUE(l2.holds) << n << " " << seed;
      EXPECT_TRUE(l3.holds) << n << " " << seed;
      EXPECT_LE(l3.margin, 1e-9 * static_cast<double>(n) * (1.0 + std::abs(l3.rhs)));
    }
  }
}

TEST(AnalysisProperty, DecomposeCandidateIsZeroForLargeN) {
  for (std::size_t n : {2u, 10u, 1000u, 100000u}) {
    const Decomposition d = decompose(candidate(n).point(), 4);
    EXPECT_EQ(d.abs2_sum, 0.0) << n;
  }
}
