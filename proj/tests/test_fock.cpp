#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "bellopt/fock.hpp"
#include "test_support.hpp"

using namespace bellopt;

namespace {

// Independent oracle: Σ_{n≤N} (n+1) tanh²ⁿΓ / cosh⁴Γ by direct summation.
double partial_weight_sum(double gamma, int cutoff) {
  const double t2 = std::tanh(gamma) * std::tanh(gamma);
  const double c = std::cosh(gamma);
  double sum = 0.0;
  for (int n = 0; n <= cutoff; ++n) sum += (n + 1) * std::pow(t2, n) / std::pow(c, 4);
  return sum;
}

}  // namespace

TEST(BsvComponent, VacuumIsSingleUnitAmplitude) {
  const auto s = bsv_component(0);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.amplitude({0, 0, 0, 0}), Amplitude(1.0));
}

TEST(BsvComponent, SinglePairIsSinglet) {
  const auto s = bsv_component(1);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s.amplitude({1, 0, 0, 1}).real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s.amplitude({0, 1, 1, 0}).real(), -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(BsvComponent, TwoPairsAlternateSigns) {
  const auto s = bsv_component(2);
  ASSERT_EQ(s.size(), 3u);
  const double mag = 1.0 / std::sqrt(3.0);
  EXPECT_NEAR(s.amplitude({2, 0, 0, 2}).real(), mag, 1e-15);
  EXPECT_NEAR(s.amplitude({1, 1, 1, 1}).real(), -mag, 1e-15);
  EXPECT_NEAR(s.amplitude({0, 2, 2, 0}).real(), mag, 1e-15);
}

TEST(BsvComponent, EqualPhotonNumberPerSide) {
  for (int n = 0; n <= 8; ++n) {
    const auto psi = bsv_component(n);
    for (const auto& e : psi.entries()) {
      EXPECT_EQ(e.occupation.side_total(Side::A), n);
      EXPECT_EQ(e.occupation.side_total(Side::B), n);
    }
  }
  EXPECT_THROW(bsv_component(-1), std::invalid_argument);
}

TEST(BsvState, ZeroGainIsExactVacuum) {
  const auto s = bsv_state(Gain(0.0), 10);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.amplitude({0, 0, 0, 0}), Amplitude(1.0));
  EXPECT_EQ(s.norm_squared(), 1.0);
}

TEST(BsvState, VacuumAmplitudeIsSechSquared) {
  const auto s = bsv_state(Gain(0.5), 0);
  const double expected = 1.0 / (std::cosh(0.5) * std::cosh(0.5));
  EXPECT_NEAR(s.amplitude({0, 0, 0, 0}).real(), expected, 1e-15);
  EXPECT_NEAR(expected, 0.7864, 1e-4);
}

TEST(BsvState, NormMatchesPartialSum) {
  const auto s = bsv_state(Gain(1.0), 25);
  EXPECT_NEAR(s.norm_squared(), partial_weight_sum(1.0, 25), 1e-13);
  EXPECT_LT(s.norm_squared(), 1.0);
}

TEST(BsvState, SectorWeightLaw) {
  for (double g : {0.2, 0.7, 1.3}) {
    const auto s = bsv_state(Gain(g), 20);
    std::vector<double> sector(21, 0.0);
    for (const auto& e : s.entries()) sector[e.occupation.side_total(Side::A)] += std::norm(e.amplitude);
    const double t2 = std::tanh(g) * std::tanh(g);
    for (int n = 0; n <= 20; ++n) {
      EXPECT_NEAR(sector[n], (n + 1) * std::pow(t2, n) / std::pow(std::cosh(g), 4), 1e-12);
    }
  }
}

TEST(Gain, RejectsNegativeAndNonFinite) {
  EXPECT_THROW(Gain(-1.0), std::invalid_argument);
  EXPECT_THROW(Gain(std::nan("")), std::invalid_argument);
  EXPECT_THROW(bsv_state(Gain(0.3), -1), std::invalid_argument);
}

TEST(TailWeight, ZeroGainHasNoTail) {
  for (int n : {0, 3, 40}) EXPECT_EQ(tail_weight(Gain(0.0), n), 0.0);
}

TEST(TailWeight, OneTermPartialSum) {
  EXPECT_NEAR(tail_weight(Gain(0.5), 0), 1.0 - 1.0 / std::pow(std::cosh(0.5), 4), 1e-15);
}

TEST(TailWeight, MatchesPartialSumOracleAndDecreases) {
  double prev = 1.0;
  for (int n = 0; n <= 40; ++n) {
    const double tail = tail_weight(Gain(1.0), n);
    EXPECT_NEAR(tail, 1.0 - partial_weight_sum(1.0, n), 1e-13);
    EXPECT_LE(tail, prev);
    prev = tail;
  }
  EXPECT_LT(tail_weight(Gain(1.0), 25), 1e-3);
}

TEST(TailWeight, CutoffSelection) {
  const Gain g(0.5);
  const int n = cutoff_for_tail(g, 1e-12, 200);
  EXPECT_LT(tail_weight(g, n), 1e-12);
  EXPECT_GE(tail_weight(g, n - 1), 1e-12);
  EXPECT_EQ(cutoff_for_tail(Gain(2.5), 1e-12, 60), 60);
}

TEST(InnerProduct, NormalizationAndOrthogonality) {
  EXPECT_NEAR(std::abs(inner_product(bsv_component(1), bsv_component(1)) - 1.0), 0.0, 1e-15);
  EXPECT_EQ(inner_product(bsv_component(1), bsv_component(2)), Amplitude(0.0));
  const auto s = bsv_state(Gain(0.5), 20);
  EXPECT_NEAR(inner_product(s, s).real(), 1.0 - tail_weight(Gain(0.5), 20), 1e-13);
}

TEST(RotationBlock, MatchesBinomialExpansion) {
  for (double angle : {0.0, 0.37, -1.1, 2.9}) {
    const auto blocks = compute_rotation_blocks(angle, 8);
    for (int n = 0; n <= 8; ++n) {
      for (int p = 0; p <= n; ++p) {
        for (int k = 0; k <= n; ++k) {
          EXPECT_NEAR(blocks[n].element(k, p), test::binomial_rotation_element(n, k, p, angle),
                      1e-12)
              << "n=" << n << " k=" << k << " p=" << p;
        }
      }
    }
  }
}

TEST(RotateSide, ZeroAngleIsIdentity) {
  const auto s = bsv_state(Gain(0.6), 8);
  const auto r = rotate_side(s, Side::A, 0.0);
  ASSERT_EQ(r.size(), s.size());
  for (const auto& e : s.entries()) EXPECT_NEAR(std::abs(r.amplitude(e.occupation) - e.amplitude), 0.0, 1e-15);
}

TEST(RotateSide, SinglePhotonTwoDimensionalBlock) {
  const FourModeState photon({{{1, 0, 0, 0}, 1.0}}, 1);
  for (double th : {0.3, 1.2, -0.8}) {
    const auto r = rotate_side(photon, Side::A, th);
    EXPECT_NEAR(r.amplitude({1, 0, 0, 0}).real(), std::cos(th), 1e-15);
    EXPECT_NEAR(r.amplitude({0, 1, 0, 0}).real(), -std::sin(th), 1e-15);
    const auto rb = rotate_side(FourModeState({{{0, 0, 1, 0}, 1.0}}, 1), Side::B, th);
    EXPECT_NEAR(rb.amplitude({0, 0, 1, 0}).real(), std::cos(th), 1e-15);
    EXPECT_NEAR(rb.amplitude({0, 0, 0, 1}).real(), -std::sin(th), 1e-15);
  }
}

TEST(RotateSide, PreservesNormOnRandomStates) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto s = test::random_state(rng, 7);
    std::uniform_real_distribution<double> angle(-3.5, 3.5);
    const auto r = rotate_side(s, trial % 2 ? Side::A : Side::B, angle(rng));
    EXPECT_NEAR(r.norm_squared(), s.norm_squared(), 1e-12);
  }
}

TEST(RotateSide, AnglesCompose) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = test::random_state(rng, 6);
    const double a = angle(rng), b = angle(rng);
    const Side side = trial % 2 ? Side::A : Side::B;
    const auto twice = rotate_side(rotate_side(s, side, a), side, b);
    const auto once = rotate_side(s, side, a + b);
    EXPECT_LE(test::max_amplitude_difference(twice, once), 1e-12);
  }
}

TEST(RotateSide, SingletComponentsAreRotationInvariant) {
  for (int n = 0; n <= 6; ++n) {
    const auto psi = bsv_component(n);
    for (int i = 0; i < 12; ++i) {
      const double angle = -std::numbers::pi + i * std::numbers::pi / 6.0 + 0.05;
      const auto r = rotate_side(rotate_side(psi, Side::A, angle), Side::B, angle);
      const double fidelity = std::norm(inner_product(psi, r));
      EXPECT_GE(fidelity, 1.0 - 1e-10) << "n=" << n << " angle=" << angle;
    }
  }
}

TEST(FourModeState, MergesDuplicatesAndRejectsNegativeCounts) {
  const FourModeState s({{{1, 0, 0, 0}, 0.5}, {{1, 0, 0, 0}, 0.25}}, 1);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_EQ(s.amplitude({1, 0, 0, 0}), Amplitude(0.75));
  EXPECT_THROW(FourModeState({{{-1, 0, 0, 0}, 1.0}}, 1), std::invalid_argument);
}
