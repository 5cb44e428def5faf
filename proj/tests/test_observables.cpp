#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "bellopt/observables.hpp"
#include "test_support.hpp"

using namespace bellopt;
using std::numbers::pi;

namespace {

// Joint port distribution by dense binomial-expansion rotation of both sides.
// Shares no code with the block-recursion path.
std::map<OutcomePair, double> brute_force_distribution(const FourModeState& s, double theta,
                                                       double phi) {
  std::map<Occupation, Amplitude> rotated;
  for (const auto& e : s.entries()) {
    const auto& o = e.occupation;
    const int na = o.a_h + o.a_v, nb = o.b_h + o.b_v;
    for (int ka = 0; ka <= na; ++ka) {
      const double ua = test::binomial_rotation_element(na, ka, o.a_h, theta);
      for (int kb = 0; kb <= nb; ++kb) {
        const double ub = test::binomial_rotation_element(nb, kb, o.b_h, phi);
        rotated[{ka, na - ka, kb, nb - kb}] += ua * ub * e.amplitude;
      }
    }
  }
  std::map<OutcomePair, double> dist;
  for (const auto& [o, a] : rotated) dist[{{o.a_h, o.a_v}, {o.b_h, o.b_v}}] += std::norm(a);
  return dist;
}

const std::vector<SettingPair> kSettings = {
    {0.0, 0.0}, {0.3, -0.4}, {pi / 8, pi / 4}, {1.1, 2.7}, {-0.9, 0.2}};

}  // namespace

TEST(PortRates, VacuumConventions) {
  const PortOutcome vac{0, 0};
  EXPECT_EQ(port_rate(vac), 0.0);
  EXPECT_EQ(port_rate_minus(vac), 0.0);
  EXPECT_EQ(port_rate_primed(vac), 1.0);
  const PortOutcome o{3, 1};
  EXPECT_EQ(port_rate(o), 0.75);
  EXPECT_EQ(port_rate_primed(o), 0.75);
  EXPECT_EQ(port_rate_minus(o), 0.25);
}

TEST(Vacuum, CorrelatorValues) {
  const auto vac = bsv_state(Gain(0.0), 5);
  for (const auto& s : kSettings) {
    EXPECT_EQ(correlator_C(vac, s), 1.0);
    EXPECT_EQ(correlator_F(vac, s), 0.0);
    EXPECT_EQ(correlator_K(vac, s), 0.0);
    EXPECT_EQ(correlator_G_intensity(vac, s), 0.0);
    EXPECT_EQ(distance_correlator_rates(vac, s), 0.0);
    const auto e = correlator_E_intensity(vac, s);
    EXPECT_FALSE(e.defined());
    EXPECT_FALSE(e.ratio().has_value());
    EXPECT_THROW((void)e.value(), ZeroDenominatorError);
  }
  EXPECT_EQ(local_rate_S(vac, Side::A, 0.4), 0.0);
  EXPECT_EQ(rate_expectation(vac, Side::B, 0.4, true), 1.0);
}

TEST(JointDistribution, MatchesBinomialOracleOnRandomStates) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = test::random_state(rng, 4);
    for (const auto& st : kSettings) {
      const auto got = joint_port_distribution(s, st);
      const auto want = brute_force_distribution(s, st.theta, st.phi);
      double total = 0.0;
      for (const auto& [k, p] : want) {
        const auto it = got.find(k);
        const double g = it == got.end() ? 0.0 : it->second;
        EXPECT_NEAR(g, p, 1e-12);
        total += p;
      }
      for (const auto& [k, p] : got) {
        if (!want.contains(k)) {
          EXPECT_NEAR(p, 0.0, 1e-12);
        }
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(Singlet, CorrelatorsFollowCosineOfDoubledAngle) {
  const auto psi = bsv_component(1);
  for (const auto& s : kSettings) {
    const double delta = 2.0 * (s.theta - s.phi);
    EXPECT_NEAR(correlator_C(psi, s), -std::cos(delta), 1e-12);
    EXPECT_NEAR(correlator_F(psi, s), -std::cos(delta), 1e-12);
    EXPECT_NEAR(correlator_K(psi, s), 0.25 * (1.0 - std::cos(delta)), 1e-12);
    const double half = std::sin(s.theta - s.phi);
    EXPECT_NEAR(correlator_G_intensity(psi, s), 0.5 * half * half, 1e-12);
    EXPECT_NEAR(correlator_E_intensity(psi, s).value(), -std::cos(delta), 1e-12);
  }
}

TEST(PairSectors, PerSectorCosineLaws) {
  for (int n = 1; n <= 10; ++n) {
    const auto psi = bsv_component(n);
    for (const auto& s : kSettings) {
      const double c = std::cos(2.0 * (s.theta - s.phi));
      const auto dist = joint_port_distribution(psi, s);
      EXPECT_NEAR(correlator_C_of(dist), -(n + 2.0) / (3.0 * n) * c, 1e-11) << "n=" << n;
      EXPECT_NEAR(intensity_numerator_of(dist), -(n * n + 2.0 * n) / 3.0 * c, 1e-10) << "n=" << n;
      EXPECT_NEAR(correlator_K_of(dist), 0.25 - (n + 2.0) / (12.0 * n) * c, 1e-11) << "n=" << n;
    }
  }
}

TEST(PairSectors, LocalMarginalsAreUnpolarized) {
  for (int n = 1; n <= 6; ++n) {
    const auto psi = bsv_component(n);
    for (double a : {0.0, 0.7, -1.3}) {
      EXPECT_NEAR(local_rate_S(psi, Side::A, a), 0.5, 1e-12);
      EXPECT_NEAR(local_rate_S(psi, Side::B, a), 0.5, 1e-12);
      EXPECT_NEAR(stokes_prime_expectation(psi, Side::A, a), 0.0, 1e-12);
      EXPECT_NEAR(local_intensity_rate(psi, Side::B, a), 0.5 * n * n, 1e-10);
    }
  }
}

TEST(Bsv, IntensityProductMatchesWeightedSum) {
  for (double g : {0.3, 0.9}) {
    const int N = 30;
    const auto s = bsv_state(Gain(g), N);
    double want = 0.0;
    for (int n = 0; n <= N; ++n) want += test::sector_weight(g, n) * n * n;
    EXPECT_NEAR(intensity_product_expectation(s), want, 1e-11);
  }
}

TEST(Bsv, SectorPathAgreesWithStatePath) {
  const Gain g(0.8);
  const int N = 18;
  const auto s = bsv_state(g, N);
  for (const auto& st : kSettings) {
    const auto dist = joint_port_distribution(s, st);
    const double diff = st.theta - st.phi;
    const auto c = sector::bsv_expectation(g, N, diff, [](const PortOutcome& a, const PortOutcome& b) {
      return (port_rate_primed(a) - port_rate_minus(a)) * (port_rate_primed(b) - port_rate_minus(b));
    });
    EXPECT_NEAR(correlator_C_of(dist), c, 1e-12);
    const auto d = sector::bsv_expectation(g, N, diff, [](const PortOutcome& a, const PortOutcome& b) {
      return std::abs(port_rate(a) - port_rate(b));
    });
    EXPECT_NEAR(distance_rates_of(dist), d, 1e-12);
    const auto di = sector::bsv_expectation(g, N, diff, [](const PortOutcome& a, const PortOutcome& b) {
      return static_cast<double>(std::abs(a.n_plus - b.n_plus));
    });
    EXPECT_NEAR(distance_intensities_of(dist), di, 1e-11);
  }
}

TEST(SectorDistribution, RowsAndColumnsAreUniform) {
  for (int n = 0; n <= 7; ++n) {
    const auto p = sector::component_distribution(n, 0.61);
    for (int i = 0; i <= n; ++i) {
      double row = 0.0, col = 0.0;
      for (int j = 0; j <= n; ++j) {
        row += p[static_cast<std::size_t>(i) * (n + 1) + j];
        col += p[static_cast<std::size_t>(j) * (n + 1) + i];
      }
      EXPECT_NEAR(row, 1.0 / (n + 1), 1e-13);
      EXPECT_NEAR(col, 1.0 / (n + 1), 1e-13);
    }
  }
}

TEST(Distance, ProductStateValues) {
  // |H⟩_A |H⟩_B: both rates are 1 when the analyzers sit at H.
  const FourModeState hh({{{1, 0, 1, 0}, 1.0}}, 1);
  EXPECT_NEAR(distance_correlator_rates(hh, {0.0, 0.0}), 0.0, 1e-15);
  EXPECT_NEAR(distance_correlator_rates(hh, {0.0, pi / 2}), 1.0, 1e-15);
  EXPECT_NEAR(distance_correlator_intensities(hh, {0.0, pi / 2}), 1.0, 1e-15);
  // At 45° on Bob's side the rates differ by 1 half the time.
  EXPECT_NEAR(distance_correlator_rates(hh, {0.0, pi / 4}), 0.5, 1e-12);
}

TEST(LocalRates, PrimedAndUnprimedDifferByVacuumWeight) {
  const Gain g(0.6);
  const auto s = bsv_state(g, 20);
  const double vac = test::sector_weight(0.6, 0);
  for (double a : {0.0, 0.5}) {
    EXPECT_NEAR(rate_expectation(s, Side::A, a, true) - rate_expectation(s, Side::A, a, false), vac,
                1e-13);
  }
}
