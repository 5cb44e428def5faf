#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bellopt/lhv.hpp"

using namespace bellopt;

namespace {

LhvModel single_state(std::vector<PortIntensities> a, std::vector<PortIntensities> b,
                      std::optional<double> ta = std::nullopt, std::optional<double> tb = std::nullopt) {
  const auto labels = default_chain_settings(2);
  HiddenState l{1.0, std::move(a), std::move(b), ta, tb};
  return LhvModel(labels.thetas, labels.phis, {l});
}

BellExpression expr(ExpressionKind kind, int L = 2) {
  return {kind, L, default_chain_settings(L)};
}

}  // namespace

TEST(Rates, VacuumConventions) {
  const auto r = rates_of({0.0, 0.0});
  EXPECT_EQ(r.plus, 0.0);
  EXPECT_EQ(r.minus, 0.0);
  EXPECT_EQ(r.plus_primed, 1.0);
  const auto q = rates_of({3.0, 1.0});
  EXPECT_EQ(q.plus, 0.75);
  EXPECT_EQ(q.minus, 0.25);
  EXPECT_EQ(q.plus_primed, 0.75);
}

TEST(Model, ValidationErrors) {
  const auto labels = default_chain_settings(2);
  HiddenState ok{1.0, {{1, 0}, {1, 0}}, {{1, 0}, {1, 0}}, {}, {}};
  EXPECT_NO_THROW(LhvModel(labels.thetas, labels.phis, {ok}));
  auto bad_weight = ok;
  bad_weight.weight = 0.5;
  EXPECT_THROW(LhvModel(labels.thetas, labels.phis, {bad_weight}), std::invalid_argument);
  auto negative = ok;
  negative.a[0].plus = -1.0;
  EXPECT_THROW(LhvModel(labels.thetas, labels.phis, {negative}), std::invalid_argument);
  auto short_list = ok;
  short_list.b.pop_back();
  EXPECT_THROW(LhvModel(labels.thetas, labels.phis, {short_list}), std::invalid_argument);
  EXPECT_THROW(LhvModel(labels.thetas, labels.phis, {}), std::invalid_argument);
  const LhvModel m(labels.thetas, labels.phis, {ok});
  EXPECT_THROW((void)m.setting_index(Side::A, 2.0), std::out_of_range);
}

TEST(Model, AllVacuumGivesPrimedCorrelationOne) {
  const auto m = single_state({{0, 0}, {0, 0}}, {{0, 0}, {0, 0}});
  EXPECT_EQ(evaluate_expression(m, expr(ExpressionKind::chsh_c)), 2.0);
  EXPECT_EQ(evaluate_expression(m, expr(ExpressionKind::chsh_f)), 0.0);
  EXPECT_EQ(evaluate_expression(m, expr(ExpressionKind::ch_k)), 0.0);
  EXPECT_THROW(evaluate_expression(m, expr(ExpressionKind::chsh_e)), ZeroDenominatorError);
}

TEST(Model, ExplicitIntensityCorrelation) {
  // Alice (2,1),(1,1); Bob (0,3),(4,0); totals 3 and 4.
  const auto m = single_state({{2, 1}, {1, 1}}, {{0, 3}, {4, 0}}, 3.0, 4.0);
  const LhvCorrelators src(m);
  const auto s = default_chain_settings(2);
  EXPECT_DOUBLE_EQ(src.intensity_e(s.thetas[0], s.phis[0]), (1.0 * -3.0) / 12.0);
  EXPECT_DOUBLE_EQ(src.intensity_e(s.thetas[1], s.phis[1]), 0.0);
  EXPECT_DOUBLE_EQ(src.coincidence_g(s.thetas[0], s.phis[1]), 8.0);
  EXPECT_DOUBLE_EQ(src.intensity_r(Side::A, s.thetas[0]), 4.0 * 2.0);
  EXPECT_DOUBLE_EQ(src.intensity_r(Side::B, s.phis[1]), 3.0 * 4.0);
  EXPECT_DOUBLE_EQ(src.distance_intensities(s.thetas[0], s.phis[1]), 2.0);
  EXPECT_DOUBLE_EQ(src.distance_rates(s.thetas[1], s.phis[0]), 0.5);
}

TEST(ChLemma, HoldsOnRandomBoxes) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const double X = 5 * u(rng), Y = 5 * u(rng);
    EXPECT_TRUE(ch_lemma_check(X * u(rng), X * u(rng), X, Y * u(rng), Y * u(rng), Y));
  }
}

TEST(ChLemma, CornersSaturate) {
  // x = x′ = X, y = y′ = Y gives exactly 0; x′ = y′ = 0 gives xy − xY − Xy < 0.
  EXPECT_DOUBLE_EQ(ch_lemma_expression(2, 2, 2, 3, 3, 3), 0.0);
  EXPECT_LT(ch_lemma_expression(1, 0, 1, 1, 0, 1), 0.0);
  EXPECT_THROW(ch_lemma_check(2, 0, 1, 0, 0, 1), std::invalid_argument);
  EXPECT_THROW(ch_lemma_check(0, 0, 1, -0.1, 0, 1), std::invalid_argument);
}

TEST(Sampling, ReproducibleAndClassRespecting) {
  const auto labels = default_chain_settings(3);
  const auto m1 = sample_random_model(42, 4, labels.thetas, labels.phis, ModelClass{true, false});
  const auto m2 = sample_random_model(42, 4, labels.thetas, labels.phis, ModelClass{true, false});
  ASSERT_EQ(m1.lambdas().size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& a = m1.lambdas()[i];
    const auto& b = m2.lambdas()[i];
    EXPECT_EQ(a.weight, b.weight);
    ASSERT_TRUE(a.total_a.has_value());
    for (std::size_t k = 0; k < a.a.size(); ++k) {
      EXPECT_EQ(a.a[k].plus, b.a[k].plus);
      EXPECT_NEAR(a.a[k].total(), *a.total_a, 1e-12);
      EXPECT_NEAR(a.b[k].total(), *a.total_b, 1e-12);
    }
  }
  const auto m3 = sample_random_model(7, 5, labels.thetas, labels.phis, ModelClass{false, true});
  for (const auto& l : m3.lambdas()) {
    for (const auto& p : l.a) EXPECT_LE(p.plus, *l.total_a);
    for (const auto& p : l.b) EXPECT_LE(p.plus, *l.total_b);
  }
}

TEST(Sampling, ZeroAtomsAppear) {
  const auto labels = default_chain_settings(5);
  int zeros = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = sample_random_model(seed, 3, labels.thetas, labels.phis, ModelClass{});
    for (const auto& l : m.lambdas()) {
      for (const auto& p : l.a) zeros += p.total() == 0.0;
    }
  }
  EXPECT_GT(zeros, 0);
}

TEST(Loophole, IntensityChshScalesWithRatio) {
  const auto m = loophole_model(10.0, 1.0);
  EXPECT_NEAR(evaluate_expression(m, expr(ExpressionKind::chsh_e)), 200.0, 1e-9);
  EXPECT_NEAR(evaluate_expression(m, expr(ExpressionKind::chsh_c)), 2.0, 1e-12);
  const auto m2 = loophole_model(3.0, 2.0);
  EXPECT_NEAR(evaluate_expression(m2, expr(ExpressionKind::chsh_e)), 2.0 * 9.0 / 4.0, 1e-12);
}

TEST(Loophole, ProjectionRestoresBound) {
  const auto projected = project_constrained_total(loophole_model(10.0, 1.0));
  for (const auto& l : projected.lambdas()) {
    for (const auto& p : l.a) EXPECT_NEAR(p.total(), *l.total_a, 1e-12);
  }
  EXPECT_NEAR(evaluate_expression(projected, expr(ExpressionKind::chsh_e)), 2.0, 1e-12);
  EXPECT_THROW(loophole_model(0.0, 1.0), std::invalid_argument);
}

TEST(Fuzz, NoViolationsAndThreadIndependent) {
  const FuzzReport serial = run_fuzz(2024, 3000, 5, 1);
  const FuzzReport threaded = run_fuzz(2024, 3000, 5, 4);
  EXPECT_EQ(serial.total_violations(), 0u);
  ASSERT_EQ(serial.checks.size(), threaded.checks.size());
  for (std::size_t i = 0; i < serial.checks.size(); ++i) {
    EXPECT_EQ(serial.checks[i].name, threaded.checks[i].name);
    EXPECT_EQ(serial.checks[i].evaluated, threaded.checks[i].evaluated);
    EXPECT_EQ(serial.checks[i].worst_margin, threaded.checks[i].worst_margin);
    EXPECT_GT(serial.checks[i].evaluated, 2000u) << serial.checks[i].name;
  }
}

TEST(Fuzz, DeterministicExtremesSaturateButDoNotExceed) {
  // Deterministic 0/1 port assignments saturate the chained bound exactly.
  const auto labels = default_chain_settings(2);
  HiddenState l{1.0, {{1, 0}, {1, 0}}, {{1, 0}, {0, 1}}, {}, {}};
  const LhvModel m(labels.thetas, labels.phis, {l});
  EXPECT_DOUBLE_EQ(evaluate_expression(m, expr(ExpressionKind::chsh_c)), 2.0);
  EXPECT_DOUBLE_EQ(evaluate_expression(m, expr(ExpressionKind::chsh_f)), 2.0);
}
