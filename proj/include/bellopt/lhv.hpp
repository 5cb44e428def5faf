// Finite local-hidden-variable models: rates with the vacuum conventions,
// evaluation of every Bell expression, random-model fuzzing, and an
// explicit model that exploits the setting-independent-total assumption.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bellopt/inequalities.hpp"
#include "bellopt/parallel.hpp"

namespace bellopt {

struct PortIntensities {
  double plus = 0.0;
  double minus = 0.0;

  double total() const { return plus + minus; }
};

struct HiddenState {
  double weight = 0.0;
  std::vector<PortIntensities> a;  // one entry per Alice setting
  std::vector<PortIntensities> b;  // one entry per Bob setting
  /// Intensities declared for "polarizer removed"; used as the Reid–Walls
  /// normalization and as I_A(λ), I_B(λ) in the intensity CH function.
  std::optional<double> total_a;
  std::optional<double> total_b;
};

/// constrained_total: I₊ + I₋ equals a setting-independent total.
/// no_enhancement: the declared total bounds every I₊. Implied by the former.
struct ModelClass {
  bool constrained_total = false;
  bool no_enhancement = false;

  ModelClass normalized() const { return {constrained_total, no_enhancement || constrained_total}; }
};

class LhvModel {
 public:
  LhvModel(std::vector<double> thetas, std::vector<double> phis, std::vector<HiddenState> lambdas)
      : thetas_(std::move(thetas)), phis_(std::move(phis)), lambdas_(std::move(lambdas)) {
    validate();
  }

  const std::vector<double>& thetas() const { return thetas_; }
  const std::vector<double>& phis() const { return phis_; }
  const std::vector<HiddenState>& lambdas() const { return lambdas_; }

  std::size_t setting_index(Side side, double angle) const {
    const auto& list = side == Side::A ? thetas_ : phis_;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (std::abs(list[i] - angle) <= 1e-12) return i;
    }
    throw std::out_of_range(std::string("model has no setting at angle ") + std::to_string(angle) +
                            " for side " + to_string(side));
  }

 private:
  void validate() const {
    if (lambdas_.empty()) throw std::invalid_argument("model needs at least one hidden state");
    double total = 0.0;
    for (const auto& l : lambdas_) {
      if (!(l.weight >= 0.0)) throw std::invalid_argument("hidden-state weights must be >= 0");
      if (l.a.size() != thetas_.size() || l.b.size() != phis_.size()) {
        throw std::invalid_argument("each hidden state needs intensities for every setting");
      }
      for (const auto* side : {&l.a, &l.b}) {
        for (const auto& p : *side) {
          if (!(p.plus >= 0.0 && p.minus >= 0.0)) {
            throw std::invalid_argument("intensities must be non-negative");
          }
        }
      }
      if ((l.total_a && *l.total_a < 0.0) || (l.total_b && *l.total_b < 0.0)) {
        throw std::invalid_argument("declared totals must be non-negative");
      }
      total += l.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");
  }

  std::vector<double> thetas_;
  std::vector<double> phis_;
  std::vector<HiddenState> lambdas_;
};

struct RatePair {
  double plus = 0.0;
  double minus = 0.0;
  double plus_primed = 0.0;
};

/// R± = I±/(I₊+I₋), both zero when nothing arrives; R′₊ is 1 in that case.
inline RatePair rates_of(const PortIntensities& p) {
  const double total = p.total();
  if (total == 0.0) return {0.0, 0.0, 1.0};
  return {p.plus / total, p.minus / total, p.plus / total};
}

inline RatePair model_rates(const LhvModel& model, std::size_t lambda, Side side,
                            std::size_t setting) {
  const auto& l = model.lambdas().at(lambda);
  return rates_of(side == Side::A ? l.a.at(setting) : l.b.at(setting));
}

/// Replaces ρ(λ) integrals by weighted sums over the model.
class LhvCorrelators final : public Correlators {
 public:
  explicit LhvCorrelators(const LhvModel& model) : model_(model) {}

  double correlation_c(double t, double p) const override {
    return sum(t, p, [](const PortIntensities& a, const PortIntensities& b, const HiddenState&) {
      const auto ra = rates_of(a), rb = rates_of(b);
      return (ra.plus_primed - ra.minus) * (rb.plus_primed - rb.minus);
    });
  }
  double correlation_f(double t, double p) const override {
    return sum(t, p, [](const PortIntensities& a, const PortIntensities& b, const HiddenState&) {
      const auto ra = rates_of(a), rb = rates_of(b);
      return (ra.plus - ra.minus) * (rb.plus - rb.minus);
    });
  }
  double coincidence_k(double t, double p) const override {
    return sum(t, p, [](const PortIntensities& a, const PortIntensities& b, const HiddenState&) {
      return rates_of(a).plus * rates_of(b).plus;
    });
  }
  double coincidence_g(double t, double p) const override {
    return sum(t, p, [](const PortIntensities& a, const PortIntensities& b, const HiddenState&) {
      return a.plus * b.plus;
    });
  }
  /// Numerator over ⟨I_A I_B⟩ built from the declared totals (port sums at
  /// the first setting when a total is not declared).
  double intensity_e(double t, double p) const override {
    const double num =
        sum(t, p, [](const PortIntensities& a, const PortIntensities& b, const HiddenState&) {
          return (a.plus - a.minus) * (b.plus - b.minus);
        });
    double den = 0.0;
    for (const auto& l : model_.lambdas()) den += l.weight * total(l, Side::A) * total(l, Side::B);
    return IntensityCorrelation{num, den}.value();
  }
  double distance_rates(double t, double p) const override {
    return sum(t, p, [](const PortIntensities& a, const PortIntensities& b, const HiddenState&) {
      return std::abs(rates_of(a).plus - rates_of(b).plus);
    });
  }
  double distance_intensities(double t, double p) const override {
    return sum(t, p, [](const PortIntensities& a, const PortIntensities& b, const HiddenState&) {
      return std::abs(a.plus - b.plus);
    });
  }
  double rate_s(Side side, double angle) const override {
    const auto idx = model_.setting_index(side, angle);
    double s = 0.0;
    for (const auto& l : model_.lambdas()) {
      s += l.weight * rates_of(side == Side::A ? l.a[idx] : l.b[idx]).plus;
    }
    return s;
  }
  /// r_A(θ) = Σ ρ I_B(λ) I_{A+}(θ,λ); r_B(φ) = Σ ρ I_A(λ) I_{B+}(φ,λ).
  double intensity_r(Side side, double angle) const override {
    const auto idx = model_.setting_index(side, angle);
    double s = 0.0;
    for (const auto& l : model_.lambdas()) {
      if (side == Side::A) {
        s += l.weight * total(l, Side::B) * l.a[idx].plus;
      } else {
        s += l.weight * total(l, Side::A) * l.b[idx].plus;
      }
    }
    return s;
  }

 private:
  static double total(const HiddenState& l, Side side) {
    if (side == Side::A) return l.total_a ? *l.total_a : l.a.front().total();
    return l.total_b ? *l.total_b : l.b.front().total();
  }

  template <typename F>
  double sum(double theta, double phi, F&& f) const {
    const auto ia = model_.setting_index(Side::A, theta);
    const auto ib = model_.setting_index(Side::B, phi);
    double s = 0.0;
    for (const auto& l : model_.lambdas()) s += l.weight * f(l.a[ia], l.b[ib], l);
    return s;
  }

  const LhvModel& model_;
};

inline double evaluate_expression(const LhvModel& model, const BellExpression& expression) {
  return evaluate(expression, LhvCorrelators(model)).lhs;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Reproducible random model. Intensities are Exp(1) draws with an atom at
/// exactly zero (probability 0.1) so the vacuum conventions get exercised.
inline LhvModel sample_random_model(std::uint64_t seed, int num_lambda,
                                    const std::vector<double>& thetas,
                                    const std::vector<double>& phis, ModelClass model_class) {
  if (num_lambda < 1) throw std::invalid_argument("num_lambda must be >= 1");
  const ModelClass cls = model_class.normalized();
  std::mt19937_64 rng(detail::splitmix64(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  auto intensity = [&] { return unit(rng) < 0.1 ? 0.0 : expo(rng); };
  // Split fraction with atoms at both ends.
  auto fraction = [&] {
    const double u = unit(rng);
    if (u < 0.1) return 0.0;
    if (u < 0.2) return 1.0;
    return unit(rng);
  };

  std::vector<HiddenState> lambdas(static_cast<std::size_t>(num_lambda));
  double weight_sum = 0.0;
  for (auto& l : lambdas) {
    l.weight = expo(rng);
    weight_sum += l.weight;
    auto fill = [&](std::vector<PortIntensities>& ports, std::size_t count,
                    std::optional<double>& total) {
      ports.resize(count);
      if (cls.constrained_total) {
        const double t = intensity();
        for (auto& p : ports) {
          p.plus = fraction() * t;
          p.minus = t - p.plus;
        }
        total = t;
        return;
      }
      for (auto& p : ports) {
        p.plus = intensity();
        p.minus = intensity();
      }
      if (cls.no_enhancement) {
        double max_plus = 0.0;
        for (const auto& p : ports) max_plus = std::max(max_plus, p.plus);
        total = max_plus + intensity();
      } else {
        total = intensity();
      }
    };
    fill(l.a, thetas.size(), l.total_a);
    fill(l.b, phis.size(), l.total_b);
  }
  for (auto& l : lambdas) l.weight /= weight_sum;
  return LhvModel(thetas, phis, std::move(lambdas));
}

/// Forces the setting-independent-total assumption: the declared total
/// becomes the mean port sum over settings and every setting's ports are
/// rescaled to it. When port sums already agree, totals simply become them.
inline LhvModel project_constrained_total(const LhvModel& model) {
  auto lambdas = model.lambdas();
  auto project = [](std::vector<PortIntensities>& ports, std::optional<double>& total) {
    double mean = 0.0;
    for (const auto& p : ports) mean += p.total();
    mean /= static_cast<double>(ports.size());
    for (auto& p : ports) {
      const double t = p.total();
      if (t == mean) continue;
      if (t == 0.0) {
        p = {mean / 2.0, mean / 2.0};
      } else {
        p = {p.plus * mean / t, p.minus * mean / t};
      }
    }
    total = mean;
  };
  for (auto& l : lambdas) {
    project(l.a, l.total_a);
    project(l.b, l.total_b);
  }
  return LhvModel(model.thetas(), model.phis(), std::move(lambdas));
}

/// Two deterministic hidden states (global sign flip) whose port imbalances
/// saturate the CHSH chain, with polarizer-present intensities of size M and
/// declared polarizer-removed totals `eps`. The intensity CHSH value is
/// 2(M/ε)²; the rate-based value stays at 2.
inline LhvModel loophole_model(double M = 10.0, double eps = 1.0) {
  if (!(M > 0.0) || !(eps > 0.0)) throw std::invalid_argument("M and eps must be positive");
  const SettingChain labels = default_chain_settings(2);
  // Chain terms (θ₁φ₁)(θ₂φ₁)(θ₂φ₂) − (θ₁φ₂) with a = (+1,+1), b = (+1,−1).
  const std::vector<double> a_signs{1.0, 1.0};
  const std::vector<double> b_signs{1.0, -1.0};
  std::vector<HiddenState> lambdas;
  for (double flip : {1.0, -1.0}) {
    HiddenState l;
    l.weight = 0.5;
    for (double s : a_signs) l.a.push_back({M * (1.0 + flip * s) / 2.0, M * (1.0 - flip * s) / 2.0});
    for (double s : b_signs) l.b.push_back({M * (1.0 + flip * s) / 2.0, M * (1.0 - flip * s) / 2.0});
    l.total_a = eps;
    l.total_b = eps;
    lambdas.push_back(std::move(l));
  }
  return LhvModel(labels.thetas, labels.phis, std::move(lambdas));
}

/// Clauser–Horne lemma: xy + xy′ + x′y − x′y′ − xY − Xy ≤ 0 for
/// 0 ≤ x, x′ ≤ X and 0 ≤ y, y′ ≤ Y.
inline double ch_lemma_expression(double x, double xp, double X, double y, double yp, double Y) {
  return x * y + x * yp + xp * y - xp * yp - x * Y - X * y;
}

inline bool ch_lemma_check(double x, double xp, double X, double y, double yp, double Y) {
  const bool ok = 0.0 <= x && x <= X && 0.0 <= xp && xp <= X && 0.0 <= y && y <= Y && 0.0 <= yp &&
                  yp <= Y;
  if (!ok) throw std::invalid_argument("CH lemma requires 0 <= x,x' <= X and 0 <= y,y' <= Y");
  // Relative slack for round-off in the products.
  const double scale = std::max({1.0, X * Y});
  return ch_lemma_expression(x, xp, X, y, yp, Y) <= 1e-12 * scale;
}

/// One bound checked by the fuzzer.
struct FuzzCheck {
  std::string name;
  std::size_t evaluated = 0;
  std::size_t violations = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();
};

struct FuzzReport {
  std::uint64_t root_seed = 0;
  std::size_t samples = 0;
  std::vector<FuzzCheck> checks;

  std::size_t total_violations() const {
    std::size_t n = 0;
    for (const auto& c : checks) n += c.violations;
    return n;
  }
};

/// Margins within this of zero count as saturation, not violation.
inline constexpr double kFuzzSlack = 1e-9;

/// Samples `samples` unconstrained models and `samples` constrained-total
/// models and checks every bound that must hold for them. Sample i uses the
/// seed splitmix64(root_seed + i) per class, so the outcome does not depend
/// on the worker count (`workers` = 0 uses worker_count()).
inline FuzzReport run_fuzz(std::uint64_t root_seed, std::size_t samples, int max_chain = 5,
                           unsigned workers = 0) {
  using K = ExpressionKind;
  const SettingChain labels = default_chain_settings(max_chain);
  auto prefix = [&labels](int L) {
    return SettingChain{{labels.thetas.begin(), labels.thetas.begin() + L},
                        {labels.phis.begin(), labels.phis.begin() + L}};
  };

  struct Job {
    std::string name;
    K kind;
    int L;
    bool constrained;
  };
  std::vector<Job> jobs{
      {"CHSH_C", K::chsh_c, 2, false},
      {"CHSH_F", K::chsh_f, 2, false},
      {"CH_K", K::ch_k, 2, false},
  };
  for (int L = 2; L <= max_chain; ++L) {
    jobs.push_back({"CHAINED_C_L" + std::to_string(L), K::chained_c, L, false});
    jobs.push_back({"CHAINED_DIST_RATES_L" + std::to_string(L), K::chained_dist_rates, L, false});
    jobs.push_back({"CHAINED_DIST_INTENSITIES_L" + std::to_string(L),
                    K::chained_dist_intensities, L, false});
  }
  jobs.push_back({"CONSTRAINED_CHSH_E", K::chsh_e, 2, true});
  jobs.push_back({"CONSTRAINED_CH_G", K::ch_g, 2, true});

  // Per-sample margins, reduced after the parallel loop.
  std::vector<std::vector<double>> margins(samples, std::vector<double>(jobs.size()));
  parallel_for(samples, [&](std::size_t i) {
    const std::uint64_t seed = detail::splitmix64(root_seed + i);
    const int num_lambda = 1 + static_cast<int>(seed % 6);
    const auto free_model =
        sample_random_model(seed, num_lambda, labels.thetas, labels.phis, ModelClass{});
    const auto constrained_model = sample_random_model(
        detail::splitmix64(seed), num_lambda, labels.thetas, labels.phis, ModelClass{true, true});
    const LhvCorrelators free_src(free_model);
    const LhvCorrelators constrained_src(constrained_model);
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      const auto& job = jobs[j];
      const BellExpression expr{job.kind, job.L, prefix(job.L)};
      double margin;
      try {
        margin = evaluate(expr, job.constrained ? constrained_src : free_src).margin;
      } catch (const ZeroDenominatorError&) {
        margin = -std::numeric_limits<double>::infinity();  // E undefined: nothing to check
      }
      margins[i][j] = margin;
    }
  }, workers);

  FuzzReport report;
  report.root_seed = root_seed;
  report.samples = samples;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    FuzzCheck check;
    check.name = jobs[j].name;
    for (std::size_t i = 0; i < samples; ++i) {
      const double m = margins[i][j];
      if (std::isinf(m) && m < 0) continue;
      ++check.evaluated;
      check.worst_margin = std::max(check.worst_margin, m);
      if (m > kFuzzSlack) ++check.violations;
    }
    report.checks.push_back(std::move(check));
  }
  return report;
}

}  // namespace bellopt
