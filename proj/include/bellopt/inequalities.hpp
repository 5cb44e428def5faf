// Bell expressions over correlator values: CHSH-like, CH-like, chained and
// distance-chained forms, with bounds and violation margins.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bellopt/correlators.hpp"

namespace bellopt {

enum class ExpressionKind {
  chsh_e,
  chsh_c,
  chsh_f,
  ch_k,
  ch_g,  // Reid–Walls intensity CH: G + G + G − G − r_A − r_B ≤ 0
  chained_c,
  chained_e,
  chained_dist_rates,
  chained_dist_intensities,
};

inline std::string to_string(ExpressionKind kind) {
  switch (kind) {
    case ExpressionKind::chsh_e: return "CHSH_E";
    case ExpressionKind::chsh_c: return "CHSH_C";
    case ExpressionKind::chsh_f: return "CHSH_F";
    case ExpressionKind::ch_k: return "CH_K";
    case ExpressionKind::ch_g: return "CH_G";
    case ExpressionKind::chained_c: return "CHAINED_C";
    case ExpressionKind::chained_e: return "CHAINED_E";
    case ExpressionKind::chained_dist_rates: return "CHAINED_DIST_RATES";
    case ExpressionKind::chained_dist_intensities: return "CHAINED_DIST_INTENSITIES";
  }
  return "?";
}

inline bool is_distance_kind(ExpressionKind kind) {
  return kind == ExpressionKind::chained_dist_rates ||
         kind == ExpressionKind::chained_dist_intensities;
}

/// Kinds whose BSV correlator has the form A − B cos δ.
inline bool is_cosine_kind(ExpressionKind kind) { return !is_distance_kind(kind); }

/// Two-setting kinds are fixed at L = 2.
inline bool is_two_setting_kind(ExpressionKind kind) {
  switch (kind) {
    case ExpressionKind::chsh_e:
    case ExpressionKind::chsh_c:
    case ExpressionKind::chsh_f:
    case ExpressionKind::ch_k:
    case ExpressionKind::ch_g: return true;
    default: return false;
  }
}

/// Ordered analyzer angles, θ₁…θ_L for Alice and φ₁…φ_L for Bob.
struct SettingChain {
  std::vector<double> thetas;
  std::vector<double> phis;

  int length() const { return static_cast<int>(thetas.size()); }
};

/// Equal spacing θ_i = (2i−1)π/4L, φ_i = 2πi/4L (physical angles).
inline SettingChain default_chain_settings(int L) {
  if (L < 2) throw std::invalid_argument("chain length L must be >= 2");
  SettingChain chain;
  for (int i = 1; i <= L; ++i) {
    chain.thetas.push_back((2.0 * i - 1.0) * std::numbers::pi / (4.0 * L));
    chain.phis.push_back(2.0 * std::numbers::pi * i / (4.0 * L));
  }
  return chain;
}

/// Default chain with Bob's analyzer turned by π/2, matching the
/// anticorrelation of singlet-type states. Maximizes A − B cos δ chains and
/// is the working orientation for the distance chains.
inline SettingChain anticorrelated_chain_settings(int L) {
  SettingChain chain = default_chain_settings(L);
  for (double& phi : chain.phis) phi += std::numbers::pi / 2.0;
  return chain;
}

/// Maps CHSH settings (θ, θ′, φ, φ′) onto the L = 2 chain ordering.
inline SettingChain chsh_settings(double theta, double theta_prime, double phi, double phi_prime) {
  return {{theta_prime, theta}, {phi, phi_prime}};
}

struct BellExpression {
  ExpressionKind kind = ExpressionKind::chsh_c;
  int L = 2;
  SettingChain settings;

  void validate() const {
    if (L < 2) throw std::invalid_argument("chain length L must be >= 2");
    if (is_two_setting_kind(kind) && L != 2) {
      throw std::invalid_argument(to_string(kind) + " requires L = 2");
    }
    if (settings.length() != L || static_cast<int>(settings.phis.size()) != L) {
      throw std::invalid_argument("settings lists must have length L");
    }
  }
};

struct InequalityReport {
  ExpressionKind kind = ExpressionKind::chsh_c;
  int L = 2;
  double lhs = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double margin = 0.0;  // positive = violation
  SettingChain settings;
  std::optional<double> gain;
  std::optional<int> cutoff_pairs;
  std::optional<double> tail_weight;
  std::string source;

  bool violated() const { return margin > 0.0; }
};

struct Bounds {
  double lower;
  double upper;
};

inline Bounds bounds_for(ExpressionKind kind, int L) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind) {
    case ExpressionKind::chsh_e:
    case ExpressionKind::chsh_c:
    case ExpressionKind::chsh_f: return {-2.0, 2.0};
    case ExpressionKind::ch_k: return {-1.0, 0.0};
    case ExpressionKind::ch_g: return {-inf, 0.0};
    case ExpressionKind::chained_c:
    case ExpressionKind::chained_e: return {-2.0 * (L - 1), 2.0 * (L - 1)};
    case ExpressionKind::chained_dist_rates:
    case ExpressionKind::chained_dist_intensities: return {0.0, inf};
  }
  return {-inf, inf};
}

inline double violation_margin(double lhs, const Bounds& b) {
  return std::max(lhs - b.upper, b.lower - lhs);
}

inline InequalityReport make_report(ExpressionKind kind, int L, double lhs, SettingChain settings) {
  const Bounds b = bounds_for(kind, L);
  InequalityReport r;
  r.kind = kind;
  r.L = L;
  r.lhs = lhs;
  r.lower_bound = b.lower;
  r.upper_bound = b.upper;
  r.margin = violation_margin(lhs, b);
  r.settings = std::move(settings);
  return r;
}

using CorrelatorFn = std::function<double(double theta, double phi)>;
using LocalFn = std::function<double(double angle)>;

/// f(θ₁,φ₁) + f(θ₂,φ₁) + f(θ₂,φ₂) + … + f(θ_L,φ_L) − f(θ₁,φ_L).
inline double chain_sum(const CorrelatorFn& f, const SettingChain& s) {
  const int L = s.length();
  double sum = 0.0;
  for (int i = 0; i < L; ++i) {
    sum += f(s.thetas[i], s.phis[i]);
    if (i + 1 < L) sum += f(s.thetas[i + 1], s.phis[i]);
  }
  return sum - f(s.thetas[0], s.phis[L - 1]);
}

inline InequalityReport chained_value(const CorrelatorFn& correlator, int L,
                                      const SettingChain& settings,
                                      ExpressionKind kind = ExpressionKind::chained_c) {
  BellExpression{kind, L, settings}.validate();
  return make_report(kind, L, chain_sum(correlator, settings), settings);
}

/// E(θ,φ) + E(θ,φ′) + E(θ′,φ) − E(θ′,φ′), bounds ±2. Shares the chain
/// summation with chained_value(L = 2).
inline InequalityReport chsh_value(const CorrelatorFn& correlator, double theta,
                                   double theta_prime, double phi, double phi_prime,
                                   ExpressionKind kind = ExpressionKind::chsh_c) {
  const auto settings = chsh_settings(theta, theta_prime, phi, phi_prime);
  return make_report(kind, 2, chain_sum(correlator, settings), settings);
}

/// K(θ,φ) + K(θ,φ′) + K(θ′,φ) − K(θ′,φ′) − S_A(θ) − S_B(φ), bounds [−1, 0].
/// Settings use the chain layout: θ = θ₂, θ′ = θ₁, φ = φ₁, φ′ = φ₂.
inline InequalityReport ch_value(const CorrelatorFn& coincidence, const LocalFn& local_a,
                                 const LocalFn& local_b, const SettingChain& settings,
                                 ExpressionKind kind = ExpressionKind::ch_k) {
  BellExpression{kind, 2, settings}.validate();
  const double lhs = chain_sum(coincidence, settings) - local_a(settings.thetas[1]) -
                     local_b(settings.phis[0]);
  return make_report(kind, 2, lhs, settings);
}

/// Σᵢ D(θᵢ,φᵢ) + Σᵢ D(θᵢ₊₁,φᵢ) − D(θ₁,φ_L) ≥ 0.
inline InequalityReport chained_distance_value(const CorrelatorFn& distance, int L,
                                               const SettingChain& settings,
                                               ExpressionKind kind) {
  if (!is_distance_kind(kind)) throw std::invalid_argument("not a distance-chain kind");
  BellExpression{kind, L, settings}.validate();
  return make_report(kind, L, chain_sum(distance, settings), settings);
}

/// Evaluates any expression against a correlator source.
inline InequalityReport evaluate(const BellExpression& expr, const Correlators& source) {
  expr.validate();
  using K = ExpressionKind;
  auto bind = [&source](double (Correlators::*fn)(double, double) const) -> CorrelatorFn {
    return [&source, fn](double t, double p) { return (source.*fn)(t, p); };
  };
  switch (expr.kind) {
    case K::chsh_c:
    case K::chained_c:
      return chained_value(bind(&Correlators::correlation_c), expr.L, expr.settings, expr.kind);
    case K::chsh_e:
    case K::chained_e:
      return chained_value(bind(&Correlators::intensity_e), expr.L, expr.settings, expr.kind);
    case K::chsh_f:
      return chained_value(bind(&Correlators::correlation_f), expr.L, expr.settings, expr.kind);
    case K::ch_k:
      return ch_value(
          bind(&Correlators::coincidence_k),
          [&source](double a) { return source.rate_s(Side::A, a); },
          [&source](double b) { return source.rate_s(Side::B, b); }, expr.settings, expr.kind);
    case K::ch_g:
      return ch_value(
          bind(&Correlators::coincidence_g),
          [&source](double a) { return source.intensity_r(Side::A, a); },
          [&source](double b) { return source.intensity_r(Side::B, b); }, expr.settings,
          expr.kind);
    case K::chained_dist_rates:
      return chained_distance_value(bind(&Correlators::distance_rates), expr.L, expr.settings,
                                    expr.kind);
    case K::chained_dist_intensities:
      return chained_distance_value(bind(&Correlators::distance_intensities), expr.L,
                                    expr.settings, expr.kind);
  }
  throw std::logic_error("unhandled expression kind");
}

/// CH-like value of a Fock state at chain-layout settings.
inline InequalityReport ch_value(const FourModeState& state, const SettingChain& settings) {
  return evaluate({ExpressionKind::ch_k, 2, settings}, StateCorrelators(state));
}

}  // namespace bellopt
