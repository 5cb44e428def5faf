// Expectation values of intensity and rate operators on four-mode states.
//
// Every operator used here is diagonal in the rotated number basis of its
// side, so all expectations reduce to sums over the joint port distribution.
// Angles are physical analyzer angles; for singlet-type inputs the resulting
// correlators depend on δ = 2(θ − φ).

#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bellopt/fock.hpp"

namespace bellopt {

struct SettingPair {
  double theta = 0.0;  // Alice
  double phi = 0.0;    // Bob
};

/// Photon counts at the "+" and "−" analyzer outputs of one side.
struct PortOutcome {
  int n_plus = 0;
  int n_minus = 0;

  constexpr int total() const { return n_plus + n_minus; }
  constexpr auto operator<=>(const PortOutcome&) const = default;
};

using OutcomePair = std::pair<PortOutcome, PortOutcome>;
using JointDistribution = std::map<OutcomePair, double>;

/// Unprimed rate n₊/(n₊+n₋); zero when nothing arrives.
inline double port_rate(const PortOutcome& o) {
  return o.total() == 0 ? 0.0 : static_cast<double>(o.n_plus) / o.total();
}
inline double port_rate_minus(const PortOutcome& o) {
  return o.total() == 0 ? 0.0 : static_cast<double>(o.n_minus) / o.total();
}
/// Primed "+" rate: equals 1 on the local vacuum.
inline double port_rate_primed(const PortOutcome& o) {
  return o.total() == 0 ? 1.0 : static_cast<double>(o.n_plus) / o.total();
}

/// Squared amplitudes of a state whose sides are already in the analyzer bases.
inline JointDistribution port_distribution_of(const FourModeState& rotated) {
  JointDistribution dist;
  for (const auto& e : rotated.entries()) {
    const auto& o = e.occupation;
    const double p = std::norm(e.amplitude);
    if (p == 0.0) continue;
    dist[{{o.a_h, o.a_v}, {o.b_h, o.b_v}}] += p;
  }
  return dist;
}

inline JointDistribution joint_port_distribution(const FourModeState& state,
                                                 const SettingPair& settings) {
  const auto rotated =
      rotate_side(rotate_side(state, Side::A, settings.theta), Side::B, settings.phi);
  return port_distribution_of(rotated);
}

template <typename F>
double expectation(const JointDistribution& dist, F&& f) {
  double sum = 0.0;
  for (const auto& [outcome, p] : dist) sum += p * f(outcome.first, outcome.second);
  return sum;
}

/// Distribution of one side's port outcomes (other side traced out).
inline std::map<PortOutcome, double> local_port_distribution(const FourModeState& state, Side side,
                                                             double angle) {
  const auto rotated = rotate_side(state, side, angle);
  std::map<PortOutcome, double> dist;
  for (const auto& e : rotated.entries()) {
    const auto& o = e.occupation;
    const PortOutcome out = side == Side::A ? PortOutcome{o.a_h, o.a_v} : PortOutcome{o.b_h, o.b_v};
    dist[out] += std::norm(e.amplitude);
  }
  return dist;
}

inline double rate_expectation(const FourModeState& state, Side side, double angle, bool primed) {
  double sum = 0.0;
  for (const auto& [o, p] : local_port_distribution(state, side, angle)) {
    sum += p * (primed ? port_rate_primed(o) : port_rate(o));
  }
  return sum;
}

/// S_{J+}(α): expectation of the unprimed rate operator.
inline double local_rate_S(const FourModeState& state, Side side, double angle) {
  return rate_expectation(state, side, angle, false);
}

// Correlator functionals on a joint distribution. The *_of forms let callers
// reuse one distribution for several quantities.

inline double correlator_C_of(const JointDistribution& dist) {
  return expectation(dist, [](const PortOutcome& a, const PortOutcome& b) {
    return (port_rate_primed(a) - port_rate_minus(a)) * (port_rate_primed(b) - port_rate_minus(b));
  });
}
inline double correlator_F_of(const JointDistribution& dist) {
  return expectation(dist, [](const PortOutcome& a, const PortOutcome& b) {
    return (port_rate(a) - port_rate_minus(a)) * (port_rate(b) - port_rate_minus(b));
  });
}
inline double correlator_K_of(const JointDistribution& dist) {
  return expectation(dist, [](const PortOutcome& a, const PortOutcome& b) {
    return port_rate(a) * port_rate(b);
  });
}
inline double correlator_G_of(const JointDistribution& dist) {
  return expectation(dist, [](const PortOutcome& a, const PortOutcome& b) {
    return static_cast<double>(a.n_plus) * b.n_plus;
  });
}
inline double intensity_numerator_of(const JointDistribution& dist) {
  return expectation(dist, [](const PortOutcome& a, const PortOutcome& b) {
    return static_cast<double>(a.n_plus - a.n_minus) * (b.n_plus - b.n_minus);
  });
}
inline double distance_rates_of(const JointDistribution& dist) {
  return expectation(dist, [](const PortOutcome& a, const PortOutcome& b) {
    return std::abs(port_rate(a) - port_rate(b));
  });
}
inline double distance_intensities_of(const JointDistribution& dist) {
  return expectation(dist, [](const PortOutcome& a, const PortOutcome& b) {
    return static_cast<double>(std::abs(a.n_plus - b.n_plus));
  });
}

inline double correlator_C(const FourModeState& state, const SettingPair& settings) {
  return correlator_C_of(joint_port_distribution(state, settings));
}
inline double correlator_F(const FourModeState& state, const SettingPair& settings) {
  return correlator_F_of(joint_port_distribution(state, settings));
}
inline double correlator_K(const FourModeState& state, const SettingPair& settings) {
  return correlator_K_of(joint_port_distribution(state, settings));
}
inline double correlator_G_intensity(const FourModeState& state, const SettingPair& settings) {
  return correlator_G_of(joint_port_distribution(state, settings));
}
inline double distance_correlator_rates(const FourModeState& state, const SettingPair& settings) {
  return distance_rates_of(joint_port_distribution(state, settings));
}
inline double distance_correlator_intensities(const FourModeState& state,
                                              const SettingPair& settings) {
  return distance_intensities_of(joint_port_distribution(state, settings));
}

/// ⟨Î_A Î_B⟩ with total photon numbers per side (setting independent).
inline double intensity_product_expectation(const FourModeState& state) {
  double sum = 0.0;
  for (const auto& e : state.entries()) {
    sum += std::norm(e.amplitude) * e.occupation.side_total(Side::A) *
           e.occupation.side_total(Side::B);
  }
  return sum;
}

class ZeroDenominatorError : public std::domain_error {
 public:
  ZeroDenominatorError() : std::domain_error("zero intensity denominator") {}
};

/// Intensity correlation split into its numerator and normalization.
struct IntensityCorrelation {
  double numerator = 0.0;
  double denominator = 0.0;

  bool defined() const { return denominator != 0.0; }
  std::optional<double> ratio() const {
    if (!defined()) return std::nullopt;
    return numerator / denominator;
  }
  double value() const {
    if (!defined()) throw ZeroDenominatorError();
    return numerator / denominator;
  }
};

inline IntensityCorrelation correlator_E_intensity(const FourModeState& state,
                                                   const SettingPair& settings) {
  return {intensity_numerator_of(joint_port_distribution(state, settings)),
          intensity_product_expectation(state)};
}

/// r_A(θ) = ⟨Î_B Î_{A+}(θ)⟩ (side A) or r_B(φ) = ⟨Î_A Î_{B+}(φ)⟩ (side B).
inline double local_intensity_rate(const FourModeState& state, Side side, double angle) {
  const auto rotated = rotate_side(state, side, angle);
  double sum = 0.0;
  for (const auto& e : rotated.entries()) {
    const auto& o = e.occupation;
    const double plus = side == Side::A ? o.a_h : o.b_h;
    const double other_total = side == Side::A ? o.side_total(Side::B) : o.side_total(Side::A);
    sum += std::norm(e.amplitude) * plus * other_total;
  }
  return sum;
}

/// Normalized Stokes operator Π(n₊ − n₋)/(n₊ + n₋)Π; vacuum contributes 0.
inline double stokes_prime_expectation(const FourModeState& state, Side side, double angle) {
  double sum = 0.0;
  for (const auto& [o, p] : local_port_distribution(state, side, angle)) {
    if (o.total() == 0) continue;
    sum += p * static_cast<double>(o.n_plus - o.n_minus) / o.total();
  }
  return sum;
}

// Per-sector evaluation for bright squeezed vacuum.
//
// Independent of the sparse-state path: uses that |ψ⁽ⁿ⁾₋⟩ is invariant under
// equal rotations of both sides, so only side A is rotated (by θ − φ) and Bob
// reads his ports in the H/V basis. The n-pair joint distribution is then
// P(k_A, k_B) = U_n(θ−φ)[k_A, n−k_B]² / (n+1).
namespace sector {

/// Joint distribution of the n-pair component from its rotation block, row
/// k_A (Alice "+" count), column k_B (Bob "+" count).
inline std::vector<double> component_distribution(const RotationBlock& u) {
  const int n = u.photons();
  const int dim = n + 1;
  std::vector<double> p(static_cast<std::size_t>(dim) * dim);
  for (int ka = 0; ka <= n; ++ka) {
    for (int kb = 0; kb <= n; ++kb) {
      const double amp = u.element(ka, n - kb);
      p[static_cast<std::size_t>(ka) * dim + kb] = amp * amp / dim;
    }
  }
  return p;
}

inline std::vector<double> component_distribution(int n, double angle_difference) {
  return component_distribution((*rotation_blocks(angle_difference, n))[static_cast<std::size_t>(n)]);
}

/// Σ_{n≤N} w_n(Γ) Σ P_n(k_A,k_B) f(PortOutcome_A, PortOutcome_B).
template <typename F>
double bsv_expectation(const Gain& gain, int cutoff_pairs, double angle_difference, F&& f) {
  const auto blocks = rotation_blocks(angle_difference, cutoff_pairs);
  double sum = 0.0;
  for (int n = 0; n <= cutoff_pairs; ++n) {
    const double w = bsv_sector_weight(gain, n);
    if (w == 0.0) break;
    const RotationBlock& u = (*blocks)[static_cast<std::size_t>(n)];
    double inner = 0.0;
    for (int ka = 0; ka <= n; ++ka) {
      for (int kb = 0; kb <= n; ++kb) {
        const double amp = u.element(ka, n - kb);
        inner += amp * amp * f(PortOutcome{ka, n - ka}, PortOutcome{kb, n - kb});
      }
    }
    sum += w * inner / (n + 1);
  }
  return sum;
}

}  // namespace sector

}  // namespace bellopt
