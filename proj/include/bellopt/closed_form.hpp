// Analytic correlators for bright squeezed vacuum as functions of the gain Γ
// and the correlation angle δ (δ = 2(θ − φ) in physical analyzer angles).

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bellopt/fock.hpp"

namespace bellopt::closed_form {

namespace detail {

// ln cosh Γ, stable for large Γ.
inline double log_cosh(double g) {
  if (g < 1.0) {
    const double sh = std::sinh(0.5 * g);
    return std::log1p(2.0 * sh * sh);
  }
  return g + std::log1p(std::exp(-2.0 * g)) - std::numbers::ln2;
}
inline double sech4(double g) { return bellopt::detail::sech_fourth(g); }
inline double tanh2(double g) { return bellopt::detail::tanh_squared(g); }

// Σ_{n≥1} (n+1) x^n (n+2)/(3n) divided by cosh⁴Γ, i.e. the −cos δ
// coefficient of C. Written as (1/3)[4 ln coshΓ / cosh⁴Γ + (1 + 3/cosh²Γ) tanh²Γ].
inline double c_cosine_coefficient(double g) {
  const double s4 = sech4(g);
  return (4.0 * log_cosh(g) * s4 + (1.0 + 3.0 * std::sqrt(s4)) * tanh2(g)) / 3.0;
}

}  // namespace detail

/// Numerator ⟨(I_{A+}−I_{A−})(I_{B+}−I_{B−})⟩ = −2cosh²Γ sinh²Γ cos δ.
inline double e_numerator(const Gain& gain, double delta) {
  const double g = gain.value();
  const double sc = std::sinh(g) * std::cosh(g);
  return -2.0 * sc * sc * std::cos(delta);
}

/// ⟨I_A I_B⟩ = 5/4 − 2cosh2Γ + ¾cosh4Γ, evaluated as 2sinh²Γcosh²Γ + 4sinh⁴Γ.
/// `as_printed` adds the reference variant's extra cosh⁴Γ term, which gives
/// 1 instead of 0 on the vacuum.
inline double intensity_product_mean(const Gain& gain, bool as_printed = false) {
  const double g = gain.value();
  const double s2 = std::sinh(g) * std::sinh(g);
  const double c2 = std::cosh(g) * std::cosh(g);
  const double value = 2.0 * s2 * c2 + 4.0 * s2 * s2;
  return as_printed ? value + c2 * c2 : value;
}

/// Reid–Walls correlation E = numerator / ⟨I_A I_B⟩; undefined at Γ = 0.
inline double e_correlation(const Gain& gain, double delta) {
  const double den = intensity_product_mean(gain);
  if (den == 0.0) throw std::domain_error("zero intensity denominator");
  // Ratio simplifies to −cos δ / (1 + 2 tanh²Γ).
  return -std::cos(delta) / (1.0 + 2.0 * detail::tanh2(gain.value()));
}

/// C(δ) = (1/cosh⁴Γ)[1 − (cos δ/3)(4 ln coshΓ + (3 + cosh²Γ) sinh²Γ)].
inline double c_closed(const Gain& gain, double delta) {
  const double g = gain.value();
  return detail::sech4(g) - std::cos(delta) * detail::c_cosine_coefficient(g);
}

/// Constant and −cos δ coefficient of c_closed: C = A − B cos δ.
struct CosineForm {
  double constant;
  double cosine;  // B in A − B cos δ
};

inline CosineForm c_cosine_form(const Gain& gain) {
  return {detail::sech4(gain.value()), detail::c_cosine_coefficient(gain.value())};
}

/// K(δ) = ¼(1 − cosh⁻⁴Γ) − cos δ/(96cosh⁴Γ)(−13 + 12cosh2Γ + cosh4Γ + 32 ln coshΓ).
///
/// The as-printed variant has the opposite sign on the cosine term and
/// 8 ln coshΓ in place of 32 ln coshΓ; it does not match the n = 1 singlet
/// (K = (1 − cos δ)/4) and is kept only for comparison.
inline double k_closed(const Gain& gain, double delta, bool as_printed = false) {
  const double g = gain.value();
  const double s4 = detail::sech4(g);
  if (as_printed) {
    const double bracket =
        -13.0 + 12.0 * std::cosh(2.0 * g) + std::cosh(4.0 * g) + 8.0 * detail::log_cosh(g);
    return 0.25 * (1.0 - s4) + std::cos(delta) * s4 * bracket / 96.0;
  }
  // The bracket over 96cosh⁴Γ equals c_cosine_coefficient / 4.
  return 0.25 * (1.0 - s4) - std::cos(delta) * detail::c_cosine_coefficient(g) / 4.0;
}

/// S_{J+} = ½(1 − cosh⁻⁴Γ): every non-vacuum sector has mean rate ½.
inline double s_closed(const Gain& gain) { return 0.5 * (1.0 - detail::sech4(gain.value())); }

/// −(n+2)/(3n): cosine amplitude of C on the n-pair component.
inline double per_n_ratio_coeff(int n) {
  if (n < 1) throw std::invalid_argument("ratio coefficient needs n >= 1");
  return -(n + 2.0) / (3.0 * n);
}

/// (2n + n²)/3: cosine amplitude of the intensity numerator on the n-pair component.
inline double per_n_intensity_coeff(int n) {
  if (n < 1) throw std::invalid_argument("intensity coefficient needs n >= 1");
  return (2.0 * n + static_cast<double>(n) * n) / 3.0;
}

/// Visibility of K: (3 + cosh²Γ + 4 ln coshΓ / sinh²Γ) / (3 + 3cosh²Γ).
/// The as-printed variant subtracts the logarithmic term.
inline double visibility_new(const Gain& gain, bool as_printed = false) {
  const double g = gain.value();
  const double c2 = std::cosh(g) * std::cosh(g);
  // ln coshΓ / sinh²Γ → 1/2 as Γ → 0.
  double log_ratio = 0.5;
  if (g > 1e-4) {
    const double s = std::sinh(g);
    log_ratio = detail::log_cosh(g) / (s * s);
  } else {
    log_ratio = 0.5 - g * g / 4.0;
  }
  const double sign = as_printed ? -1.0 : 1.0;
  return (3.0 + c2 + sign * 4.0 * log_ratio) / (3.0 + 3.0 * c2);
}

/// Visibility of the intensity coincidence G: 1/(1 + 2 tanh²Γ).
inline double visibility_old(const Gain& gain) {
  return 1.0 / (1.0 + 2.0 * detail::tanh2(gain.value()));
}

}  // namespace bellopt::closed_form
