// Uniform access to two-setting correlators and local averages, so Bell
// expressions can be assembled identically from a Fock state, the BSV
// per-sector sum, the closed forms, or a hidden-variable model.

#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "bellopt/closed_form.hpp"
#include "bellopt/fock.hpp"
#include "bellopt/observables.hpp"

namespace bellopt {

class UnsupportedCorrelator : public std::logic_error {
 public:
  explicit UnsupportedCorrelator(const std::string& what)
      : std::logic_error(what + " is not available from this source") {}
};

/// Every method takes physical analyzer angles. Implementations may cache
/// and are not required to be thread-safe.
class Correlators {
 public:
  virtual ~Correlators() = default;

  virtual double correlation_c(double /*theta*/, double /*phi*/) const { unsupported("C"); }
  virtual double correlation_f(double /*theta*/, double /*phi*/) const { unsupported("F"); }
  virtual double coincidence_k(double /*theta*/, double /*phi*/) const { unsupported("K"); }
  /// Reid–Walls E; throws ZeroDenominatorError when ⟨I_A I_B⟩ = 0.
  virtual double intensity_e(double /*theta*/, double /*phi*/) const { unsupported("E"); }
  virtual double coincidence_g(double /*theta*/, double /*phi*/) const { unsupported("G"); }
  virtual double distance_rates(double /*theta*/, double /*phi*/) const { unsupported("rate distance"); }
  virtual double distance_intensities(double /*theta*/, double /*phi*/) const {
    unsupported("intensity distance");
  }
  virtual double rate_s(Side /*side*/, double /*angle*/) const { unsupported("S"); }
  virtual double intensity_r(Side /*side*/, double /*angle*/) const { unsupported("r"); }

 protected:
  [[noreturn]] static void unsupported(const std::string& name) {
    throw UnsupportedCorrelator(name);
  }
};

/// Brute-force evaluation on an explicit truncated Fock state.
class StateCorrelators final : public Correlators {
 public:
  explicit StateCorrelators(FourModeState state)
      : state_(std::move(state)), intensity_product_(intensity_product_expectation(state_)) {}

  const FourModeState& state() const { return state_; }

  const JointDistribution& distribution(double theta, double phi) const {
    const auto key = std::make_pair(detail::angle_key(theta), detail::angle_key(phi));
    auto it = joint_.find(key);
    if (it != joint_.end()) return it->second;
    auto rotated = rotate_side(rotated_a(theta), Side::B, phi);
    return joint_.emplace(key, port_distribution_of(rotated)).first->second;
  }

  double correlation_c(double t, double p) const override { return correlator_C_of(distribution(t, p)); }
  double correlation_f(double t, double p) const override { return correlator_F_of(distribution(t, p)); }
  double coincidence_k(double t, double p) const override { return correlator_K_of(distribution(t, p)); }
  double coincidence_g(double t, double p) const override { return correlator_G_of(distribution(t, p)); }
  double intensity_e(double t, double p) const override {
    return IntensityCorrelation{intensity_numerator_of(distribution(t, p)), intensity_product_}.value();
  }
  double distance_rates(double t, double p) const override { return distance_rates_of(distribution(t, p)); }
  double distance_intensities(double t, double p) const override {
    return distance_intensities_of(distribution(t, p));
  }
  double rate_s(Side side, double angle) const override { return local_rate_S(state_, side, angle); }
  double intensity_r(Side side, double angle) const override {
    return local_intensity_rate(state_, side, angle);
  }

 private:
  const FourModeState& rotated_a(double theta) const {
    const auto key = detail::angle_key(theta);
    auto it = rotated_a_.find(key);
    if (it != rotated_a_.end()) return it->second;
    return rotated_a_.emplace(key, rotate_side(state_, Side::A, theta)).first->second;
  }

  FourModeState state_;
  double intensity_product_;
  mutable std::map<std::uint64_t, FourModeState> rotated_a_;
  mutable std::map<std::pair<std::uint64_t, std::uint64_t>, JointDistribution> joint_;
};

/// BSV evaluated sector by sector from the angle difference alone.
class SectorCorrelators final : public Correlators {
 public:
  SectorCorrelators(Gain gain, int cutoff_pairs) : gain_(gain), cutoff_(cutoff_pairs) {
    for (int n = 0; n <= cutoff_; ++n) {
      const double w = bsv_sector_weight(gain_, n);
      intensity_product_ += w * n * n;
      nonvacuum_weight_ += n > 0 ? w : 0.0;
    }
  }

  double correlation_c(double t, double p) const override {
    return eval(t, p, [](const PortOutcome& a, const PortOutcome& b) {
      return (port_rate_primed(a) - port_rate_minus(a)) * (port_rate_primed(b) - port_rate_minus(b));
    });
  }
  double correlation_f(double t, double p) const override {
    return eval(t, p, [](const PortOutcome& a, const PortOutcome& b) {
      return (port_rate(a) - port_rate_minus(a)) * (port_rate(b) - port_rate_minus(b));
    });
  }
  double coincidence_k(double t, double p) const override {
    return eval(t, p, [](const PortOutcome& a, const PortOutcome& b) {
      return port_rate(a) * port_rate(b);
    });
  }
  double coincidence_g(double t, double p) const override {
    return eval(t, p, [](const PortOutcome& a, const PortOutcome& b) {
      return static_cast<double>(a.n_plus) * b.n_plus;
    });
  }
  double intensity_e(double t, double p) const override {
    const double num = eval(t, p, [](const PortOutcome& a, const PortOutcome& b) {
      return static_cast<double>(a.n_plus - a.n_minus) * (b.n_plus - b.n_minus);
    });
    return IntensityCorrelation{num, intensity_product_}.value();
  }
  double distance_rates(double t, double p) const override {
    return eval(t, p, [](const PortOutcome& a, const PortOutcome& b) {
      return std::abs(port_rate(a) - port_rate(b));
    });
  }
  double distance_intensities(double t, double p) const override {
    return eval(t, p, [](const PortOutcome& a, const PortOutcome& b) {
      return static_cast<double>(std::abs(a.n_plus - b.n_plus));
    });
  }
  // Each side's marginal is unpolarized: every non-vacuum sector has mean rate ½.
  double rate_s(Side, double) const override { return 0.5 * nonvacuum_weight_; }
  double intensity_r(Side, double) const override { return 0.5 * intensity_product_; }

 private:
  template <typename F>
  double eval(double theta, double phi, F&& f) const {
    return sector::bsv_expectation(gain_, cutoff_, theta - phi, std::forward<F>(f));
  }

  Gain gain_;
  int cutoff_;
  double intensity_product_ = 0.0;
  double nonvacuum_weight_ = 0.0;
};

/// Analytic BSV correlators (no truncation). δ = 2(θ − φ).
class ClosedFormCorrelators final : public Correlators {
 public:
  explicit ClosedFormCorrelators(Gain gain) : gain_(gain) {}

  double correlation_c(double t, double p) const override {
    return closed_form::c_closed(gain_, 2.0 * (t - p));
  }
  double coincidence_k(double t, double p) const override {
    return closed_form::k_closed(gain_, 2.0 * (t - p));
  }
  double intensity_e(double t, double p) const override {
    if (closed_form::intensity_product_mean(gain_) == 0.0) throw ZeroDenominatorError();
    return closed_form::e_correlation(gain_, 2.0 * (t - p));
  }
  double rate_s(Side, double) const override { return closed_form::s_closed(gain_); }

 private:
  Gain gain_;
};

}  // namespace bellopt
