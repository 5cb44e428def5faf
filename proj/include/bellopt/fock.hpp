// Four-mode bosonic Fock space: sparse states, bright squeezed vacuum,
// and passive polarization rotations.
//
// Modes are ordered (a_H, a_V, b_H, b_V). After rotate_side(state, A, θ)
// the side-A slots hold occupations of (a_θ, a_θ⊥), i.e. the "+" and "−"
// analyzer ports.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bellopt {

using Amplitude = std::complex<double>;

enum class Side { A, B };

inline const char* to_string(Side side) { return side == Side::A ? "A" : "B"; }

struct Occupation {
  int a_h = 0;
  int a_v = 0;
  int b_h = 0;
  int b_v = 0;

  constexpr int side_total(Side side) const {
    return side == Side::A ? a_h + a_v : b_h + b_v;
  }
  constexpr bool valid() const {
    return a_h >= 0 && a_v >= 0 && b_h >= 0 && b_v >= 0;
  }
  constexpr auto operator<=>(const Occupation&) const = default;
};

/// Amplification gain Γ of the squeezed vacuum; non-negative and finite.
class Gain {
 public:
  explicit Gain(double gamma) : gamma_(gamma) {
    if (!std::isfinite(gamma) || gamma < 0.0) {
      throw std::invalid_argument("gain must be finite and non-negative, got " +
                                  std::to_string(gamma));
    }
  }
  double value() const { return gamma_; }

 private:
  double gamma_;
};

/// Sparse state over four-mode occupations, stored as a sorted flat map.
/// Immutable once built.
class FourModeState {
 public:
  struct Entry {
    Occupation occupation;
    Amplitude amplitude;
  };

  FourModeState() = default;

  /// Entries may arrive in any order; duplicates are summed.
  FourModeState(std::vector<Entry> entries, int cutoff_pairs)
      : entries_(std::move(entries)), cutoff_pairs_(cutoff_pairs) {
    if (cutoff_pairs < 0) throw std::invalid_argument("cutoff_pairs must be >= 0");
    for (const auto& e : entries_) {
      if (!e.occupation.valid()) {
        throw std::invalid_argument("occupation counts must be non-negative");
      }
    }
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& x, const Entry& y) { return x.occupation < y.occupation; });
    std::vector<Entry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
      if (!merged.empty() && merged.back().occupation == e.occupation) {
        merged.back().amplitude += e.amplitude;
      } else {
        merged.push_back(e);
      }
    }
    entries_ = std::move(merged);
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  int cutoff_pairs() const { return cutoff_pairs_; }

  Amplitude amplitude(const Occupation& occ) const {
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), occ,
        [](const Entry& e, const Occupation& o) { return e.occupation < o; });
    if (it != entries_.end() && it->occupation == occ) return it->amplitude;
    return {};
  }

  double norm_squared() const {
    double sum = 0.0;
    for (const auto& e : entries_) sum += std::norm(e.amplitude);
    return sum;
  }

  /// Largest photon number found on either side.
  int max_side_photons() const {
    int m = 0;
    for (const auto& e : entries_) {
      m = std::max({m, e.occupation.side_total(Side::A), e.occupation.side_total(Side::B)});
    }
    return m;
  }

 private:
  std::vector<Entry> entries_;
  int cutoff_pairs_ = 0;
};

inline Amplitude inner_product(const FourModeState& lhs, const FourModeState& rhs) {
  Amplitude sum{};
  const auto& x = lhs.entries();
  const auto& y = rhs.entries();
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i].occupation < y[j].occupation) {
      ++i;
    } else if (y[j].occupation < x[i].occupation) {
      ++j;
    } else {
      sum += std::conj(x[i].amplitude) * y[j].amplitude;
      ++i;
      ++j;
    }
  }
  return sum;
}

/// |ψ⁽ⁿ⁾₋⟩ = (n+1)^{-1/2} Σ_m (−1)^m |n−m, m⟩_a |m, n−m⟩_b.
inline FourModeState bsv_component(int n) {
  if (n < 0) throw std::invalid_argument("pair number must be >= 0");
  std::vector<FourModeState::Entry> entries;
  entries.reserve(static_cast<std::size_t>(n) + 1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n + 1));
  for (int m = 0; m <= n; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    entries.push_back({{n - m, m, m, n - m}, Amplitude(sign * scale, 0.0)});
  }
  return FourModeState(std::move(entries), n);
}

namespace detail {

// tanh²Γ and 1/cosh⁴Γ without overflow for large Γ.
inline double tanh_squared(double gamma) {
  const double t = std::tanh(gamma);
  return t * t;
}
inline double sech_fourth(double gamma) {
  if (gamma < 20.0) {
    const double c = std::cosh(gamma);
    return 1.0 / (c * c * c * c);
  }
  const double e = std::exp(-2.0 * gamma);
  return 16.0 * e * e / std::pow(1.0 + e, 4);
}

}  // namespace detail

/// Probability weight (n+1) tanh²ⁿΓ / cosh⁴Γ of the n-pair sector.
inline double bsv_sector_weight(const Gain& gain, int n) {
  if (n < 0) throw std::invalid_argument("pair number must be >= 0");
  const double x = detail::tanh_squared(gain.value());
  if (n == 0) return detail::sech_fourth(gain.value());
  return (n + 1) * std::pow(x, n) * detail::sech_fourth(gain.value());
}

/// Probability discarded by truncating the pair expansion after N pairs:
/// x^{N+1} ((N+2) − (N+1) x) with x = tanh²Γ.
inline double tail_weight(const Gain& gain, int cutoff_pairs) {
  if (cutoff_pairs < 0) throw std::invalid_argument("cutoff_pairs must be >= 0");
  const double x = detail::tanh_squared(gain.value());
  if (x == 0.0) return 0.0;
  const double n = cutoff_pairs;
  return std::pow(x, n + 1.0) * ((n + 2.0) - (n + 1.0) * x);
}

/// Smallest N with tail_weight(gain, N) < tolerance, clamped to max_pairs.
inline int cutoff_for_tail(const Gain& gain, double tolerance, int max_pairs) {
  for (int n = 0; n < max_pairs; ++n) {
    if (tail_weight(gain, n) < tolerance) return n;
  }
  return max_pairs;
}

inline FourModeState bsv_state(const Gain& gain, int cutoff_pairs) {
  if (cutoff_pairs < 0) throw std::invalid_argument("cutoff_pairs must be >= 0");
  std::vector<FourModeState::Entry> entries;
  entries.reserve(static_cast<std::size_t>(cutoff_pairs + 1) * (cutoff_pairs + 2) / 2);
  const double t = std::tanh(gain.value());
  const double c2inv = std::sqrt(detail::sech_fourth(gain.value()));
  double t_pow = 1.0;
  for (int n = 0; n <= cutoff_pairs; ++n) {
    // (1/cosh²Γ) √(n+1) tanhⁿΓ times the 1/√(n+1) of the component.
    const double coeff = c2inv * t_pow;
    if (coeff != 0.0) {
      for (int m = 0; m <= n; ++m) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        entries.push_back({{n - m, m, m, n - m}, Amplitude(sign * coeff, 0.0)});
      }
    }
    t_pow *= t;
  }
  return FourModeState(std::move(entries), cutoff_pairs);
}

/// Rotation of n photons across two modes. element(k, p) is the amplitude of
/// |k, n−k⟩ in the rotated (+, −) basis for input |p, n−p⟩ in (H, V).
class RotationBlock {
 public:
  RotationBlock(int n, std::vector<double> data) : n_(n), data_(std::move(data)) {}
  int photons() const { return n_; }
  int dim() const { return n_ + 1; }
  double element(int k, int p) const { return data_[static_cast<std::size_t>(k) * dim() + p]; }

 private:
  int n_;
  std::vector<double> data_;
};

/// All blocks 0..max_photons for one angle, built by the recursion
/// |p,q⟩ = a_H†|p−1,q⟩/√p (or a_V†|0,q−1⟩/√q) with
/// a_H† = cosθ a_θ† − sinθ a_θ⊥† and a_V† = sinθ a_θ† + cosθ a_θ⊥†.
inline std::vector<RotationBlock> compute_rotation_blocks(double angle, int max_photons) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  std::vector<RotationBlock> blocks;
  blocks.reserve(static_cast<std::size_t>(max_photons) + 1);
  blocks.emplace_back(0, std::vector<double>{1.0});
  for (int n = 1; n <= max_photons; ++n) {
    const RotationBlock& prev = blocks.back();
    const int dim = n + 1;
    std::vector<double> data(static_cast<std::size_t>(dim) * dim, 0.0);
    auto at = [&](int k, int p) -> double& { return data[static_cast<std::size_t>(k) * dim + p]; };
    for (int p = 0; p <= n; ++p) {
      // Input |p, n−p⟩ built from |p−1, n−p⟩ with a_H† when p ≥ 1,
      // else from |0, n−1⟩ with a_V†.
      const bool use_h = p >= 1;
      const int src_p = use_h ? p - 1 : 0;
      const double norm = 1.0 / std::sqrt(static_cast<double>(use_h ? p : n));
      const double plus_coeff = use_h ? c : s;
      const double minus_coeff = use_h ? -s : c;
      for (int k = 0; k <= n - 1; ++k) {
        const double v = prev.element(k, src_p);
        if (v == 0.0) continue;
        // a_θ† |k, n−1−k⟩ = √(k+1) |k+1, n−1−k⟩
        at(k + 1, p) += norm * plus_coeff * std::sqrt(static_cast<double>(k + 1)) * v;
        // a_θ⊥† |k, n−1−k⟩ = √(n−k) |k, n−k⟩
        at(k, p) += norm * minus_coeff * std::sqrt(static_cast<double>(n - k)) * v;
      }
    }
    blocks.emplace_back(n, std::move(data));
  }
  return blocks;
}

namespace detail {

inline std::uint64_t angle_key(double angle) {
  std::uint64_t bits;
  if (angle == 0.0) angle = 0.0;  // fold -0.0
  std::memcpy(&bits, &angle, sizeof bits);
  return bits;
}

// Process-wide block cache keyed by exact angle bits. Entries only grow
// (larger photon numbers); the cache is flushed when it gets large.
class RotationCache {
 public:
  using Blocks = std::shared_ptr<const std::vector<RotationBlock>>;

  Blocks get(double angle, int max_photons) {
    const auto key = angle_key(angle);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end() && static_cast<int>(it->second->size()) > max_photons) {
        return it->second;
      }
    }
    auto blocks = std::make_shared<const std::vector<RotationBlock>>(
        compute_rotation_blocks(angle, max_photons));
    std::lock_guard<std::mutex> lock(mutex_);
    if (cache_.size() >= kMaxEntries) cache_.clear();
    auto& slot = cache_[key];
    if (!slot || slot->size() < blocks->size()) slot = blocks;
    return slot;
  }

  static RotationCache& instance() {
    static RotationCache cache;
    return cache;
  }

 private:
  static constexpr std::size_t kMaxEntries = 4096;
  std::mutex mutex_;
  std::map<std::uint64_t, Blocks> cache_;
};

}  // namespace detail

inline detail::RotationCache::Blocks rotation_blocks(double angle, int max_photons) {
  return detail::RotationCache::instance().get(angle, max_photons);
}

/// Amplitudes smaller than this are dropped after a rotation.
inline constexpr double kPruneThreshold = 1e-15;

/// Re-expresses one side of the state in the analyzer basis rotated by
/// `angle` (radians, physical polarizer angle).
inline FourModeState rotate_side(const FourModeState& state, Side side, double angle) {
  if (state.empty()) return state;
  const auto blocks = rotation_blocks(angle, state.max_side_photons());

  // Group entries by (other-side occupation, photon number on this side)
  // so each group is one dense vector acted on by one block.
  struct Keyed {
    int other_h, other_v, n, p;
    Amplitude amp;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(state.size());
  for (const auto& e : state.entries()) {
    const auto& o = e.occupation;
    if (side == Side::A) {
      keyed.push_back({o.b_h, o.b_v, o.a_h + o.a_v, o.a_h, e.amplitude});
    } else {
      keyed.push_back({o.a_h, o.a_v, o.b_h + o.b_v, o.b_h, e.amplitude});
    }
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& x, const Keyed& y) {
    return std::tie(x.other_h, x.other_v, x.n, x.p) < std::tie(y.other_h, y.other_v, y.n, y.p);
  });

  std::vector<FourModeState::Entry> out;
  out.reserve(state.size() * 4);
  std::vector<Amplitude> input;
  std::size_t i = 0;
  while (i < keyed.size()) {
    std::size_t j = i;
    const auto& head = keyed[i];
    while (j < keyed.size() && keyed[j].other_h == head.other_h &&
           keyed[j].other_v == head.other_v && keyed[j].n == head.n) {
      ++j;
    }
    const int n = head.n;
    const RotationBlock& block = (*blocks)[static_cast<std::size_t>(n)];
    input.assign(static_cast<std::size_t>(n) + 1, Amplitude{});
    for (std::size_t q = i; q < j; ++q) input[static_cast<std::size_t>(keyed[q].p)] += keyed[q].amp;
    for (int k = 0; k <= n; ++k) {
      Amplitude acc{};
      for (int p = 0; p <= n; ++p) {
        const Amplitude& v = input[static_cast<std::size_t>(p)];
        if (v != Amplitude{}) acc += block.element(k, p) * v;
      }
      if (std::abs(acc) < kPruneThreshold) continue;
      Occupation occ = side == Side::A ? Occupation{k, n - k, head.other_h, head.other_v}
                                       : Occupation{head.other_h, head.other_v, k, n - k};
      out.push_back({occ, acc});
    }
    i = j;
  }
  return FourModeState(std::move(out), state.cutoff_pairs());
}

}  // namespace bellopt
