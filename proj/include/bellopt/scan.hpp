// Critical-gain searches, setting optimization, and the regenerated tables
// and visibility curve.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bellopt/closed_form.hpp"
#include "bellopt/correlators.hpp"
#include "bellopt/inequalities.hpp"
#include "bellopt/parallel.hpp"

namespace bellopt {

enum class CorrelatorSource {
  closed_form,
  fock_oracle,  // explicit truncated BSV state, both sides rotated
  sector_sum,   // per-sector resummation from the angle difference
};

inline std::string to_string(CorrelatorSource s) {
  switch (s) {
    case CorrelatorSource::closed_form: return "closed_form";
    case CorrelatorSource::fock_oracle: return "fock_oracle";
    case CorrelatorSource::sector_sum: return "sector_sum";
  }
  return "?";
}

enum class SettingsStrategy {
  automatic,           // analytic optimum for A − B cos δ kinds, else descent
  fixed,               // ScanOptions::settings or the kind's default chain
  analytic_optimum,
  coordinate_descent,
};

/// Fallback cutoff policy when none is fixed.
inline constexpr double kDefaultTailTarget = 1e-10;
inline constexpr int kDefaultCutoffCap = 60;

struct ScanOptions {
  CorrelatorSource source = CorrelatorSource::closed_form;
  SettingsStrategy strategy = SettingsStrategy::automatic;
  std::optional<SettingChain> settings;  // used by SettingsStrategy::fixed
  double tolerance = 1e-3;
  double gamma_min = 0.05;  // first pre-scan point
  double gamma_max = 3.0;
  double prescan_step = 0.05;
  std::optional<int> cutoff_pairs;  // fixed truncation; otherwise by tail target
  double tail_target = kDefaultTailTarget;
  int cutoff_cap = kDefaultCutoffCap;
  int restarts = 8;
  std::uint64_t seed = 1;
};

class BracketFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline int cutoff_for(const Gain& gain, const ScanOptions& options) {
  if (options.cutoff_pairs) return *options.cutoff_pairs;
  return cutoff_for_tail(gain, options.tail_target, options.cutoff_cap);
}

inline std::unique_ptr<Correlators> make_correlators(CorrelatorSource source, const Gain& gain,
                                                     int cutoff_pairs) {
  switch (source) {
    case CorrelatorSource::closed_form: return std::make_unique<ClosedFormCorrelators>(gain);
    case CorrelatorSource::fock_oracle:
      return std::make_unique<StateCorrelators>(bsv_state(gain, cutoff_pairs));
    case CorrelatorSource::sector_sum:
      return std::make_unique<SectorCorrelators>(gain, cutoff_pairs);
  }
  throw std::logic_error("unknown correlator source");
}

/// Starting settings for a kind: the equal-spacing chain, with Bob's
/// analyzer offset by π/2 for the distance chains.
inline SettingChain default_settings_for(ExpressionKind kind, int L) {
  return is_distance_kind(kind) ? anticorrelated_chain_settings(L) : default_chain_settings(L);
}

/// Optimum of the chain for correlators of the form A − B cos δ with B ≥ 0:
/// lhs = 2(L−1)A + 2L·B·cos(π/2L).
inline SettingChain analytic_optimum_settings(int L) { return anticorrelated_chain_settings(L); }

struct SettingsOptimum {
  SettingChain settings;
  double margin = -std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

/// Coordinate descent on the violation margin over all 2L angles. Step sizes
/// shrink to 1e-4; stops when no single-angle move of the final step
/// improves. Restarts perturb the start by up to ±0.2 rad.
inline SettingsOptimum maximize_margin(const std::function<double(const SettingChain&)>& margin,
                                       const SettingChain& start, int restarts,
                                       std::uint64_t seed) {
  static constexpr double kSteps[] = {0.1, 0.03, 0.01, 0.003, 0.001, 0.0003, 0.0001};
  SettingsOptimum best;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  const int L = start.length();

  for (int run = 0; run <= restarts; ++run) {
    SettingChain x = start;
    if (run > 0) {
      for (double& t : x.thetas) t += jitter(rng);
      for (double& p : x.phis) p += jitter(rng);
    }
    double fx = margin(x);
    ++best.evaluations;
    for (double step : kSteps) {
      bool improved = true;
      while (improved) {
        improved = false;
        for (int c = 0; c < 2 * L; ++c) {
          double& angle = c < L ? x.thetas[c] : x.phis[c - L];
          for (double dir : {1.0, -1.0}) {
            const double saved = angle;
            angle = saved + dir * step;
            const double f = margin(x);
            ++best.evaluations;
            if (f > fx + 1e-14) {
              fx = f;
              improved = true;
              break;
            }
            angle = saved;
          }
        }
      }
    }
    if (fx > best.margin) {
      best.margin = fx;
      best.settings = x;
    }
  }
  return best;
}

struct MarginEvaluation {
  InequalityReport report;  // at the settings that produced the margin
  int cutoff_pairs = 0;
};

/// Violation margin at `gain`, maximized over settings per options.strategy.
inline MarginEvaluation max_margin(ExpressionKind kind, int L, const Gain& gain,
                                   const ScanOptions& options) {
  const int cutoff = cutoff_for(gain, options);
  SettingsStrategy strategy = options.strategy;
  if (strategy == SettingsStrategy::automatic) {
    strategy = is_cosine_kind(kind) ? SettingsStrategy::analytic_optimum
                                    : SettingsStrategy::coordinate_descent;
  }

  SettingChain settings;
  switch (strategy) {
    case SettingsStrategy::fixed:
      settings = options.settings ? *options.settings : default_settings_for(kind, L);
      break;
    case SettingsStrategy::analytic_optimum:
      if (!is_cosine_kind(kind)) {
        throw std::invalid_argument("no analytic optimum for " + to_string(kind));
      }
      settings = analytic_optimum_settings(L);
      break;
    case SettingsStrategy::coordinate_descent: {
      // Search on the cheapest faithful evaluator, then re-evaluate below
      // with the requested source.
      const auto search_source = options.source == CorrelatorSource::closed_form
                                     ? CorrelatorSource::closed_form
                                     : CorrelatorSource::sector_sum;
      const auto corr = make_correlators(search_source, gain, cutoff);
      const auto opt = maximize_margin(
          [&](const SettingChain& s) { return evaluate({kind, L, s}, *corr).margin; },
          options.settings ? *options.settings : default_settings_for(kind, L), options.restarts,
          options.seed);
      settings = opt.settings;
      break;
    }
    case SettingsStrategy::automatic: break;
  }

  const auto corr = make_correlators(options.source, gain, cutoff);
  MarginEvaluation out;
  out.report = evaluate({kind, L, settings}, *corr);
  out.report.gain = gain.value();
  out.report.source = to_string(options.source);
  if (options.source != CorrelatorSource::closed_form) {
    out.report.cutoff_pairs = cutoff;
    out.report.tail_weight = tail_weight(gain, cutoff);
  }
  out.cutoff_pairs = cutoff;
  return out;
}

struct CriticalGain {
  double gamma = 0.0;
  double lower = 0.0;  // last bracket end still violating
  double upper = 0.0;  // first bracket end not violating
  int margin_evaluations = 0;
  SettingChain settings;  // settings used at the lower bracket end
};

/// Smallest gain above which the maximal violation margin stops being
/// positive. A coarse pre-scan locates the first (+ → ≤ 0) sign change;
/// bisection then narrows it to `tolerance`. Throws BracketFailure when no
/// sign change exists on [gamma_min, gamma_max].
inline CriticalGain critical_gain(ExpressionKind kind, int L, const ScanOptions& options) {
  CriticalGain result;
  auto margin_at = [&](double g) {
    ++result.margin_evaluations;
    return max_margin(kind, L, Gain(g), options);
  };

  double lo = options.gamma_min;
  auto lo_eval = margin_at(lo);
  if (!(lo_eval.report.margin > 0.0)) {
    throw BracketFailure(to_string(kind) + " L=" + std::to_string(L) +
                         ": no violation at the start of the scan (gamma=" + std::to_string(lo) +
                         ")");
  }
  std::optional<double> hi;
  for (double g = lo + options.prescan_step; g <= options.gamma_max + 1e-12;
       g += options.prescan_step) {
    auto eval = margin_at(g);
    if (eval.report.margin > 0.0) {
      lo = g;
      lo_eval = std::move(eval);
    } else {
      hi = g;
      break;
    }
  }
  if (!hi) {
    throw BracketFailure(to_string(kind) + " L=" + std::to_string(L) +
                         ": violation margin never changes sign up to gamma=" +
                         std::to_string(options.gamma_max));
  }
  double upper = *hi;
  while (upper - lo > options.tolerance) {
    const double mid = 0.5 * (lo + upper);
    auto eval = margin_at(mid);
    if (eval.report.margin > 0.0) {
      lo = mid;
      lo_eval = std::move(eval);
    } else {
      upper = mid;
    }
  }
  result.lower = lo;
  result.upper = upper;
  result.gamma = 0.5 * (lo + upper);
  result.settings = lo_eval.report.settings;
  return result;
}

// ---------------------------------------------------------------------------
// Tables

/// Reference table values, used only for comparison columns.
namespace printed {
inline constexpr double kTable1ReidWalls[] = {0.491, 0.408, 0.355, 0.318, 0.290, 0.268,
                                              0.251, 0.237, 0.224, 0.214, 0.205, 0.197};
inline constexpr double kTable1Ratios[] = {1.229, 1.342, 1.372, 1.392, 1.406, 1.416,
                                           1.425, 1.431, 1.437, 1.441, 1.445, 1.448};
inline constexpr double kTable2Intensities[] = {0.915, 1.053, 1.165, 1.260, 1.345, 1.427};
inline constexpr double kTable2Rates[] = {1.123, 1.367, 1.482, 1.586, 1.687, 1.795};
}  // namespace printed

struct Table1Row {
  int L = 0;
  double reid_walls_closed = 0.0;
  double reid_walls_fock = 0.0;
  double reid_walls_printed = 0.0;
  double ratios_closed = 0.0;  // analytic-optimum settings
  double ratios_fock = 0.0;
  double ratios_printed = 0.0;
  /// Critical gain at the literal equal-spacing settings; empty when no
  /// violation occurs at any gain.
  std::optional<double> ratios_default_settings;

  double reid_walls_diff() const { return std::abs(reid_walls_closed - reid_walls_printed); }
  double ratios_two_path_diff() const { return std::abs(ratios_closed - ratios_fock); }
  double ratios_printed_diff() const { return std::abs(ratios_closed - ratios_printed); }
};

struct Table1Options {
  int min_L = 2;
  int max_L = 13;
  double tolerance = 1e-4;
  double tail_target = kDefaultTailTarget;
  bool with_fock = true;
};

inline Table1Row table1_row(int L, const Table1Options& opts) {
  Table1Row row;
  row.L = L;
  row.reid_walls_printed = printed::kTable1ReidWalls[L - 2];
  row.ratios_printed = printed::kTable1Ratios[L - 2];

  ScanOptions closed;
  closed.source = CorrelatorSource::closed_form;
  closed.strategy = SettingsStrategy::analytic_optimum;
  closed.tolerance = opts.tolerance;
  closed.tail_target = opts.tail_target;
  row.reid_walls_closed = critical_gain(ExpressionKind::chained_e, L, closed).gamma;
  row.ratios_closed = critical_gain(ExpressionKind::chained_c, L, closed).gamma;

  if (opts.with_fock) {
    ScanOptions fock = closed;
    fock.source = CorrelatorSource::fock_oracle;
    row.reid_walls_fock = critical_gain(ExpressionKind::chained_e, L, fock).gamma;
    row.ratios_fock = critical_gain(ExpressionKind::chained_c, L, fock).gamma;
  }

  ScanOptions literal = closed;
  literal.strategy = SettingsStrategy::fixed;
  literal.settings = default_chain_settings(L);
  try {
    row.ratios_default_settings = critical_gain(ExpressionKind::chained_c, L, literal).gamma;
  } catch (const BracketFailure&) {
    row.ratios_default_settings.reset();
  }
  return row;
}

inline std::vector<Table1Row> table1(const Table1Options& opts = {}) {
  if (opts.min_L < 2 || opts.max_L > 13 || opts.min_L > opts.max_L) {
    throw std::invalid_argument("table1 covers 2 <= L <= 13");
  }
  std::vector<Table1Row> rows(static_cast<std::size_t>(opts.max_L - opts.min_L + 1));
  parallel_for(rows.size(), [&](std::size_t i) {
    rows[i] = table1_row(opts.min_L + static_cast<int>(i), opts);
  });
  return rows;
}

struct Table2Entry {
  double direct = 0.0;        // critical gain, explicit Fock state
  double resummed = 0.0;      // critical gain, per-sector resummation
  double printed = 0.0;
  double lhs_path_diff = 0.0;  // |lhs_direct − lhs_resummed| at the direct critical gain

  double printed_diff() const { return std::abs(direct - printed); }
};

struct Table2Row {
  int L = 0;
  Table2Entry intensities;
  Table2Entry rates;
};

struct Table2Options {
  int cutoff_pairs = 25;
  int min_L = 2;
  int max_L = 7;
  double tolerance = 1e-4;
};

inline Table2Entry table2_entry(ExpressionKind kind, int L, const Table2Options& opts) {
  ScanOptions scan;
  scan.strategy = SettingsStrategy::fixed;
  scan.settings = default_settings_for(kind, L);
  scan.cutoff_pairs = opts.cutoff_pairs;
  scan.tolerance = opts.tolerance;

  Table2Entry entry;
  scan.source = CorrelatorSource::fock_oracle;
  entry.direct = critical_gain(kind, L, scan).gamma;
  scan.source = CorrelatorSource::sector_sum;
  entry.resummed = critical_gain(kind, L, scan).gamma;

  const Gain at(entry.direct);
  const BellExpression expr{kind, L, *scan.settings};
  const double lhs_direct =
      evaluate(expr, StateCorrelators(bsv_state(at, opts.cutoff_pairs))).lhs;
  const double lhs_resummed = evaluate(expr, SectorCorrelators(at, opts.cutoff_pairs)).lhs;
  entry.lhs_path_diff = std::abs(lhs_direct - lhs_resummed);
  return entry;
}

inline std::vector<Table2Row> table2(const Table2Options& opts = {}) {
  if (opts.min_L < 2 || opts.max_L > 7 || opts.min_L > opts.max_L) {
    throw std::invalid_argument("table2 covers 2 <= L <= 7");
  }
  const std::size_t count = static_cast<std::size_t>(opts.max_L - opts.min_L + 1);
  std::vector<Table2Row> rows(count);
  // Each (L, variant) pair is independent.
  parallel_for(2 * count, [&](std::size_t job) {
    const std::size_t i = job / 2;
    const int L = opts.min_L + static_cast<int>(i);
    rows[i].L = L;
    if (job % 2 == 0) {
      rows[i].intensities = table2_entry(ExpressionKind::chained_dist_intensities, L, opts);
      rows[i].intensities.printed = printed::kTable2Intensities[L - 2];
    } else {
      rows[i].rates = table2_entry(ExpressionKind::chained_dist_rates, L, opts);
      rows[i].rates.printed = printed::kTable2Rates[L - 2];
    }
  });
  return rows;
}

struct VisibilityRow {
  double gamma;
  double v_new;
  double v_old;
  double chsh_threshold;  // 1/√2
};

inline std::vector<VisibilityRow> visibility_curve(const std::vector<double>& gammas) {
  std::vector<VisibilityRow> rows;
  rows.reserve(gammas.size());
  for (double g : gammas) {
    const Gain gain(g);
    rows.push_back({g, closed_form::visibility_new(gain), closed_form::visibility_old(gain),
                    1.0 / std::numbers::sqrt2});
  }
  return rows;
}

/// 0, step, 2·step, …, up to and including `max` (within round-off).
inline std::vector<double> gamma_grid(double step, double max) {
  if (!(step > 0.0) || max < 0.0) throw std::invalid_argument("grid needs step > 0 and max >= 0");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor(max / step + 1e-9));
  for (long i = 0; i <= count; ++i) grid.push_back(static_cast<double>(i) * step);
  return grid;
}

}  // namespace bellopt
