// bellopt: command-line front end for state construction, correlators,
// inequality reports, critical-gain tables, visibility data, LHV fuzzing and
// the loophole model.
//
// Exit codes: 0 success (a violation is a result), 1 unexpected failure,
// 2 invalid flags or arguments, 3 critical-gain bracket failure.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bellopt/bellopt.hpp"
#include "bellopt/report.hpp"

namespace {

using namespace bellopt;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBracket = 3;

/// Invalid argument detected after parsing; reported like a parse error.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputOptions {
  std::string format = "csv";
  std::string out;
};

void add_output_flags(CLI::App* cmd, OutputOptions& o) {
  cmd->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", o.out, "Write output to this file instead of stdout");
}

/// Runs `emit` against the requested destination.
void with_output(const OutputOptions& o, const std::function<void(std::ostream&)>& emit) {
  if (o.out.empty()) {
    emit(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) throw UsageError("--out: cannot open " + o.out + " for writing");
  emit(file);
  if (!file) throw std::runtime_error("failed writing " + o.out);
}

void write_table(const OutputOptions& o, const report::Table& table) {
  with_output(o, [&](std::ostream& os) {
    if (o.format == "json") {
      report::write_json(os, table);
    } else {
      report::write_csv(os, table);
    }
  });
}

/// "auto" or a non-negative pair count.
struct CutoffFlag {
  std::string text = "auto";

  std::optional<int> fixed() const {
    if (text == "auto") return std::nullopt;
    return std::stoi(text);
  }
  int resolve(const Gain& gain) const {
    if (const auto n = fixed()) return *n;
    return cutoff_for_tail(gain, kDefaultTailTarget, kDefaultCutoffCap);
  }
};

const CLI::Validator kCutoffValidator(
    [](std::string& value) -> std::string {
      if (value == "auto") return {};
      try {
        std::size_t used = 0;
        const long n = std::stol(value, &used);
        if (used == value.size() && n >= 0 && n <= 400) return {};
      } catch (const std::exception&) {
      }
      return "expected 'auto' or an integer in [0, 400], got '" + value + "'";
    },
    "auto|INT");

const CLI::Validator kNonNegative(
    [](std::string& value) -> std::string {
      try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size() && std::isfinite(v) && v >= 0.0) return {};
      } catch (const std::exception&) {
      }
      return "must be a finite number >= 0, got '" + value + "'";
    },
    "NONNEGATIVE");

const CLI::Validator kPositive(
    [](std::string& value) -> std::string {
      try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size() && std::isfinite(v) && v > 0.0) return {};
      } catch (const std::exception&) {
      }
      return "must be a finite number > 0, got '" + value + "'";
    },
    "POSITIVE");

double to_radians(double angle, bool degrees) { return degrees ? angle * std::numbers::pi / 180.0 : angle; }

std::vector<double> to_radians(std::vector<double> angles, bool degrees) {
  for (double& a : angles) a = to_radians(a, degrees);
  return angles;
}

CorrelatorSource parse_source(const std::string& s) {
  if (s == "closed") return CorrelatorSource::closed_form;
  if (s == "sector") return CorrelatorSource::sector_sum;
  return CorrelatorSource::fock_oracle;
}

void add_source_flag(CLI::App* cmd, std::string& source) {
  cmd->add_option("--source", source, "Correlator source")
      ->check(CLI::IsMember({"fock", "sector", "closed"}))
      ->capture_default_str();
}

report::Table single_report_table(InequalityReport r) { return report::inequality_table({std::move(r)}); }

InequalityReport scan_report(ExpressionKind kind, int L, double gamma, const std::string& source,
                             const CutoffFlag& cutoff, std::optional<SettingChain> settings,
                             bool optimal) {
  ScanOptions options;
  options.source = parse_source(source);
  options.cutoff_pairs = cutoff.fixed();
  options.strategy = optimal ? SettingsStrategy::automatic : SettingsStrategy::fixed;
  options.settings = std::move(settings);
  if (optimal) options.settings.reset();
  return max_margin(kind, L, Gain(gamma), options).report;
}

// ---------------------------------------------------------------------------
// Subcommands

struct StateArgs {
  double gamma = 0.0;
  CutoffFlag cutoff;
  OutputOptions out;
};

void run_state(const StateArgs& a) {
  const Gain gain(a.gamma);
  const int N = a.cutoff.resolve(gain);
  const double tail = tail_weight(gain, N);
  report::Table t;
  t.columns = {"gain", "cutoff_pairs", "tail_weight", "n", "weight"};
  for (int n = 0; n <= N; ++n) {
    const double w = bsv_sector_weight(gain, n);
    if (w == 0.0) continue;
    t.rows.push_back({a.gamma, static_cast<long long>(N), tail, static_cast<long long>(n), w});
  }
  write_table(a.out, t);
}

struct CorrelateArgs {
  std::string kind;
  double gamma = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  std::string side = "A";
  bool degrees = false;
  CutoffFlag cutoff;
  std::string out;
};

void run_correlate(const CorrelateArgs& a) {
  const Gain gain(a.gamma);
  const int N = a.cutoff.resolve(gain);
  const double theta = to_radians(a.theta, a.degrees);
  const double phi = to_radians(a.phi, a.degrees);
  const StateCorrelators src(bsv_state(gain, N));

  nlohmann::json j;
  j["schema_version"] = report::kSchemaVersion;
  j["kind"] = a.kind;
  j["gain"] = a.gamma;
  j["theta"] = theta;
  j["phi"] = phi;
  j["cutoff_pairs"] = N;
  j["tail_weight"] = tail_weight(gain, N);
  try {
    double value = 0.0;
    if (a.kind == "E") {
      value = src.intensity_e(theta, phi);
    } else if (a.kind == "C") {
      value = src.correlation_c(theta, phi);
    } else if (a.kind == "F") {
      value = src.correlation_f(theta, phi);
    } else if (a.kind == "K") {
      value = src.coincidence_k(theta, phi);
    } else if (a.kind == "G") {
      value = src.coincidence_g(theta, phi);
    } else if (a.kind == "dist-rates") {
      value = src.distance_rates(theta, phi);
    } else if (a.kind == "dist-int") {
      value = src.distance_intensities(theta, phi);
    } else {  // stokes
      const Side side = a.side == "A" ? Side::A : Side::B;
      j["side"] = a.side;
      value = stokes_prime_expectation(src.state(), side, side == Side::A ? theta : phi);
    }
    j["value"] = value;
  } catch (const ZeroDenominatorError& e) {
    j["value"] = nullptr;
    j["error"] = e.what();
  }
  with_output({"json", a.out}, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

struct TwoSettingArgs {
  std::string correlator;
  double gamma = 0.0;
  bool optimal = false;
  std::vector<double> angles;  // θ θ′ φ φ′
  bool degrees = false;
  std::string source = "fock";
  CutoffFlag cutoff;
  OutputOptions out;
};

std::optional<SettingChain> two_setting_chain(const TwoSettingArgs& a) {
  if (a.angles.empty()) return std::nullopt;
  const auto r = to_radians(a.angles, a.degrees);
  return chsh_settings(r[0], r[1], r[2], r[3]);
}

void run_chsh(const TwoSettingArgs& a) {
  const ExpressionKind kind = a.correlator == "E"   ? ExpressionKind::chsh_e
                              : a.correlator == "F" ? ExpressionKind::chsh_f
                                                    : ExpressionKind::chsh_c;
  const auto settings = two_setting_chain(a);
  write_table(a.out, single_report_table(scan_report(kind, 2, a.gamma, a.source, a.cutoff,
                                                     settings ? settings : default_chain_settings(2),
                                                     a.optimal)));
}

void run_ch(const TwoSettingArgs& a) {
  const ExpressionKind kind = a.correlator == "G" ? ExpressionKind::ch_g : ExpressionKind::ch_k;
  const auto settings = two_setting_chain(a);
  write_table(a.out, single_report_table(scan_report(kind, 2, a.gamma, a.source, a.cutoff,
                                                     settings ? settings : default_chain_settings(2),
                                                     a.optimal)));
}

struct ChainedArgs {
  std::string correlator;
  int L = 3;
  double gamma = 0.0;
  bool optimal = false;
  std::vector<double> thetas;
  std::vector<double> phis;
  bool degrees = false;
  std::string source = "fock";
  CutoffFlag cutoff;
  OutputOptions out;
};

void run_chained(const ChainedArgs& a) {
  ExpressionKind kind = ExpressionKind::chained_c;
  if (a.correlator == "E") kind = ExpressionKind::chained_e;
  if (a.correlator == "dist-rates") kind = ExpressionKind::chained_dist_rates;
  if (a.correlator == "dist-int") kind = ExpressionKind::chained_dist_intensities;
  SettingChain settings = default_settings_for(kind, a.L);
  if (!a.thetas.empty() || !a.phis.empty()) {
    if (static_cast<int>(a.thetas.size()) != a.L || static_cast<int>(a.phis.size()) != a.L) {
      throw UsageError("--thetas/--phis: need exactly L = " + std::to_string(a.L) + " angles each");
    }
    settings = {to_radians(a.thetas, a.degrees), to_radians(a.phis, a.degrees)};
  }
  write_table(a.out, single_report_table(
                         scan_report(kind, a.L, a.gamma, a.source, a.cutoff, settings, a.optimal)));
}

struct Table1Args {
  int min_L = 2;
  int max_L = 13;
  double tolerance = 1e-4;
  bool no_fock = false;
  OutputOptions out;
};

void run_table1(const Table1Args& a) {
  Table1Options o;
  o.min_L = a.min_L;
  o.max_L = a.max_L;
  o.tolerance = a.tolerance;
  o.with_fock = !a.no_fock;
  write_table(a.out, report::table1_table(table1(o)));
}

struct Table2Args {
  int cutoff = 25;
  int min_L = 2;
  int max_L = 7;
  double tolerance = 1e-4;
  OutputOptions out;
};

void run_table2(const Table2Args& a) {
  Table2Options o;
  o.cutoff_pairs = a.cutoff;
  o.min_L = a.min_L;
  o.max_L = a.max_L;
  o.tolerance = a.tolerance;
  write_table(a.out, report::table2_table(table2(o)));
}

struct VisibilityArgs {
  double step = 0.01;
  double max = 3.0;
  OutputOptions out;
};

void run_visibility(const VisibilityArgs& a) {
  write_table(a.out, report::visibility_table(visibility_curve(gamma_grid(a.step, a.max))));
}

struct FuzzArgs {
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  int max_chain = 5;
  OutputOptions out;
};

void run_fuzz_cmd(const FuzzArgs& a) {
  const auto r = run_fuzz(a.seed, a.samples, a.max_chain);
  write_table(a.out, report::fuzz_table(r));
  // Summary goes to stderr so stdout stays a clean CSV/JSON document.
  std::cerr << "violations: " << r.total_violations() << '\n';
}

struct LoopholeArgs {
  double M = 10.0;
  double eps = 1.0;
  OutputOptions out;
};

void run_loophole(const LoopholeArgs& a) {
  const auto model = loophole_model(a.M, a.eps);
  const auto projected = project_constrained_total(model);
  const auto settings = default_chain_settings(2);
  std::vector<InequalityReport> reports;
  auto add = [&](const LhvModel& m, ExpressionKind kind, const std::string& label) {
    auto r = evaluate({kind, 2, settings}, LhvCorrelators(m));
    r.source = label;
    reports.push_back(std::move(r));
  };
  add(model, ExpressionKind::chsh_e, "loophole_model");
  add(model, ExpressionKind::chsh_c, "loophole_model");
  add(projected, ExpressionKind::chsh_e, "constrained_total_projection");
  add(projected, ExpressionKind::chsh_c, "constrained_total_projection");
  write_table(a.out, report::inequality_table(reports));
}

// ---------------------------------------------------------------------------

void add_gamma(CLI::App* cmd, double& gamma) {
  cmd->add_option("--gamma", gamma, "Gain (>= 0)")->required()->check(kNonNegative);
}

void add_cutoff(CLI::App* cmd, CutoffFlag& cutoff) {
  cmd->add_option("--cutoff", cutoff.text, "Pair cutoff: 'auto' (tail < 1e-10, cap 60) or an integer")
      ->check(kCutoffValidator)
      ->capture_default_str();
}

void add_two_setting_flags(CLI::App* cmd, TwoSettingArgs& a, std::vector<std::string> correlators) {
  a.correlator = correlators.front();
  cmd->add_option("--correlator", a.correlator, "Correlator")
      ->check(CLI::IsMember(correlators))
      ->capture_default_str();
  add_gamma(cmd, a.gamma);
  auto* opt = cmd->add_flag("--optimal-settings", a.optimal, "Use the violation-maximizing settings");
  cmd->add_option("--angles", a.angles, "Settings theta theta' phi phi'")
      ->expected(4)
      ->excludes(opt);
  cmd->add_flag("--degrees", a.degrees, "Angles are in degrees");
  add_source_flag(cmd, a.source);
  add_cutoff(cmd, a.cutoff);
  add_output_flags(cmd, a.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bell-inequality tests for bright squeezed vacuum"};
  app.require_subcommand(1);

  StateArgs state;
  auto* state_cmd = app.add_subcommand("state", "BSV sector weights and truncation tail");
  add_gamma(state_cmd, state.gamma);
  add_cutoff(state_cmd, state.cutoff);
  add_output_flags(state_cmd, state.out);

  CorrelateArgs corr;
  auto* corr_cmd = app.add_subcommand("correlate", "One correlator value as a JSON object");
  corr_cmd->add_option("--kind", corr.kind, "Correlator")
      ->required()
      ->check(CLI::IsMember({"E", "C", "F", "K", "G", "dist-rates", "dist-int", "stokes"}));
  add_gamma(corr_cmd, corr.gamma);
  corr_cmd->add_option("--theta", corr.theta, "Alice analyzer angle")->capture_default_str();
  corr_cmd->add_option("--phi", corr.phi, "Bob analyzer angle")->capture_default_str();
  corr_cmd->add_option("--side", corr.side, "Side for stokes")
      ->check(CLI::IsMember({"A", "B"}))
      ->capture_default_str();
  corr_cmd->add_flag("--degrees", corr.degrees, "Angles are in degrees");
  add_cutoff(corr_cmd, corr.cutoff);
  corr_cmd->add_option("--out", corr.out, "Write output to this file instead of stdout");

  TwoSettingArgs chsh;
  auto* chsh_cmd = app.add_subcommand("chsh", "CHSH-type report");
  add_two_setting_flags(chsh_cmd, chsh, {"C", "E", "F"});

  TwoSettingArgs ch;
  auto* ch_cmd = app.add_subcommand("ch", "CH-type report");
  add_two_setting_flags(ch_cmd, ch, {"K", "G"});

  ChainedArgs chained;
  chained.correlator = "C";
  auto* chained_cmd = app.add_subcommand("chained", "Chained or distance-chained report");
  chained_cmd->add_option("--correlator", chained.correlator, "Correlator")
      ->check(CLI::IsMember({"C", "E", "dist-rates", "dist-int"}))
      ->capture_default_str();
  chained_cmd->add_option("--L", chained.L, "Settings per side")
      ->check(CLI::Range(2, 64))
      ->capture_default_str();
  add_gamma(chained_cmd, chained.gamma);
  auto* chained_opt =
      chained_cmd->add_flag("--optimal-settings", chained.optimal, "Use the violation-maximizing settings");
  chained_cmd->add_option("--thetas", chained.thetas, "Alice angles")->excludes(chained_opt);
  chained_cmd->add_option("--phis", chained.phis, "Bob angles")->excludes(chained_opt);
  chained_cmd->add_flag("--degrees", chained.degrees, "Angles are in degrees");
  add_source_flag(chained_cmd, chained.source);
  add_cutoff(chained_cmd, chained.cutoff);
  add_output_flags(chained_cmd, chained.out);

  Table1Args t1;
  auto* t1_cmd = app.add_subcommand("table1", "Critical gains of the intensity and ratio chains");
  t1_cmd->add_option("--min-L", t1.min_L)->check(CLI::Range(2, 13))->capture_default_str();
  t1_cmd->add_option("--max-L", t1.max_L)->check(CLI::Range(2, 13))->capture_default_str();
  t1_cmd->add_option("--tolerance", t1.tolerance)->check(kPositive)->capture_default_str();
  t1_cmd->add_flag("--no-fock", t1.no_fock, "Skip the Fock-oracle column");
  add_output_flags(t1_cmd, t1.out);

  Table2Args t2;
  auto* t2_cmd = app.add_subcommand("table2", "Critical gains of the distance chains");
  t2_cmd->add_option("--cutoff", t2.cutoff, "Pair cutoff")->check(CLI::Range(0, 400))->capture_default_str();
  t2_cmd->add_option("--min-L", t2.min_L)->check(CLI::Range(2, 7))->capture_default_str();
  t2_cmd->add_option("--max-L", t2.max_L)->check(CLI::Range(2, 7))->capture_default_str();
  t2_cmd->add_option("--tolerance", t2.tolerance)->check(kPositive)->capture_default_str();
  add_output_flags(t2_cmd, t2.out);

  VisibilityArgs vis;
  auto* vis_cmd = app.add_subcommand("visibility", "Visibility curves on a gain grid");
  vis_cmd->add_option("--step", vis.step)->check(kPositive)->capture_default_str();
  vis_cmd->add_option("--max", vis.max)->check(kNonNegative)->capture_default_str();
  add_output_flags(vis_cmd, vis.out);

  FuzzArgs fuzz;
  auto* fuzz_cmd = app.add_subcommand("fuzz", "Random local models against every local bound");
  fuzz_cmd->add_option("--samples", fuzz.samples)->check(CLI::Range(1, 100000000))->capture_default_str();
  fuzz_cmd->add_option("--seed", fuzz.seed)->capture_default_str();
  fuzz_cmd->add_option("--max-chain", fuzz.max_chain)->check(CLI::Range(2, 12))->capture_default_str();
  add_output_flags(fuzz_cmd, fuzz.out);

  LoopholeArgs loop;
  auto* loop_cmd = app.add_subcommand("loophole-demo", "Local model exceeding the intensity CHSH bound");
  loop_cmd->add_option("--M", loop.M, "Polarizer-present intensity")->check(kPositive)->capture_default_str();
  loop_cmd->add_option("--eps", loop.eps, "Declared total")->check(kPositive)->capture_default_str();
  add_output_flags(loop_cmd, loop.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*state_cmd) run_state(state);
    if (*corr_cmd) run_correlate(corr);
    if (*chsh_cmd) run_chsh(chsh);
    if (*ch_cmd) run_ch(ch);
    if (*chained_cmd) run_chained(chained);
    if (*t1_cmd) run_table1(t1);
    if (*t2_cmd) run_table2(t2);
    if (*vis_cmd) run_visibility(vis);
    if (*fuzz_cmd) run_fuzz_cmd(fuzz);
    if (*loop_cmd) run_loophole(loop);
  } catch (const BracketFailure& e) {
    std::cerr << "bracket failure: " << e.what() << '\n';
    return kExitBracket;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnsupportedCorrelator& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
