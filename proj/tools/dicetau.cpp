// dicetau: certified enclosures for dice-sum hitting-time moments.
//
// Exit codes: 0 success, 1 usage error, 2 computation error.

#include "dicetau/engine.hpp"
#include "dicetau/numerics.hpp"
#include "dicetau/oracle.hpp"
#include "dicetau/tailbound.hpp"
#include "dicetau/targets.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace dicetau;
using ojson = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  std::int64_t ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }
};

std::string rat_str(const Rational& x) { return x.str(); }

std::string sci_str(const Rational& x, std::size_t sig = 10) {
  if (x.is_zero()) return "0";
  return to_scientific(x, sig).str();
}

ojson rational_or_int(const Rational& x) {
  if (denominator(x) == 1) {
    const BigInt& n = numerator(x);
    if (n >= BigInt(std::numeric_limits<std::int64_t>::min()) &&
        n <= BigInt(std::numeric_limits<std::int64_t>::max()))
      return ojson(n.convert_to<std::int64_t>());
  }
  return ojson(rat_str(x));
}

struct Common {
  std::string target = "primes";
  unsigned faces = 6;
  std::uint64_t start = 0;

  ProcessSpec make_spec(std::uint64_t limit) const {
    return ProcessSpec(faces, TargetSet::from_selector(target, limit), start);
  }
};

void add_common(CLI::App* sub, Common& c, bool with_start = true) {
  sub->add_option("--target", c.target, "primes|squares|fibonacci|file:<path>");
  sub->add_option("--faces,-m", c.faces, "die faces")->check(CLI::Range(2u, 1000000u));
  if (with_start) sub->add_option("--start", c.start, "start state");
}

void check_format(const std::string& fmt, bool csv_ok) {
  if (fmt == "plain" || fmt == "json" || (csv_ok && fmt == "csv")) return;
  throw UsageError("--format must be plain, json" + std::string(csv_ok ? " or csv" : ""));
}

TailBoundParams make_params(std::uint64_t split_override) {
  TailBoundParams params;
  if (split_override != 0) params.split_point = split_override;
  return params;
}

// "auto" (prime targets only) or 2k comma-separated values L_1,U_1,...,L_k,U_k.
std::vector<std::pair<Rational, Rational>> resolve_bounds(const std::string& text, unsigned order,
                                                          const ProcessSpec& spec,
                                                          std::uint64_t cutoff,
                                                          std::uint64_t split_override) {
  std::vector<std::pair<Rational, Rational>> out;
  if (text == "auto") {
    if (spec.target.kind() != TargetKind::primes)
      throw UsageError(
          "--bound auto derives certificates for prime targets only; "
          "pass explicit per-order bounds");
    const TailBoundParams params = make_params(split_override);
    for (unsigned j = 1; j <= order; ++j) {
      const BoundaryCertificate cert = boundary_bound(spec, cutoff, j, params);
      out.emplace_back(Rational(0), Rational(cert.value));
    }
    return out;
  }
  std::vector<Rational> vals;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      vals.push_back(parse_rational(tok));
    } catch (const std::exception& e) {
      throw UsageError("bad --bound entry '" + tok + "': " + e.what());
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (vals.size() != 2 * static_cast<std::size_t>(order))
    throw UsageError("--bound needs 'auto' or " + std::to_string(2 * order) +
                     " comma-separated values (L_j,U_j per order)");
  for (unsigned j = 0; j < order; ++j) out.emplace_back(vals[2 * j], vals[2 * j + 1]);
  return out;
}

struct ReportOpts {
  Common c;
  std::uint64_t cutoff = 72000;
  unsigned order = 1;
  std::string bound = "auto";
  std::uint64_t split = 0;
  std::size_t digits = kDefaultDigitBudget;
  std::string format = "plain";
  std::string mode = "exact";
  unsigned precision = 50;
  std::string width_budget;
};

void add_report_options(CLI::App* sub, ReportOpts& o, bool with_order) {
  add_common(sub, o.c);
  sub->add_option("--cutoff,-N", o.cutoff, "truncation level N")->required();
  if (with_order)
    sub->add_option("--order,-k", o.order, "highest moment order")->check(CLI::Range(1u, 64u));
  sub->add_option("--bound", o.bound, "'auto' or L_1,U_1[,...] per order");
  sub->add_option("--split", o.split, "tail split point for auto bounds");
  sub->add_option("--digits", o.digits, "decimal digit budget");
  sub->add_option("--format", o.format, "plain|json");
  sub->add_option("--mode", o.mode, "exact|float");
  sub->add_option("--precision", o.precision, "float-mode decimal precision");
  sub->add_option("--width-budget", o.width_budget, "warn when survival*(U_1-L_1) exceeds this");
}

void run_report_float(const ReportOpts& o, unsigned k, const Timer& timer) {
  ProcessSpec spec = o.c.make_spec(o.cutoff + 10 * o.c.faces);
  CutoffConfig cfg;
  cfg.cutoff = o.cutoff;
  cfg.max_order = k;
  const FloatMomentResult fr = truncated_moments_float(spec, cfg, o.precision);
  if (o.format == "json") {
    ojson j;
    j["target"] = o.c.target;
    j["faces"] = o.c.faces;
    j["cutoff"] = o.cutoff;
    j["order"] = k;
    j["mode"] = "float";
    j["certified"] = fr.certified;
    j["precision"] = fr.precision_digits;
    j["raw"] = fr.moments;
    j["survival"] = fr.survival;
    j["elapsed_ms"] = timer.ms();
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::cout << "target " << o.c.target << "\nfaces " << o.c.faces << "\ncutoff " << o.cutoff
            << "\norder " << k << "\nmode float\ncertified false\nprecision "
            << fr.precision_digits << "\n";
  for (unsigned j = 1; j <= k; ++j) std::cout << "raw" << j << " " << fr.moments[j - 1] << "\n";
  std::cout << "survival " << fr.survival << "\nelapsed_ms " << timer.ms() << "\n";
}

// Shared by `expect` (order fixed at 1) and `moments`.
void run_report(const ReportOpts& o, bool moments_cmd) {
  const Timer timer;
  const unsigned k = moments_cmd ? o.order : 1;
  check_format(o.format, false);
  if (k < 1) throw UsageError("--order must be at least 1");
  if (o.mode == "float") {
    run_report_float(o, k, timer);
    return;
  }
  if (o.mode != "exact") throw UsageError("--mode must be exact or float");

  ProcessSpec spec = o.c.make_spec(o.cutoff + 10 * o.c.faces);
  const auto bounds = resolve_bounds(o.bound, k, spec, o.cutoff, o.split);
  std::optional<Rational> budget;
  if (!o.width_budget.empty()) budget = parse_rational(o.width_budget);
  const MomentReport rep = enclose_moments(spec, o.cutoff, bounds, budget);

  const AgreedPrefix mean_ap = agreed_prefix(rep.mean, o.digits);
  if (o.format == "json") {
    ojson j;
    j["target"] = o.c.target;
    j["faces"] = o.c.faces;
    j["cutoff"] = o.cutoff;
    j["order"] = k;
    j["lower"] = rat_str(rep.mean.lower);
    j["upper"] = rat_str(rep.mean.upper);
    j["agreed_digits"] = mean_ap.fractional_digits;
    j["value_prefix"] = mean_ap.digits;
    j["survival"] = rat_str(rep.survival);
    ojson used = ojson::array();
    for (const auto& [L, U] : rep.bounds) {
      used.push_back(rational_or_int(L));
      used.push_back(rational_or_int(U));
    }
    j["bounds_used"] = used;
    if (rep.width_warning) j["width_warning"] = true;
    if (moments_cmd) {
      ojson raw = ojson::array();
      for (unsigned jo = 1; jo <= k; ++jo) {
        const Enclosure& e = rep.raw[jo - 1];
        const AgreedPrefix ap = agreed_prefix(e, o.digits);
        raw.push_back({{"order", jo},
                       {"lower", rat_str(e.lower)},
                       {"upper", rat_str(e.upper)},
                       {"agreed_digits", ap.fractional_digits},
                       {"value_prefix", ap.digits}});
      }
      j["raw"] = raw;
      ojson central = ojson::array();
      for (unsigned jo = 2; jo <= k; ++jo) {
        const Enclosure& e = rep.central[jo - 2];
        const AgreedPrefix ap = agreed_prefix(e, o.digits);
        central.push_back({{"order", jo},
                           {"lower", rat_str(e.lower)},
                           {"upper", rat_str(e.upper)},
                           {"agreed_digits", ap.fractional_digits},
                           {"value_prefix", ap.digits}});
      }
      j["central"] = central;
    }
    j["elapsed_ms"] = timer.ms();
    std::cout << j.dump(2) << "\n";
    return;
  }

  std::cout << "target " << o.c.target << "\nfaces " << o.c.faces << "\ncutoff " << o.cutoff
            << "\norder " << k << "\nbounds_used";
  for (const auto& [L, U] : rep.bounds) std::cout << " " << rat_str(L) << " " << rat_str(U);
  std::cout << "\n";
  std::cout << "agreed_digits " << mean_ap.fractional_digits << "\n";
  std::cout << "value_prefix " << mean_ap.digits << "\n";
  std::cout << "width " << sci_str(rep.mean.width(), 9) << "\n";
  if (rep.mean.zero_width()) std::cout << "exact " << rat_str(rep.mean.lower) << "\n";
  if (moments_cmd) {
    for (unsigned jo = 1; jo <= k; ++jo) {
      const AgreedPrefix ap = agreed_prefix(rep.raw[jo - 1], o.digits);
      std::cout << "raw" << jo << " " << ap.digits << "\n";
      std::cout << "raw" << jo << "_digits " << ap.fractional_digits << "\n";
    }
    for (unsigned jo = 2; jo <= k; ++jo) {
      const AgreedPrefix ap = agreed_prefix(rep.central[jo - 2], o.digits);
      std::cout << "central" << jo << " " << ap.digits << "\n";
      std::cout << "central" << jo << "_digits " << ap.fractional_digits << "\n";
    }
  }
  std::cout << "survival " << sci_str(rep.survival, 10) << "\n";
  if (rep.width_warning) std::cout << "width_warning true\n";
  std::cout << "elapsed_ms " << timer.ms() << "\n";
}

struct SurvivalOpts {
  Common c;
  std::uint64_t cutoff = 0;
  std::size_t digits = 10;
  std::string format = "plain";
};

void run_survival(const SurvivalOpts& o) {
  const Timer timer;
  check_format(o.format, false);
  ProcessSpec spec = o.c.make_spec(o.cutoff + 10 * o.c.faces);
  const Rational sp = survival_probability(spec, o.cutoff);
  if (o.format == "json") {
    ojson j;
    j["target"] = o.c.target;
    j["faces"] = o.c.faces;
    j["cutoff"] = o.cutoff;
    j["start"] = o.c.start;
    j["survival"] = rat_str(sp);
    j["scientific"] = sci_str(sp, o.digits);
    j["elapsed_ms"] = timer.ms();
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::cout << "target " << o.c.target << "\nfaces " << o.c.faces << "\ncutoff " << o.cutoff
            << "\nstart " << o.c.start << "\nsurvival " << sci_str(sp, o.digits)
            << "\nelapsed_ms " << timer.ms() << "\n";
}

struct LandingOpts {
  Common c;
  std::uint64_t rows = 40;
  std::size_t digits = 12;
  std::string format = "csv";
};

void run_landing(const LandingOpts& o) {
  check_format(o.format, true);
  if (o.rows < 1) throw UsageError("--max must be at least 1");
  ProcessSpec spec = o.c.make_spec(o.c.start + o.rows + 10 * o.c.faces);
  const std::uint64_t n_max = o.c.start + o.rows - 1;
  const LandingProfile prof = landing_profile(spec, n_max);
  if (o.format == "json") {
    ojson rows = ojson::array();
    for (std::uint64_t n = o.c.start; n <= n_max; ++n)
      rows.push_back({{"n", n},
                      {"lp", rat_str(prof.lp[n])},
                      {"lp_decimal", to_decimal(prof.lp[n], o.digits)}});
    std::cout << rows.dump(2) << "\n";
    return;
  }
  if (o.format == "csv") std::cout << "n,lp,lp_decimal\n";
  for (std::uint64_t n = o.c.start; n <= n_max; ++n) {
    const char sep = o.format == "csv" ? ',' : ' ';
    std::cout << n << sep << rat_str(prof.lp[n]) << sep << to_decimal(prof.lp[n], o.digits)
              << "\n";
  }
}

struct BoundOpts {
  Common c;
  std::uint64_t cutoff = 0;
  unsigned order = 1;
  std::uint64_t split = 0;
  std::size_t digits = 12;
  std::string format = "plain";
};

void run_bound(const BoundOpts& o) {
  const Timer timer;
  check_format(o.format, false);
  ProcessSpec spec = o.c.make_spec(o.cutoff + 10 * o.c.faces);
  const TailBoundParams params = make_params(o.split);
  const BoundaryCertificate cert = boundary_bound(spec, o.cutoff, o.order, params);
  if (o.format == "json") {
    ojson j;
    j["target"] = o.c.target;
    j["faces"] = o.c.faces;
    j["cutoff"] = o.cutoff;
    j["order"] = o.order;
    j["value"] = rational_or_int(Rational(cert.value));
    j["finite_part"] = rat_str(cert.finite_part);
    j["tail_part"] = rat_str(cert.tail_part);
    j["finite_decimal"] = to_decimal(cert.finite_part, o.digits);
    j["tail_scientific"] = sci_str(cert.tail_part, 9);
    j["boundary_block_clear"] = cert.boundary_block_clear;
    j["split"] = params.split_point;
    j["elapsed_ms"] = timer.ms();
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::cout << "target " << o.c.target << "\nfaces " << o.c.faces << "\ncutoff " << o.cutoff
            << "\norder " << o.order << "\nU " << cert.value.str() << "\nfinite_part "
            << to_decimal(cert.finite_part, o.digits) << "\ntail_part "
            << sci_str(cert.tail_part, 9) << "\nboundary_block_clear "
            << (cert.boundary_block_clear ? "true" : "false") << "\nsplit " << params.split_point
            << "\nelapsed_ms " << timer.ms() << "\n";
}

struct ProfileOpts {
  Common c;
  std::uint64_t cutoff = 0;
  std::string boundary = "0";
  std::uint64_t from = 0;
  std::uint64_t to = 0;
  std::size_t digits = 6;
  std::string format = "csv";
};

void run_profile(const ProfileOpts& o) {
  check_format(o.format, true);
  ProcessSpec spec = o.c.make_spec(o.cutoff + 10 * o.c.faces);
  const Rational B = parse_rational(o.boundary);
  const auto prof = expectation_profile(spec, o.cutoff, B, o.from, o.to);
  if (o.format == "json") {
    ojson rows = ojson::array();
    for (const auto& [s, v] : prof)
      rows.push_back({{"s", s}, {"value", to_decimal(v, o.digits)}, {"rational", rat_str(v)}});
    std::cout << rows.dump(2) << "\n";
    return;
  }
  if (o.format == "csv") std::cout << "s,value,value_rational\n";
  for (const auto& [s, v] : prof) {
    const char sep = o.format == "csv" ? ',' : ' ';
    std::cout << s << sep << to_decimal(v, o.digits) << sep << rat_str(v) << "\n";
  }
}

struct SimOpts {
  Common c;
  std::uint64_t trials = 1000000;
  std::uint64_t seed = 42;
  std::uint64_t max_rolls = 10000;
  std::string format = "plain";
};

std::string dbl_str(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void run_simulate(const SimOpts& o) {
  const Timer timer;
  check_format(o.format, false);
  ProcessSpec spec = o.c.make_spec(o.c.start + 10 * o.c.faces);
  const SimStats st = monte_carlo(spec, o.trials, o.seed, o.max_rolls);
  if (o.format == "json") {
    ojson j;
    j["target"] = o.c.target;
    j["faces"] = o.c.faces;
    j["start"] = o.c.start;
    j["trials"] = st.trials;
    j["seed"] = st.seed;
    j["max_rolls"] = st.max_rolls;
    j["absorbed"] = st.absorbed;
    j["hit_fraction"] = st.hit_fraction;
    j["mean"] = st.mean;
    j["variance"] = st.variance();
    j["raw2"] = st.raw2;
    j["raw3"] = st.raw3;
    j["raw4"] = st.raw4;
    j["elapsed_ms"] = timer.ms();
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::cout << "target " << o.c.target << "\nfaces " << o.c.faces << "\nstart " << o.c.start
            << "\ntrials " << st.trials << "\nseed " << st.seed << "\nmax_rolls " << st.max_rolls
            << "\nabsorbed " << st.absorbed << "\nhit_fraction " << dbl_str(st.hit_fraction)
            << "\nmean " << dbl_str(st.mean) << "\nvariance " << dbl_str(st.variance())
            << "\nraw2 " << dbl_str(st.raw2) << "\nraw3 " << dbl_str(st.raw3) << "\nraw4 "
            << dbl_str(st.raw4) << "\nelapsed_ms " << timer.ms() << "\n";
}

struct FibOpts {
  unsigned faces = 6;
  std::string format = "plain";
};

void run_fib_ratio(const FibOpts& o) {
  check_format(o.format, false);
  const FibonacciRatio r = fibonacci_ratio(o.faces);
  if (o.format == "json") {
    ojson j;
    j["faces"] = o.faces;
    j["ratio"] = r.value;
    j["divergent"] = r.divergent;
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::cout << "faces " << o.faces << "\nratio " << dbl_str(r.value) << "\ndivergent "
            << (r.divergent ? "true" : "false") << "\n";
  if (r.divergent) std::cout << "conjecturally infinite expectation\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified enclosures for dice-sum hitting-time moments"};
  app.require_subcommand(1);

  ReportOpts expect_opts;
  CLI::App* expect = app.add_subcommand("expect", "certified enclosure of E[tau]");
  add_report_options(expect, expect_opts, false);
  expect->callback([&] { run_report(expect_opts, false); });

  ReportOpts moments_opts;
  moments_opts.order = 4;
  CLI::App* moments = app.add_subcommand("moments", "raw and central moment enclosures");
  add_report_options(moments, moments_opts, true);
  moments->callback([&] { run_report(moments_opts, true); });

  SurvivalOpts survival_opts;
  CLI::App* survival = app.add_subcommand("survival", "exact survival probability SP_N(start)");
  add_common(survival, survival_opts.c);
  survival->add_option("--cutoff,-N", survival_opts.cutoff, "truncation level N")->required();
  survival->add_option("--digits", survival_opts.digits, "significant digits");
  survival->add_option("--format", survival_opts.format, "plain|json");
  survival->callback([&] { run_survival(survival_opts); });

  LandingOpts landing_opts;
  CLI::App* landing = app.add_subcommand("landing", "exact landing probabilities LP_start(n)");
  add_common(landing, landing_opts.c);
  landing->add_option("--max", landing_opts.rows, "number of rows, from the start state");
  landing->add_option("--digits", landing_opts.digits, "decimal digits per row");
  landing->add_option("--format", landing_opts.format, "csv|plain|json");
  landing->callback([&] { run_landing(landing_opts); });

  BoundOpts bound_opts;
  CLI::App* bound = app.add_subcommand("bound", "certified boundary constant U_k");
  add_common(bound, bound_opts.c, false);
  bound->add_option("--cutoff,-N", bound_opts.cutoff, "truncation level N")->required();
  bound->add_option("--order,-k", bound_opts.order, "moment order")->check(CLI::Range(1u, 64u));
  bound->add_option("--split", bound_opts.split, "tail split point");
  bound->add_option("--digits", bound_opts.digits, "decimal digits for the finite part");
  bound->add_option("--format", bound_opts.format, "plain|json");
  bound->callback([&] { run_bound(bound_opts); });

  ProfileOpts profile_opts;
  CLI::App* profile = app.add_subcommand("profile", "E_{N,B}[tau_s] over a state range");
  add_common(profile, profile_opts.c, false);
  profile->add_option("--cutoff,-N", profile_opts.cutoff, "truncation level N")->required();
  profile->add_option("--boundary,-B", profile_opts.boundary, "boundary value B");
  profile->add_option("--from", profile_opts.from, "first state")->required();
  profile->add_option("--to", profile_opts.to, "last state")->required();
  profile->add_option("--digits", profile_opts.digits, "decimal digits per row");
  profile->add_option("--format", profile_opts.format, "csv|plain|json");
  profile->callback([&] { run_profile(profile_opts); });

  SimOpts sim_opts;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo cross-check");
  add_common(simulate, sim_opts.c);
  simulate->add_option("--trials", sim_opts.trials, "number of walks");
  simulate->add_option("--seed", sim_opts.seed, "RNG seed");
  simulate->add_option("--max-rolls", sim_opts.max_rolls, "censor walks beyond this length");
  simulate->add_option("--format", sim_opts.format, "plain|json");
  simulate->callback([&] { run_simulate(sim_opts); });

  FibOpts fib_opts;
  CLI::App* fib = app.add_subcommand("fib-ratio", "Fibonacci-target divergence heuristic");
  fib->add_option("--faces,-m", fib_opts.faces, "die faces")->check(CLI::Range(2u, 1000000u));
  fib->add_option("--format", fib_opts.format, "plain|json");
  fib->callback([&] { run_fib_ratio(fib_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
