#include "fif/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "fif/config.hpp"
#include "json.hpp"

namespace fif {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// JSON has no NaN or infinity; those become null.
ojson number(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson to_json(const ConditionReport& r) {
  ojson j;
  j["theorem"] = r.theorem;
  ojson constants = ojson::object();
  for (const auto& [k, v] : r.constants) constants[k] = number(v);
  j["constants"] = constants;
  j["lhs"] = number(r.lhs);
  j["rhs"] = number(r.rhs);
  j["verdict"] = to_string(r.verdict);
  j["notes"] = r.notes;
  return j;
}

ojson to_json(const TheoremVerdict& v) {
  ojson j = to_json(v.hypothesis);
  j["theorem"] = v.theorem;
  j["hypothesis_verdict"] = j["verdict"];
  j["verdict"] = to_string(v.verdict());
  if (v.prediction) {
    j["prediction"] = {{"lo", v.prediction->lo}, {"hi", v.prediction->hi}};
  } else {
    j["prediction"] = nullptr;
  }
  j["estimate"] = number(v.estimate);
  j["tolerance"] = v.tolerance;
  j["agreement"] = to_string(v.agreement);
  for (const auto& n : v.notes) j["notes"].push_back(n);
  return j;
}

ojson to_json(const DimensionEstimate& e) {
  return {{"levels", e.levels}, {"counts", e.counts},         {"slope", number(e.slope)},
          {"intercept", number(e.intercept)}, {"residual", number(e.residual)}, {"plausible", e.plausible()}};
}

ojson meta(const std::string& command, const std::string& config) {
  return {{"tool", "fifdim"}, {"format", 1}, {"command", command}, {"config", config}};
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw ValidationError("cannot write '" + p.string() + "'");
  return f;
}

struct Flags {
  std::string config;
  std::string out;
  std::optional<double> tol;
  std::optional<std::size_t> depth;
  std::optional<std::uint64_t> seed;
};

struct Loaded {
  ExperimentConfig cfg;
  std::unique_ptr<FractalSystem> sys;
  fs::path dir;
};

Loaded load(const Flags& flags) {
  Loaded l{load_config(flags.config), nullptr, {}};
  if (flags.tol) {
    if (!(*flags.tol > 0.0)) throw ValidationError("--tol must be positive");
    l.cfg.settings.tol = *flags.tol;
  }
  if (flags.depth) l.cfg.depth = *flags.depth;
  if (flags.seed) l.cfg.seed = *flags.seed;
  if (!flags.out.empty()) l.cfg.out_dir = flags.out;
  l.sys = l.cfg.build_system();
  return l;
}

void print_warnings(const FractalSystem& sys, std::ostream& err) {
  for (const auto& w : sys.warnings()) err << "warning: " << w << '\n';
}

void print_verdict(std::ostream& out, const std::string& name, const ConditionReport& r) {
  out << name << ": " << to_string(r.verdict) << " (lhs " << fmt("%.6g", r.lhs) << ", rhs " << fmt("%.6g", r.rhs)
      << ")\n";
}

// ---------------------------------------------------------------------------

int cmd_moran(const std::vector<double>& ratios, std::ostream& out) {
  const MoranSolution sol = moran_solve(ratios);
  out << fmt("%.12f", sol.exponent) << '\n';
  return kExitOk;
}

int cmd_build(const Flags& flags, std::ostream& out, std::ostream& err) {
  Loaded l = load(flags);
  print_warnings(*l.sys, err);
  const SampleResult res = sample_fif(*l.sys, l.cfg.settings.grid, l.cfg.settings.tol);
  l.dir = prepare_dir(l.cfg.out_dir);
  {
    std::ofstream f = open_out(l.dir / "fif.csv");
    write_csv(f, res.samples);
  }
  ojson side;
  side["meta"] = meta("build", flags.config);
  side["grid"] = res.samples.grid_size();
  side["iterations"] = res.iterations;
  side["iteration_bound"] = res.iteration_bound;
  side["contraction"] = number(res.contraction);
  side["epsilon"] = number(res.samples.error);
  side["M"] = number(l.sys->bound());
  side["alpha_sup"] = number(l.sys->scaling_sup());
  side["warnings"] = l.sys->warnings();
  std::ofstream f = open_out(l.dir / "fif.meta.json");
  f << side.dump(2) << '\n';
  out << "wrote " << (l.dir / "fif.csv").string() << " (" << res.samples.values.size() << " samples, "
      << res.iterations << " iterations, error " << fmt("%.3g", res.samples.error) << ")\n";
  return kExitOk;
}

int cmd_eval(const Flags& flags, const std::vector<double>& xs, std::ostream& out, std::ostream& err) {
  Loaded l = load(flags);
  print_warnings(*l.sys, err);
  out << "x,value,err\n";
  for (double x : xs) {
    const PointValue v = eval_fif(*l.sys, x, l.cfg.depth);
    out << fmt("%.17g", x) << ',' << fmt("%.17g", v.value) << ',' << fmt("%.17g", v.error) << '\n';
  }
  return kExitOk;
}

std::size_t osc_grid(const DimensionSettings& st) {
  if (st.p == 2) return std::max(st.grid, std::size_t{1} << (st.osc_m_max + 2));
  std::size_t g = 1;
  unsigned k = 0;
  while (g < st.grid || k < st.osc_m_max + 2) {
    if (g > (std::size_t{1} << 24) / st.p) throw ValidationError("oscillation grid for this p and m_max exceeds 2^24");
    g *= st.p;
    ++k;
  }
  return g;
}

int cmd_osc(const Flags& flags, const std::string& which, std::ostream& out, std::ostream& err) {
  Loaded l = load(flags);
  print_warnings(*l.sys, err);
  const DimensionSettings& st = l.cfg.settings;
  const std::size_t grid = osc_grid(st);
  SampledFunction g;
  if (which == "fif") {
    g = sample_fif(*l.sys, grid, st.tol).samples;
  } else {
    const auto* a = dynamic_cast<const AlphaFractalSystem*>(l.sys.get());
    if (a == nullptr) throw ValidationError("--function " + which + " needs an alpha system");
    g = SampledFunction::sample(which == "germ" ? a->germ() : a->base(), l.sys->domain(), grid);
  }
  const OscillationProfile prof = oscillation_profile(g, st.p, st.osc_m_max);
  l.dir = prepare_dir(l.cfg.out_dir);
  const fs::path path = l.dir / ("osc_" + which + ".csv");
  std::ofstream f = open_out(path);
  write_csv(f, prof, st.beta);
  out << "wrote " << path.string() << " (observed exponent " << fmt("%.4f", observed_osc_exponent(prof)) << ")\n";
  return kExitOk;
}

int cmd_boxdim(const Flags& flags, std::ostream& out, std::ostream& err) {
  Loaded l = load(flags);
  print_warnings(*l.sys, err);
  const Construction built = construct(*l.sys, l.cfg.settings);
  l.dir = prepare_dir(l.cfg.out_dir);
  std::ofstream f = open_out(l.dir / "boxdim.csv");
  write_csv(f, built.boxdim);
  out << "dimension " << fmt("%.6f", built.boxdim.dimension()) << " (residual " << fmt("%.3g", built.boxdim.residual)
      << ", m = " << l.cfg.settings.m_min << ".." << l.cfg.settings.m_max << ")\n";
  if (!built.boxdim.plausible()) err << "warning: box estimate outside the plausible range [0.95, 2.05]\n";
  return kExitOk;
}

int cmd_report(const Flags& flags, std::ostream& out, std::ostream& err) {
  Loaded l = load(flags);
  print_warnings(*l.sys, err);
  const Construction built = construct(*l.sys, l.cfg.settings);
  const std::vector<TheoremVerdict> verdicts = dimension_report(*l.sys, l.cfg.settings, built);

  ojson doc;
  doc["meta"] = meta("report", flags.config);
  doc["construction"] = {{"grid", built.sampled.samples.grid_size()},
                         {"iterations", built.sampled.iterations},
                         {"contraction", number(built.sampled.contraction)},
                         {"epsilon", number(built.sampled.samples.error)},
                         {"M", number(l.sys->bound())},
                         {"alpha_sup", number(l.sys->scaling_sup())},
                         {"warnings", l.sys->warnings()}};
  doc["boxdim"] = to_json(built.boxdim);
  doc["theorems"] = ojson::array();
  for (const auto& v : verdicts) doc["theorems"].push_back(to_json(v));

  l.dir = prepare_dir(l.cfg.out_dir);
  std::ofstream f = open_out(l.dir / "report.json");
  f << doc.dump(2) << '\n';
  out << "box dimension estimate " << fmt("%.6f", built.boxdim.dimension()) << '\n';
  for (const auto& v : verdicts) {
    out << v.theorem << ": " << to_string(v.verdict()) << ", " << to_string(v.agreement) << '\n';
  }
  return kExitOk;
}

int cmd_verify(const Flags& flags, std::ostream& out, std::ostream& err) {
  Loaded l = load(flags);
  print_warnings(*l.sys, err);
  const FractalSystem& sys = *l.sys;
  const DimensionSettings& st = l.cfg.settings;
  std::vector<ConditionReport> checks;
  checks.push_back(check_metric_contraction(sys, l.cfg.c1, l.cfg.c2));
  checks.push_back(hoelder_invariance_check(sys, st.s));
  checks.push_back(vbeta_invariance_check(sys, st.beta, st.p, st.osc_m_max));
  checks.push_back(bv_invariance_check(sys));
  checks.push_back(ac_invariance_check(sys));

  const BiLipschitzEstimate bl = estimate_bilipschitz(sys, l.cfg.pairs, l.cfg.seed);
  ojson bij;
  bij["pairs"] = bl.pairs;
  bij["seed"] = l.cfg.seed;
  bij["lower"] = ojson::array();
  bij["upper"] = ojson::array();
  for (std::size_t j = 0; j < bl.lower.size(); ++j) {
    bij["lower"].push_back(number(bl.lower[j]));
    bij["upper"].push_back(number(bl.upper[j]));
  }
  bij["degenerate"] = bl.degenerate;
  bij["hypothesis"] = bl.hypothesis_holds() ? "pass" : "fail";
  if (bl.hypothesis_holds()) {
    const HausdorffBounds hb = hausdorff_bounds(bl.lower, bl.upper);
    bij["s_lower"] = hb.lower.exponent;
    bij["s_upper"] = hb.upper.exponent;
  }

  ojson doc;
  doc["meta"] = meta("verify", flags.config);
  doc["checks"] = ojson::array();
  for (const auto& c : checks) doc["checks"].push_back(to_json(c));
  doc["bilipschitz"] = bij;
  l.dir = prepare_dir(l.cfg.out_dir);
  std::ofstream f = open_out(l.dir / "verify.json");
  f << doc.dump(2) << '\n';
  for (const auto& c : checks) print_verdict(out, c.theorem, c);
  out << "bilipschitz: " << (bl.hypothesis_holds() ? "pass" : "fail");
  if (bij.contains("s_lower")) {
    out << " (Hausdorff bounds [" << fmt("%.6f", bij["s_lower"].get<double>()) << ", "
        << fmt("%.6f", bij["s_upper"].get<double>()) << "])";
  }
  out << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractal interpolation functions: construction, regularity and graph dimension", "fifdim"};
  app.require_subcommand(1);
  Flags flags;
  auto add_common = [&flags](CLI::App* cmd) {
    cmd->add_option("--config", flags.config, "experiment config (JSON)")->required();
    cmd->add_option("--out", flags.out, "output directory (overrides output.dir)");
  };

  std::vector<double> ratios;
  auto* moran = app.add_subcommand("moran", "solve sum r_i^s = 1");
  moran->add_option("--ratios", ratios, "contraction ratios in (0,1)")->required()->delimiter(',');

  auto* build = app.add_subcommand("build", "sample f^alpha on the grid and write fif.csv");
  add_common(build);
  auto tol_opt = [&flags](CLI::App* cmd) {
    cmd->add_option_function<double>("--tol", [&flags](double t) { flags.tol = t; }, "fixed-point tolerance");
  };
  tol_opt(build);

  std::vector<double> xs;
  auto* eval = app.add_subcommand("eval", "evaluate f^alpha at points by preimage recursion");
  add_common(eval);
  eval->add_option("--x", xs, "abscissae")->required()->delimiter(',');
  eval->add_option_function<std::size_t>("--depth", [&flags](std::size_t d) { flags.depth = d; }, "recursion depth");

  std::string which = "fif";
  auto* osc = app.add_subcommand("osc", "write the oscillation profile");
  add_common(osc);
  tol_opt(osc);
  osc->add_option("--function", which, "germ, base or fif")->check(CLI::IsMember({"germ", "base", "fif"}));

  auto* boxdim = app.add_subcommand("boxdim", "box-counting estimate of the graph dimension");
  add_common(boxdim);
  tol_opt(boxdim);

  auto* report = app.add_subcommand("report", "run every theorem check and write report.json");
  add_common(report);
  tol_opt(report);

  auto* verify = app.add_subcommand("verify", "hypothesis checks only; writes verify.json");
  add_common(verify);
  verify->add_option_function<std::uint64_t>("--seed", [&flags](std::uint64_t s) { flags.seed = s; },
                                             "bi-Lipschitz sampling seed");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (moran->parsed()) return cmd_moran(ratios, out);
    if (build->parsed()) return cmd_build(flags, out, err);
    if (eval->parsed()) return cmd_eval(flags, xs, out, err);
    if (osc->parsed()) return cmd_osc(flags, which, out, err);
    if (boxdim->parsed()) return cmd_boxdim(flags, out, err);
    if (report->parsed()) return cmd_report(flags, out, err);
    if (verify->parsed()) return cmd_verify(flags, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DomainError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitValidation;
}

}  // namespace fif
