#pragma once

// Command-line front end. run_cli() is the whole program; tools/mqw.cpp only
// forwards argv, so the tests drive exactly what users run.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mqw/core.hpp"
#include "mqw/io.hpp"
#include "mqw/ncg.hpp"
#include "mqw/reference.hpp"
#include "mqw/spectral.hpp"

namespace mqw::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

inline constexpr const char* kPhaseConvention = "lambda = exp(i theta), theta in (-pi, pi]";

/// Everything a subcommand may read; unset optionals fall back to per-command
/// defaults.
struct RunConfig {
  std::string command;
  std::optional<int> n;
  double epsilon = 1.0;
  double hbar = 1.0;
  std::optional<double> mass;
  bool massless = false;
  std::optional<double> theta_plus;
  std::optional<double> theta_minus;
  std::optional<double> p_bar;
  std::optional<int> grid;
  std::vector<double> eps_list;
  std::string out;
  std::string svg;
  std::uint64_t seed = 0;
  // reference-module knobs
  double eB = 1.0;
  double dt = 0.0;
  int steps = 0;
  double x0 = 0.0, y0 = 0.0, px0 = 1.0, py0 = 0.0;
  double p = 0.0;
};

inline Error config_error(const std::string& what) { return Error(ErrorKind::InvalidArgument, what); }

inline PhysParams walk_params(const RunConfig& cfg, int default_n) {
  const int n = cfg.n.value_or(default_n);
  if (n < 1 || n > 256) throw config_error("--n must be in [1, 256]");
  std::optional<CoinAngles> coin;
  if (cfg.theta_plus || cfg.theta_minus) {
    if (!(cfg.theta_plus && cfg.theta_minus))
      throw config_error("--theta-plus and --theta-minus go together");
    coin = CoinAngles{*cfg.theta_plus, *cfg.theta_minus};
  }
  const double mass = cfg.massless ? 0.0 : cfg.mass.value_or(0.0);
  return rational_flux(n, cfg.epsilon, mass, cfg.hbar, coin);
}

inline std::size_t sweep_grid(const RunConfig& cfg) {
  const int m = cfg.grid.value_or(256);
  if (m < 16 || m > 65536) throw config_error("--grid must be in [16, 65536]");
  return static_cast<std::size_t>(m);
}

inline void require_out(const RunConfig& cfg) {
  if (cfg.out.empty()) throw config_error("--out is required");
}

inline std::string sidecar_path(const std::string& out) { return out + ".json"; }

inline void write_sweep(const RunConfig& cfg, const NcgCurve& curve,
                        nlohmann::ordered_json meta = {}) {
  io::write_file_atomic(cfg.out, io::sweep_csv(curve));
  meta["command"] = cfg.command;
  meta["params"] = io::params_json(curve.params);
  meta["grid"] = curve.grid();
  meta["phase_convention"] = kPhaseConvention;
  meta["degenerate_theta_s_density"] = "eigenspace projector average";
  std::vector<std::size_t> degenerate;
  for (std::size_t k = 0; k < curve.grid(); ++k)
    if (curve.samples[k].multiplicity > 1) degenerate.push_back(k);
  meta["degenerate_rows"] = degenerate;
  try {
    const auto segs = invertibility_segments(curve);
    meta["degenerate_curve"] = false;
    meta["monotone_segments"] = segs.segments.size();
    meta["globally_invertible"] = segs.globally_invertible;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateCurve) throw;
    meta["degenerate_curve"] = true;
  }
  io::write_file_atomic(sidecar_path(cfg.out), meta.dump(2) + "\n");
  if (!cfg.svg.empty()) io::write_file_atomic(cfg.svg, io::sweep_svg(curve));
}

inline void run_sweep(const RunConfig& cfg) {
  require_out(cfg);
  write_sweep(cfg, ncg_sweep(walk_params(cfg, 3), sweep_grid(cfg)));
}

inline void run_example1(const RunConfig& cfg) {
  require_out(cfg);
  write_sweep(cfg, ncg_sweep(rational_flux(3), sweep_grid(cfg)));
}

inline void run_example2(const RunConfig& cfg) {
  require_out(cfg);
  const int n = cfg.n.value_or(5);
  if (n < 2 || n > 256) throw config_error("--n must be in [2, 256]");
  const auto curve = ncg_sweep(example2_params(n), sweep_grid(cfg));
  const double p_bar = cfg.p_bar.value_or(0.0);
  nlohmann::ordered_json meta;
  for (auto conv : {Example2Convention::WithFactorI, Example2Convention::Invariant}) {
    const auto a = example2_analytic(n, p_bar, conv);
    nlohmann::ordered_json j;
    j["p_bar"] = p_bar;
    j["max_residual"] = a.max_residual;
    j["max_offdiag_overlap"] = a.max_offdiag_overlap;
    std::vector<double> phases;
    for (const auto& v : a.vectors) phases.push_back(std::arg(v.best_lambda));
    j["best_lambda_phases"] = phases;
    meta[conv == Example2Convention::WithFactorI ? "analytic_with_factor_i" : "analytic_invariant"] = j;
  }
  write_sweep(cfg, curve, meta);
}

inline void run_spectrum(const RunConfig& cfg) {
  require_out(cfg);
  if (!cfg.p_bar) throw config_error("--pbar is required");
  const auto params = walk_params(cfg, 3);
  const auto es = eigendecompose(build_step_unitary(params, Momentum::reduced(*cfg.p_bar, params)));
  io::write_file_atomic(cfg.out, io::spectrum_csv(es));
  nlohmann::ordered_json meta;
  meta["command"] = cfg.command;
  meta["params"] = io::params_json(params);
  meta["p_bar"] = *cfg.p_bar;
  meta["phase_convention"] = kPhaseConvention;
  meta["cluster_tolerance"] = kDegeneracyTolerance;
  meta["distinct"] = distinct_count(es);
  meta["max_residual"] = es.max_residual();
  io::write_file_atomic(sidecar_path(cfg.out), meta.dump(2) + "\n");
}

inline void run_charpoly_check(const RunConfig& cfg) {
  require_out(cfg);
  const auto params = walk_params(cfg, 3);
  double p_bar = 0.0;
  if (cfg.p_bar) {
    p_bar = *cfg.p_bar;
  } else {
    std::mt19937_64 rng(cfg.seed);
    p_bar = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
  }
  const auto u = build_step_unitary(params, Momentum::reduced(p_bar, params));
  const auto poly = characteristic_polynomial(u);
  const auto es = eigendecompose(u);
  double root_residual = 0.0;
  for (const auto& l : es.eigenvalues) root_residual = std::max(root_residual, std::abs(poly.evaluate(l)));

  nlohmann::ordered_json meta;
  meta["command"] = cfg.command;
  meta["params"] = io::params_json(params);
  meta["p_bar"] = p_bar;
  std::vector<double> re, im;
  for (const auto& c : poly.coefficients) {
    re.push_back(c.real());
    im.push_back(c.imag());
  }
  meta["coefficients_real"] = re;
  meta["coefficients_imag"] = im;
  meta["max_imag"] = poly.max_imag();
  meta["max_abs_poly_at_eigenvalues"] = root_residual;
  const CoinAngles coin = coin_angles(params);
  if (*params.flux_denominator() == 3 && std::abs(coin.theta_plus - kPi / 4) < 1e-15 &&
      std::abs(coin.theta_minus + kPi / 4) < 1e-15 && params.epsilon() == 1.0) {
    const std::vector<double> closed{1.0, 0.0, -0.75, -std::cos(3.0 * p_bar) / 2.0, -0.75, 0.0, 1.0};
    double dev = 0.0;
    for (std::size_t i = 0; i < closed.size(); ++i)
      dev = std::max(dev, std::abs(poly.coefficients[i] - closed[i]));
    meta["closed_form_deviation"] = dev;
  }
  io::write_file_atomic(cfg.out, meta.dump(2) + "\n");
}

inline void run_converge(const RunConfig& cfg) {
  require_out(cfg);
  ConvergenceFamily fam;
  fam.mass = cfg.massless ? 0.0 : cfg.mass.value_or(0.0);
  fam.eB = cfg.eB;
  fam.hbar = cfg.hbar;
  fam.p = cfg.p;
  fam.eps_list = cfg.eps_list.empty() ? eps_for_denominators({16, 32, 64, 128}, cfg.eB, cfg.hbar)
                                      : cfg.eps_list;
  const auto rep = continuum_convergence(fam, cfg.grid.value_or(8192));

  nlohmann::ordered_json j;
  j["command"] = cfg.command;
  j["mass"] = fam.mass;
  j["eB"] = fam.eB;
  j["hbar"] = fam.hbar;
  j["p"] = fam.p;
  j["phase_convention"] = kPhaseConvention;
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (const auto& pt : rep.points) {
    nlohmann::ordered_json r;
    r["eps_requested"] = pt.eps_requested;
    r["eps"] = pt.eps;
    r["n"] = pt.n;
    r["theta_s"] = pt.theta_s;
    r["theta_s_over_eps"] = pt.scaled;
    r["error"] = pt.error;
    pts.push_back(r);
  }
  j["points"] = pts;
  j["alpha"] = rep.alpha;
  nlohmann::ordered_json oracle;
  oracle["method"] = "centred finite differences, hard walls";
  oracle["lowest_positive_level"] = rep.dirac_energy;
  oracle["half_width"] = rep.grid.half_width;
  oracle["points"] = rep.grid.points;
  oracle["self_convergence"] = rep.dirac_self_convergence;
  j["oracle"] = oracle;
  io::write_file_atomic(cfg.out, j.dump(2) + "\n");
}

inline void run_classical(const RunConfig& cfg) {
  require_out(cfg);
  const double mass = cfg.mass.value_or(1.0);
  if (!(mass > 0.0)) throw config_error("--mass must be positive");
  const double omega = cfg.eB / mass;
  if (omega == 0.0) throw Error(ErrorKind::ZeroOmega, "--eb must be nonzero");
  const double period = kTwoPi / std::abs(omega);
  const double dt = cfg.dt > 0.0 ? cfg.dt : period / 1000.0;
  const auto steps = static_cast<std::size_t>(cfg.steps > 0 ? cfg.steps : 1000);
  const ClassicalState s0{cfg.x0, cfg.y0, cfg.px0, cfg.py0};
  const auto run = classical_integrate(s0, mass, cfg.eB, dt, steps);
  const auto z0 = to_complex(s0, mass, cfg.eB);

  std::string csv = "t,x,y,px,py\n";
  double worst = 0.0;
  for (std::size_t j = 0; j < run.states.size(); ++j) {
    const auto& s = run.states[j];
    csv += io::format_double(run.times[j]) + "," + io::format_double(s.x) + "," + io::format_double(s.y) +
           "," + io::format_double(s.px) + "," + io::format_double(s.py) + "\n";
    const auto exact = classical_analytic(z0.V, z0.X, omega, run.times[j]);
    worst = std::max(worst, std::abs(exact.X - cplx{s.x, s.y}));
  }
  io::write_file_atomic(cfg.out, csv);

  const auto sol = classical_solution(z0.V, z0.X, omega);
  const auto limit = constrained_limit_check(s0, mass, cfg.eB);
  nlohmann::ordered_json j;
  j["command"] = cfg.command;
  j["mass"] = mass;
  j["eB"] = cfg.eB;
  j["dt"] = dt;
  j["steps"] = steps;
  j["radius"] = sol.R;
  j["center"] = {sol.Xc.real(), sol.Xc.imag()};
  j["drift_energy"] = run.drift.energy;
  j["drift_py"] = run.drift.py;
  j["drift_px_minus_mwy"] = run.drift.px_minus_mwy;
  j["max_deviation_from_analytic"] = worst;
  j["constrained_limit_residual"] = limit.residual;
  j["constrained_limit_skipped"] = limit.skipped;
  io::write_file_atomic(sidecar_path(cfg.out), j.dump(2) + "\n");
}

inline void run_qm(const RunConfig& cfg) {
  require_out(cfg);
  const int level = cfg.n.value_or(0);
  const double mass = cfg.mass.value_or(1.0);
  const double centre_p = cfg.p;
  const double dp = 0.25;
  std::string csv = "p,avg_x\n";
  std::vector<double> ps, xs;
  for (int k = -2; k <= 2; ++k) {
    const double p = centre_p + dp * k;
    const double x = qm_average_x(level, p, mass, cfg.eB, cfg.hbar);
    ps.push_back(p);
    xs.push_back(x);
    csv += io::format_double(p) + "," + io::format_double(x) + "\n";
  }
  io::write_file_atomic(cfg.out, csv);
  // five-point derivative at the centre
  const double slope = (xs[0] - 8 * xs[1] + 8 * xs[3] - xs[4]) / (12 * dp);

  nlohmann::ordered_json j;
  j["command"] = cfg.command;
  j["level"] = level;
  j["mass"] = mass;
  j["eB"] = cfg.eB;
  j["hbar"] = cfg.hbar;
  j["energy"] = qm_landau_level(level, mass, cfg.eB, cfg.hbar);
  j["slope"] = slope;
  j["expected_slope"] = 1.0 / cfg.eB;
  if (centre_p != 0.0) {
    const auto d = ncg_regime_diagnostic(level, centre_p, cfg.eB, cfg.hbar);
    j["regime_ratio"] = d.ratio;
    j["width_over_center"] = d.width_over_center;
    j["in_regime"] = d.in_regime;
  }
  io::write_file_atomic(sidecar_path(cfg.out), j.dump(2) + "\n");
}

/// Parses argv and runs one subcommand. Never throws.
inline int run_cli(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  CLI::App app{"Magnetic quantum walk spectra, NCG marker sweeps and reference oracles"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_walk = [&](CLI::App* sc) {
    sc->add_option("--n", cfg.n, "flux denominator N (eps^2 eB / hbar = 2 pi / N)");
    sc->add_option("--epsilon", cfg.epsilon, "lattice step");
    sc->add_option("--hbar", cfg.hbar, "reduced Planck constant");
    auto* mass = sc->add_option("--mass", cfg.mass, "walk mass");
    auto* massless = sc->add_flag("--massless", cfg.massless, "m = 0");
    auto* tp = sc->add_option("--theta-plus", cfg.theta_plus, "coin angle theta+ (overrides mass)");
    auto* tm = sc->add_option("--theta-minus", cfg.theta_minus, "coin angle theta-");
    mass->excludes(massless);
    tp->excludes(massless)->excludes(mass);
    tm->excludes(massless)->excludes(mass);
    sc->add_option("--pbar", cfg.p_bar, "reduced momentum");
    sc->add_option("--grid", cfg.grid, "p_bar grid size");
    sc->add_option("--out", cfg.out, "output path");
    sc->add_option("--seed", cfg.seed, "seed for randomised choices");
  };

  auto* sweep = app.add_subcommand("sweep", "theta_S, <q> and d<q>/dp_bar over p_bar (CSV + JSON)");
  add_walk(sweep);
  sweep->add_option("--svg", cfg.svg, "also write an SVG plot");
  auto* spectrum = app.add_subcommand("spectrum", "eigenphases at one p_bar (CSV + JSON)");
  add_walk(spectrum);
  auto* ex1 = app.add_subcommand("example1", "sweep of the massless N = 3 walk");
  ex1->add_option("--grid", cfg.grid, "p_bar grid size");
  ex1->add_option("--out", cfg.out, "output path");
  ex1->add_option("--svg", cfg.svg, "also write an SVG plot");
  auto* ex2 = app.add_subcommand("example2", "sweep and analytic eigenvectors of the theta+ = pi/2, theta- = 0 walk");
  ex2->add_option("--n", cfg.n, "flux denominator N");
  ex2->add_option("--grid", cfg.grid, "p_bar grid size");
  ex2->add_option("--pbar", cfg.p_bar, "momentum for the analytic eigenvector check");
  ex2->add_option("--out", cfg.out, "output path");
  ex2->add_option("--svg", cfg.svg, "also write an SVG plot");
  auto* charpoly = app.add_subcommand("charpoly-check", "characteristic polynomial by trace recursion (JSON)");
  add_walk(charpoly);
  auto* converge = app.add_subcommand("converge", "continuum-limit convergence order (JSON)");
  {
    auto* mass = converge->add_option("--mass", cfg.mass, "walk mass");
    auto* massless = converge->add_flag("--massless", cfg.massless, "m = 0");
    mass->excludes(massless);
    converge->add_option("--eps-list", cfg.eps_list, "comma separated eps values")->delimiter(',');
    converge->add_option("--eb", cfg.eB, "charge-field product eB");
    converge->add_option("--hbar", cfg.hbar, "reduced Planck constant");
    converge->add_option("--p", cfg.p, "momentum label");
    converge->add_option("--grid", cfg.grid, "Dirac oracle grid points");
    converge->add_option("--out", cfg.out, "output path");
  }
  auto* classical = app.add_subcommand("classical", "classical orbit, first integrals (CSV + JSON)");
  classical->add_option("--mass", cfg.mass, "mass");
  classical->add_option("--eb", cfg.eB, "charge-field product eB");
  classical->add_option("--dt", cfg.dt, "time step (default period / 1000)");
  classical->add_option("--steps", cfg.steps, "number of steps (default 1000)");
  classical->add_option("--x0", cfg.x0);
  classical->add_option("--y0", cfg.y0);
  classical->add_option("--px0", cfg.px0);
  classical->add_option("--py0", cfg.py0);
  classical->add_option("--out", cfg.out, "output path");
  auto* qm = app.add_subcommand("qm", "spinless Landau level and <x>(p) (CSV + JSON)");
  qm->add_option("--n", cfg.n, "level index");
  qm->add_option("--mass", cfg.mass, "mass");
  qm->add_option("--eb", cfg.eB, "charge-field product eB");
  qm->add_option("--hbar", cfg.hbar, "reduced Planck constant");
  qm->add_option("--p", cfg.p, "centre momentum");
  qm->add_option("--out", cfg.out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out_stream;
    app.exit(e, out_stream, err);
    return kExitConfig;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    cfg.command = chosen->get_name();
    if (chosen == sweep) run_sweep(cfg);
    else if (chosen == spectrum) run_spectrum(cfg);
    else if (chosen == ex1) run_example1(cfg);
    else if (chosen == ex2) run_example2(cfg);
    else if (chosen == charpoly) run_charpoly_check(cfg);
    else if (chosen == converge) run_converge(cfg);
    else if (chosen == classical) run_classical(cfg);
    else if (chosen == qm) run_qm(cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_config_error(e.kind()) ? kExitConfig : kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace mqw::cli
