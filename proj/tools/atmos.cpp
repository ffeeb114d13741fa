// atmos: command-line front end.

#include "atmos/experiments.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace atmos;

namespace
{

struct ModelArgs
{
  double gamma = 1.5;
  double R = 2.0;
};

void add_model(CLI::App* sub, ModelArgs& m)
{
  sub->add_option("--gamma", m.gamma, "adiabatic exponent in (1, 2]")->capture_default_str();
  sub->add_option("--R", m.R, "equilibrium outer radius, > 1")->capture_default_str();
}

void ensure_parent(const std::string& path)
{
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
}

void print_checks(const RunReport& r)
{
  for (const auto& m : r.checks)
    std::cout << (m.pass ? "  ok   " : (m.fatal ? "  FAIL " : "  flag ")) << m.name << " = " << std::setprecision(8)
              << m.value << "  [" << m.lo << ", " << m.hi << "]" << (m.note.empty() ? "" : "  " + m.note) << "\n";
}

int cmd_equilibrium(const ModelArgs& m, int samples, const std::string& out)
{
  const auto p = make_params(m.gamma, m.R);
  const CoordinateChart ch(p);
  if (samples < 2)
    throw DomainError("--samples must be >= 2");
  ensure_parent(out);
  std::ofstream f(out);
  if (!f)
    throw IoError("cannot open '" + out + "' for writing");
  f << std::setprecision(17);
  f << "# gamma=" << p.gamma() << ",N=" << p.N() << ",R=" << p.R() << ",M=" << total_mass(p) << "\n";
  f << "r,z,xi,x,rho_bar,P_bar\n";
  for (int k = 0; k < samples; ++k) {
    const double r = std::min(p.R(), 1.0 + (p.R() - 1.0) * k / (samples - 1));
    const auto c = ch.forward(r);
    f << r << "," << c.z << "," << c.xi << "," << c.x << "," << equilibrium_density(p, r) << ","
      << equilibrium_pressure(p, r) << "\n";
  }
  if (!f)
    throw IoError("write failed: " + out);
  return 0;
}

int cmd_spectrum(const ModelArgs& m, int nmodes, const std::string& method, int n, const std::string& out,
                 const std::string& plot)
{
  const auto c = build_L_coeffs(make_params(m.gamma, m.R));
  const WeightedGrid g(c, n);
  const auto col = collocation_spectrum(c, g, nmodes);
  std::vector<double> idx, lam, phi0, zeros, delta;
  for (const auto& cm : col) {
    double l = cm.lambda, p0 = cm.phi0, d = 0.0;
    int z = cm.zeros;
    if (method != "collocation") {
      const auto w = shooting_window(c, cm.lambda);
      const auto sm = shoot_eigen(c, w.first, w.second, cm.index, &g);
      d = (sm.lambda - cm.lambda) / cm.lambda;
      if (method == "shooting") {
        l = sm.lambda;
        p0 = sm.phi0;
        z = sm.zeros;
      }
    }
    idx.push_back(cm.index);
    lam.push_back(l);
    phi0.push_back(p0);
    zeros.push_back(z);
    delta.push_back(d);
  }
  ensure_parent(out);
  write_csv(out, {"n", "lambda", "phi0", "zeros", "method_delta"}, {idx, lam, phi0, zeros, delta});
  if (!plot.empty()) {
    PlotSeries ref{"(pi^2/4) n^2 / x_R", {}, {}, true, false};
    for (double k : idx) {
      ref.x.push_back(k);
      ref.y.push_back(std::numbers::pi * std::numbers::pi / 4.0 * k * k / c.x_R());
    }
    emit_plot(plot, {"spectrum", "n", "lambda_n", false, false}, {{"lambda_n", idx, lam, false, true}, ref});
  }
  int bad = 0;
  if (method == "both")
    for (double d : delta)
      bad += std::abs(d) > 1e-6 ? 1 : 0;
  return bad ? 1 : 0;
}

int cmd_operator_dump(const ModelArgs& m, int n, const std::string& out)
{
  const auto c = build_L_coeffs(make_params(m.gamma, m.R));
  const WeightedGrid g(c, n);
  std::vector<double> L1, L0;
  for (double x : g.x()) {
    L1.push_back(c.L1(x));
    L0.push_back(c.L0(x));
  }
  ensure_parent(out);
  write_csv(out, {"x", "L1", "L0", "weight", "mass"}, {g.x(), L1, L0, g.weight(), g.mass()});
  return 0;
}

struct SimArgs
{
  int mode = 1;
  double eps = 1e-3;
  double T = 0.0;
  int n = 256;
  std::string dt = "auto";
  std::string out = "run";
  int snapshots = 8;
};

int cmd_simulate(const ModelArgs& ma, const SimArgs& a)
{
  const auto p = make_params(ma.gamma, ma.R);
  const auto c = build_L_coeffs(p);
  const WeightedGrid g(c, a.n);
  const auto mode = collocation_spectrum(c, g, a.mode).back();
  const auto y1 = LinearModeSolution::single(mode);
  const double period = 2.0 * std::numbers::pi / std::sqrt(mode.lambda);
  TimeOptions o;
  o.T = a.T > 0.0 ? a.T : 5.5 * period;
  o.dt = a.dt == "auto" ? 0.0 : std::stod(a.dt);
  const double dt = o.dt > 0.0 ? o.dt : auto_time_step(assemble_L(c, g).A, g, 1.0, o.cfl);
  o.snapshot_every = std::max(1, int(o.T / dt / std::max(1, a.snapshots)));

  RunReport rep;
  rep.kind = "simulate";
  rep.environment["gamma"] = p.gamma();
  rep.environment["R"] = p.R();
  rep.environment["n"] = a.n;
  rep.environment["mode"] = a.mode;
  rep.environment["eps"] = a.eps;
  rep.environment["T"] = o.T;

  NonlinearRun run;
  try {
    run = nonlinear_simulate(p, c, g, y1, a.eps, o);
  }
  catch (const AdmissibilityError& e) {
    rep.check("admissible", 0.0, 1.0, 1.0, e.what());
    emit_report(rep, a.out + "_report", "json");
    print_checks(rep);
    return 1;
  }
  rep.check("admissible", 1.0, 1.0, 1.0);
  rep.check("min_margin", run.report.min_margin, 0.0, 1.0);
  rep.check("sup_w", run.report.w_sup, 0.0, std::numeric_limits<double>::infinity(), "sup|y - eps y1| / eps");

  const auto& tr = run.traj;
  std::vector<double> RF;
  for (double b : tr.boundary)
    RF.push_back(p.R() * (1.0 + b));
  ensure_parent(a.out);
  write_csv(a.out + "_series.csv", {"t", "y_boundary", "R_F", "E"}, {tr.t, tr.boundary, RF, tr.energy});

  std::vector<double> st, sx, sy, syt, et, er, erho, eu;
  double worst_exp = 0.0;
  const double target = 1.0 / (p.gamma() - 1.0);
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& s : tr.snapshots) {
    for (int i = 0; i < g.n(); ++i) {
      st.push_back(s.t);
      sx.push_back(g.x()[i]);
      sy.push_back(s.y[i]);
      syt.push_back(s.yt[i]);
    }
    const auto f = euler_reconstruct(p, g, s);
    for (std::size_t i = 0; i < f.r.size(); ++i) {
      et.push_back(s.t);
      er.push_back(f.r[i]);
      erho.push_back(f.rho[i]);
      eu.push_back(f.u[i]);
    }
    if (a.eps > 0.0 || s.t == 0.0) {
      const auto e = vacuum_exponent_fit(p, f);
      fits.push_back({{"t", s.t}, {"exponent", e.exponent}, {"points", e.points}});
      worst_exp = std::max(worst_exp, std::abs(e.exponent - target) / target);
    }
  }
  write_csv(a.out + "_snapshots.csv", {"t", "x", "y", "yt"}, {st, sx, sy, syt});
  write_csv(a.out + "_euler.csv", {"t", "r", "rho", "u"}, {et, er, erho, eu});
  rep.check("exponent_rel_dev", worst_exp, 0.0, 0.02, "density exponent near R_F vs 1/(gamma-1)");
  rep.records.push_back({{"exponent_fits", fits}});

  if (a.eps > 0.0) {
    try {
      const auto pe = period_measure(tr.t, tr.boundary);
      rep.check("period_rel_error", std::abs(pe.period - period) / period, 0.0, 0.01);
      rep.records.push_back({{"period", pe.period}, {"predicted", period}, {"jitter", pe.jitter}});
    }
    catch (const InsufficientDataError& e) {
      rep.check("period_measured", 0.0, 1.0, 1.0, e.what(), false);
    }
  }
  emit_plot(a.out + "_boundary.svg", {"free boundary", "t", "R_F(t)", false, false}, {{"R_F", tr.t, RF, false, false}});
  emit_report(rep, a.out + "_report", "json");
  print_checks(rep);
  return rep.passed() ? 0 : 1;
}

void write_outputs(const RunReport& rep, const std::string& prefix)
{
  ensure_parent(prefix);
  emit_report(rep, prefix, "json");
  emit_report(rep, prefix, "csv");
}

int run_selftest(bool quick, const std::vector<int>& only, const std::string& out)
{
  // the fast criteria only
  const std::vector<int> quick_set{1, 3, 4, 9};
  int failed = 0, ran = 0;
  for (const auto& c : acceptance_criteria()) {
    const auto& sel = !only.empty() ? only : (quick ? quick_set : std::vector<int>{});
    if (!sel.empty() && std::find(sel.begin(), sel.end(), c.id) == sel.end())
      continue;
    const auto o = run_criterion(c);
    std::cout << outcome_line(o) << std::endl;
    if (!out.empty())
      write_outputs(o.report, out + "/criterion_" + std::to_string(c.id));
    failed += o.pass ? 0 : 1;
    ++ran;
  }
  if (ran == 0)
    throw DomainError("selftest: no criterion selected");
  std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
  return failed ? 1 : 0;
}

int selftest_nonlinearity()
{
  const auto r = identity_suites(1, 100);
  std::cout << std::setprecision(3) << "split form vs original, max abs residual over " << r.states
            << " states: " << r.split_vs_original << " (limit 1e-10)\n"
            << "closed form vs partials, max relative difference: " << r.closed_vs_partials << " (limit 1e-6)\n"
            << "derivative integral identity, max relative residual: " << r.integral_identity << " (limit 1e-8)\n";
  const bool ok = r.split_vs_original <= 1e-10 && r.closed_vs_partials <= 1e-6 && r.integral_identity <= 1e-8;
  std::cout << (ok ? "PASS" : "FAIL") << std::endl;
  return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Polytropic atmosphere oscillations: equilibria, spectra and free-boundary dynamics"};
  app.set_version_flag("--version", version_string);
  app.require_subcommand(0, 1);
  std::string hidden_selftest;
  app.add_option("--selftest", hidden_selftest)->group("");

  ModelArgs model;
  int samples = 201, n = 512, nmodes = 5;
  std::string out, method = "both", plot, config;

  auto* eq = app.add_subcommand("equilibrium", "sample the equilibrium profile");
  add_model(eq, model);
  eq->add_option("--samples", samples)->capture_default_str();
  eq->add_option("--out", out)->required();

  auto* sp = app.add_subcommand("spectrum", "eigenvalues of the linearized operator");
  add_model(sp, model);
  sp->add_option("--nmodes", nmodes)->capture_default_str();
  sp->add_option("--method", method)->check(CLI::IsMember({"shooting", "collocation", "both"}))->capture_default_str();
  sp->add_option("--n", n, "grid nodes")->capture_default_str();
  sp->add_option("--out", out)->required();
  sp->add_option("--plot", plot, "SVG of lambda_n against n");

  auto* orc = app.add_subcommand("oracle", "exact reference values");
  auto* bz = orc->add_subcommand("bessel-zeros", "positive zeros of J_nu");
  orc->require_subcommand(1);
  double nu = 1.0;
  int count = 5;
  bz->add_option("--nu", nu)->required();
  bz->add_option("--count", count)->capture_default_str();

  auto* od = app.add_subcommand("operator-dump", "operator coefficients and quadrature weights on the grid");
  add_model(od, model);
  od->add_option("--n", n)->capture_default_str();
  od->add_option("--out", out)->required();

  SimArgs sim;
  auto* si = app.add_subcommand("simulate", "nonlinear single-mode run");
  add_model(si, model);
  si->add_option("--mode", sim.mode)->capture_default_str();
  si->add_option("--eps", sim.eps)->capture_default_str();
  si->add_option("--T", sim.T, "final time, default 5.5 periods");
  si->add_option("--n", sim.n)->capture_default_str();
  si->add_option("--dt", sim.dt, "step or 'auto'")->capture_default_str();
  si->add_option("--out", sim.out, "output prefix")->capture_default_str();
  si->add_option("--snapshots", sim.snapshots)->capture_default_str();

  std::vector<double> eps_override;
  std::vector<int> grid_override;
  auto* sw = app.add_subcommand("sweep", "epsilon sweep of the nonlinear deviation");
  sw->add_option("--config", config)->required()->check(CLI::ExistingFile);
  sw->add_option("--eps", eps_override, "override the eps list")->delimiter(',');
  sw->add_option("--n", grid_override, "override the grid")->delimiter(',');
  sw->add_option("--out", out, "output prefix");

  auto* cv = app.add_subcommand("converge", "grid and step refinement study");
  cv->add_option("--config", config)->required()->check(CLI::ExistingFile);
  cv->add_option("--n", grid_override, "override the grid sizes")->delimiter(',');
  cv->add_option("--out", out, "output prefix");

  bool quick = false;
  std::vector<int> only;
  auto* st = app.add_subcommand("selftest", "acceptance criteria");
  st->add_flag("--quick", quick, "fast criteria only");
  st->add_option("--criterion", only, "run only these criteria (1-10)");
  st->add_option("--out", out, "directory for per-criterion reports");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!hidden_selftest.empty()) {
      if (hidden_selftest != "nonlinearity")
        throw DomainError("--selftest accepts only 'nonlinearity'");
      return selftest_nonlinearity();
    }
    if (*eq)
      return cmd_equilibrium(model, samples, out);
    if (*sp)
      return cmd_spectrum(model, nmodes, method, n, out, plot);
    if (*bz) {
      std::cout << std::setprecision(15);
      for (double z : bessel_zeros(nu, count))
        std::cout << z << "\n";
      return 0;
    }
    if (*od)
      return cmd_operator_dump(model, n, out);
    if (*si)
      return cmd_simulate(model, sim);
    if (*sw || *cv) {
      RunConfig cfg = load_config(config);
      if (!eps_override.empty())
        cfg.eps = eps_override;
      if (!grid_override.empty())
        cfg.grids = grid_override;
      cfg.validate();
      const std::string prefix =
          out.empty() ? (std::filesystem::path(cfg.output_dir) / (*sw ? "sweep" : "converge")).string() : out;
      RunReport rep;
      if (*sw) {
        std::vector<SweepMember> members;
        rep = run_epsilon_sweep(cfg, &members);
        write_outputs(rep, prefix);
        if (!members.empty())
          emit_sweep_plot(members, prefix + ".svg");
      }
      else {
        rep = run_convergence_study(cfg);
        write_outputs(rep, prefix);
      }
      print_checks(rep);
      return rep.passed() ? 0 : 1;
    }
    if (*st)
      return run_selftest(quick, only, out);
    std::cout << app.help();
    return 0;
  }
  catch (const Error& e) {
    std::cerr << "atmos: " << e.what() << "\n";
    return 2;
  }
  catch (const std::exception& e) {
    std::cerr << "atmos: " << e.what() << "\n";
    return 2;
  }
}
