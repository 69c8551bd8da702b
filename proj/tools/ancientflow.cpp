#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ancientflow/ancient.hpp"
#include "ancientflow/entropy.hpp"
#include "ancientflow/errors.hpp"
#include "ancientflow/flow.hpp"
#include "ancientflow/io.hpp"
#include "ancientflow/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kPalette = {"#1f77b4", "#d62728", "#2ca02c",
                                           "#9467bd", "#8c564b", "#e377c2"};

struct GlobalArgs {
  std::string out = "out";
  int n_grid = 256;
  int threads = 1;
};

af::ShrinkerProfile load_profile(double alpha, int k, int n_grid) {
  return k == 0 ? af::circle_shrinker(alpha, n_grid) : af::solve_shrinker(alpha, k, n_grid);
}

void write_profile_files(const fs::path& dir, const af::ShrinkerProfile& p) {
  const int n = p.h.N();
  af::MatrixXd table(n, 4);
  table.col(0) = af::theta_grid(n);
  table.col(1) = p.h.samples;
  table.col(2) = af::differentiate(p.h, 1);
  // raw radius: near-polygonal profiles have flat sides where the gated
  // curvature() accessor would reject the noise-level values
  table.col(3) = af::differentiate(p.h, 2) + p.h.samples;
  af::write_text_atomic(dir / "shrinker_profile.csv",
                        af::csv_table({"theta", "h", "h_theta", "radius"}, table));
  if (p.theta_table.rows() > 0)
    af::write_text_atomic(dir / "theta_table.csv",
                          af::csv_table({"r", "Theta"}, p.theta_table));
  json meta = {{"alpha", p.alpha},       {"k", p.k},
               {"r_star", p.r_star},     {"residual", p.residual},
               {"n_grid", p.h.N()},      {"length", af::length(p.h)},
               {"area", af::area(p.h)}};
  af::write_json_atomic(dir / "shrinker.json", meta);
  af::write_text_atomic(dir / "shrinker.svg",
                        af::svg_curves({af::boundary_points(p.h)}, {"black"}));
}

int cmd_shrinker(const GlobalArgs& g, double alpha, int k) {
  af::ShrinkerProfile p = af::solve_shrinker(alpha, k, g.n_grid);
  write_profile_files(g.out, p);
  std::printf("shrinker k=%d alpha=%s: r_star=%s residual=%s\n", k, af::fmt_double(alpha).c_str(),
              af::fmt_double(p.r_star).c_str(), af::fmt_double(p.residual).c_str());
  return 0;
}

int cmd_spectrum(const GlobalArgs& g, double alpha, int k, int modes) {
  af::ShrinkerProfile p = load_profile(alpha, k, g.n_grid);
  if (modes <= 0) modes = k == 0 ? 18 : 2 * k + 4;
  af::SpectralDecomposition dec = af::eigs(af::build_operator(p, g.n_grid), modes);

  std::vector<int> group(modes, 0);
  for (size_t c = 0; c < dec.clusters.size(); ++c)
    for (int idx : dec.clusters[c]) group[idx] = static_cast<int>(c) + 1;
  af::MatrixXd table(modes, 4);
  for (int i = 0; i < modes; ++i) {
    table(i, 0) = i + 1;
    table(i, 1) = dec.lambda[i];
    table(i, 2) = group[i];
    table(i, 3) = dec.nodal_counts[i];
  }
  fs::path dir = g.out;
  af::write_text_atomic(dir / "spectrum.csv",
                        af::csv_table({"index", "lambda", "multiplicity_group", "nodal_count"},
                                      table));
  af::MatrixXd funcs(g.n_grid, modes + 1);
  funcs.col(0) = af::theta_grid(g.n_grid);
  funcs.rightCols(modes) = dec.phi;
  std::vector<std::string> header{"theta"};
  for (int i = 1; i <= modes; ++i) header.push_back("phi" + std::to_string(i));
  af::write_text_atomic(dir / "eigenfunctions.csv", af::csv_table(header, funcs));

  af::SpectrumReport rep = af::verify_spectrum(dec, p);
  json checks = json::array();
  for (const auto& it : rep.items)
    checks.push_back(
        {{"name", it.name}, {"pass", it.pass}, {"asserted", it.asserted}, {"detail", it.detail}});
  json meta = {{"alpha", alpha},
               {"k", k},
               {"morse_index", dec.morse_index},
               {"kernel_dim", dec.kernel_dim},
               {"lambda", std::vector<double>(dec.lambda.begin(), dec.lambda.end())},
               {"checks", checks},
               {"all_pass", rep.all_pass()}};
  af::write_json_atomic(dir / "spectrum.json", meta);
  std::printf("spectrum k=%d alpha=%s: morse_index=%d kernel_dim=%d lambda1=%s\n", k,
              af::fmt_double(alpha).c_str(), dec.morse_index, dec.kernel_dim,
              af::fmt_double(dec.lambda[0]).c_str());
  return 0;
}

int cmd_evolve(const GlobalArgs& g, double alpha, int k, double radius, const std::string& gauge,
               double t_start, double t_end, double tol, double interval) {
  if (!(t_end > t_start)) throw af::DomainError("evolve needs t-end > t-start");
  af::SupportFunction u0 =
      k >= 0 ? load_profile(alpha, k, g.n_grid).h
             : af::make_support(alpha, af::VectorXd::Constant(g.n_grid, radius));
  af::Gauge gg = gauge == "raw" ? af::Gauge::Raw : af::Gauge::Normalized;
  af::FlowOptions fo;
  fo.t_start = t_start;
  fo.tol = tol;
  fo.snapshot_interval = interval > 0 ? interval : (t_end - t_start) / 8;
  af::FlowTrajectory traj = af::evolve(u0, gg, t_end, fo);
  af::EntropySeries es = af::entropy_along(traj);

  const size_t ns = traj.snapshots.size();
  af::MatrixXd table(static_cast<Eigen::Index>(ns), 4);
  for (size_t i = 0; i < ns; ++i) {
    table(i, 0) = traj.times[i];
    table(i, 1) = es.values[static_cast<Eigen::Index>(i)];
    table(i, 2) = af::curvature(traj.snapshots[i]).radius.minCoeff();
    table(i, 3) = (traj.snapshots[i].samples - u0.samples).cwiseAbs().maxCoeff();
  }
  fs::path dir = g.out;
  af::write_text_atomic(dir / "trajectory.csv",
                        af::csv_table({"time", "entropy", "min_radius", "sup_drift"}, table));

  af::MatrixXd snaps(g.n_grid, static_cast<Eigen::Index>(ns) + 1);
  snaps.col(0) = af::theta_grid(g.n_grid);
  std::vector<std::string> header{"theta"};
  std::vector<af::MatrixXd> curves;
  for (size_t i = 0; i < ns; ++i) {
    snaps.col(static_cast<Eigen::Index>(i) + 1) = traj.snapshots[i].samples;
    header.push_back("u_" + std::to_string(i));
    curves.push_back(af::boundary_points(traj.snapshots[i]));
  }
  af::write_text_atomic(dir / "snapshots.csv", af::csv_table(header, snaps));
  af::write_text_atomic(dir / "flow.svg", af::svg_curves(curves, kPalette));
  json meta = {{"gauge", gauge},
               {"times", traj.times},
               {"accepted", traj.accepted},
               {"rejected", traj.rejected},
               {"min_radius", traj.min_radius},
               {"entropy_nonincreasing", es.nonincreasing}};
  af::write_json_atomic(dir / "evolve.json", meta);
  std::printf("evolve: %zu snapshots, %ld accepted steps, entropy %s\n", ns, traj.accepted,
              es.nonincreasing ? "nonincreasing" : "NOT monotone");
  return 0;
}

int cmd_entropy(const GlobalArgs& g, double alpha, int k, double radius) {
  af::SupportFunction u =
      k >= 0 ? load_profile(alpha, k, g.n_grid).h
             : af::make_support(alpha, af::VectorXd::Constant(g.n_grid, radius));
  af::EntropyReport rep = af::entropy(u);
  json meta = {{"alpha", alpha},
               {"shape", k >= 0 ? (k == 0 ? "circle-shrinker" : "shrinker") : "circle"},
               {"value", rep.value},
               {"center", {rep.center[0], rep.center[1]}},
               {"inner_value_at_centroid", rep.inner_value_at_centroid},
               {"iterations", rep.iterations}};
  af::write_json_atomic(fs::path(g.out) / "entropy.json", meta);
  std::printf("entropy = %s at center (%s, %s)\n", af::fmt_double(rep.value).c_str(),
              af::fmt_double(rep.center[0]).c_str(), af::fmt_double(rep.center[1]).c_str());
  return 0;
}

int cmd_ancient(const GlobalArgs& g, const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw af::DomainError("cannot open run config " + config_path);
  json cfg = json::parse(in);
  const std::set<std::string> allowed = {"alpha", "k_or_circle", "a",    "N",
                                         "T_max", "tau0",        "tol_fix", "dtau",
                                         "epsilon0"};
  for (const auto& item : cfg.items())
    if (!allowed.count(item.key()))
      throw af::DomainError("unknown key '" + item.key() + "' in run config");
  for (const char* key : {"alpha", "k_or_circle", "a"})
    if (!cfg.contains(key)) throw af::DomainError(std::string("run config missing '") + key + "'");

  double alpha = cfg["alpha"].get<double>();
  int k = 0;
  if (cfg["k_or_circle"].is_string()) {
    if (cfg["k_or_circle"].get<std::string>() != "circle")
      throw af::DomainError("k_or_circle must be an integer or \"circle\"");
  } else {
    k = cfg["k_or_circle"].get<int>();
  }
  int N = cfg.value("N", g.n_grid);
  af::AncientOptions opts;
  opts.T_max = cfg.value("T_max", 0.0);
  opts.tau0 = cfg.value("tau0", -1.0);
  opts.tol_fix = cfg.value("tol_fix", 1e-10);
  opts.dtau = cfg.value("dtau", 1.0 / 128);
  opts.epsilon0 = cfg.value("epsilon0", 1e-2);

  af::ShrinkerProfile p = load_profile(alpha, k, N);
  af::SpectralDecomposition dec = af::eigs(af::build_operator(p, N), k == 0 ? 18 : 2 * k + 4);
  std::vector<double> a_in = cfg["a"].get<std::vector<double>>();
  af::CoefficientVector cv;
  cv.a = Eigen::Map<const af::VectorXd>(a_in.data(), static_cast<Eigen::Index>(a_in.size()));
  cv.lambda = dec.lambda.head(dec.morse_index);
  if (cv.a.size() != dec.morse_index)
    throw af::DomainError("run config 'a' has " + std::to_string(cv.a.size()) +
                          " entries; Morse index is " + std::to_string(dec.morse_index));

  double T_shift = 0.0;
  af::CoefficientVector cv_run = cv;
  if (cv.a.norm() >= opts.epsilon0) {
    auto shifted = af::time_shift(cv, opts.epsilon0 * opts.epsilon0);
    cv_run = shifted.first;
    T_shift = shifted.second;
  }
  af::AncientSolution sol = af::construct_ancient(p, dec, cv_run, opts);
  sol.T_shift = T_shift;
  double sup_v = sol.v.size() ? sol.v.cwiseAbs().maxCoeff() : 0.0;

  // Mode coefficient histories of the full field.
  const Eigen::Index nt = sol.tau.size();
  const int I = dec.morse_index;
  af::MatrixXd coef = dec.phi.leftCols(I).transpose() * (dec.op.W.asDiagonal() * sol.v);
  af::MatrixXd rows(nt * I, 3);
  for (int m = 0; m < I; ++m)
    for (Eigen::Index i = 0; i < nt; ++i) {
      rows(m * nt + i, 0) = sol.tau[i];
      rows(m * nt + i, 1) = m + 1;
      rows(m * nt + i, 2) = coef(m, i);
    }
  fs::path dir = g.out;
  af::write_text_atomic(dir / "mode_coefficients.csv",
                        af::csv_table({"tau", "mode", "coefficient"}, rows));

  // Nine evenly spaced full-field snapshots.
  af::MatrixXd snaps(N, 10);
  snaps.col(0) = af::theta_grid(N);
  std::vector<std::string> header{"theta"};
  std::vector<af::MatrixXd> curves;
  for (int i = 0; i < 9; ++i) {
    Eigen::Index idx = (nt - 1) * i / 8;
    snaps.col(i + 1) = p.h.samples + sol.v.col(idx);
    header.push_back("tau_" + std::to_string(i));
    af::SupportFunction u = af::make_support(alpha, snaps.col(i + 1));
    curves.push_back(af::boundary_points(u));
  }
  af::write_text_atomic(dir / "ancient_snapshots.csv", af::csv_table(header, snaps));
  af::write_text_atomic(dir / "ancient.svg", af::svg_curves(curves, kPalette));

  json layers = json::array();
  for (size_t l = 0; l < sol.layers.size(); ++l) {
    std::vector<int> modes1;
    for (int m : sol.layers[l].modes) modes1.push_back(m + 1);
    layers.push_back({{"layer", l + 1},
                      {"modes", modes1},
                      {"delta", sol.layers[l].delta},
                      {"iterations", sol.layers[l].iterations},
                      {"final_change", sol.layers[l].final_change}});
  }
  json rates = json::array();
  if (cv_run.a.norm() > 0)
    for (const auto& r : af::layer_rates(sol, dec))
      rates.push_back({{"mode", r.mode + 1},
                       {"slope", r.slope},
                       {"amplitude", r.amplitude},
                       {"a_recovered", r.a_recovered}});
  json meta = {{"alpha", alpha},
               {"k_or_circle", k == 0 ? json("circle") : json(k)},
               {"a", a_in},
               {"a_run", std::vector<double>(cv_run.a.begin(), cv_run.a.end())},
               {"lambda", std::vector<double>(cv.lambda.begin(), cv.lambda.end())},
               {"morse_index", dec.morse_index},
               {"T_shift", T_shift},
               {"T_max", opts.T_max > 0 ? opts.T_max : 40.0 / (1.0 + alpha)},
               {"tau0", opts.tau0},
               {"sup_v", sup_v},
               {"pde_residual", sol.pde_residual},
               {"layers", layers},
               {"rates", rates}};
  af::write_json_atomic(dir / "ancient.json", meta);
  std::printf("ancient: sup|v| = %s, pde residual = %s, T_shift = %s\n",
              af::fmt_double(sup_v).c_str(), af::fmt_double(sol.pde_residual).c_str(),
              af::fmt_double(T_shift).c_str());
  return 0;
}

int cmd_verify(const GlobalArgs& g, const std::string& filter, const std::string& fault) {
  af::VerifyOptions vo;
  vo.filter = filter;
  vo.inject_fault = fault;
  vo.n_grid = g.n_grid;
  af::VerifyReport rep = af::run_verification(vo);
  for (const auto& c : rep.checks)
    std::printf("[%s] %-28s (criterion %2d, %6.2fs) %s\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.criterion, c.seconds, c.detail.c_str());
  af::write_json_atomic(fs::path(g.out) / "verify.json", rep.to_json());
  if (rep.checks.empty()) {
    std::fprintf(stderr, "no checks matched filter '%s'\n", filter.c_str());
    return 1;
  }
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for the alpha-power curve shortening flow"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--n-grid", g.n_grid, "Periodic grid size (power of two)")
      ->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads for dense algebra")
      ->capture_default_str();

  double alpha = 1.0;
  int k = -1;
  double radius = 1.0;
  std::string shape = "circle";
  std::string gauge = "raw";
  double t_start = 0.0, t_end = 0.25, tol = 1e-8, interval = 0.0;
  int modes = 0;
  std::string config_path, filter, fault;

  auto* sh = app.add_subcommand("shrinker", "Solve a k-fold symmetric self-shrinker");
  sh->add_option("--alpha", alpha, "Flow exponent")->required();
  sh->add_option("--k", k, "Rotational symmetry order")->required();

  auto* sp = app.add_subcommand("spectrum", "Eigendecomposition of the linearized operator");
  sp->add_option("--alpha", alpha, "Flow exponent")->required();
  sp->add_option("--k", k, "Symmetry order of the base shrinker");
  sp->add_option("--shape", shape, "circle to use the round shrinker");
  sp->add_option("--modes", modes, "Number of modes to report");

  auto* ev = app.add_subcommand("evolve", "Integrate the flow from a chosen curve");
  ev->add_option("--alpha", alpha, "Flow exponent")->required();
  ev->add_option("--k", k, "Start from the k-fold shrinker instead of a circle");
  ev->add_option("--shape", shape, "circle (default) or shrinker");
  ev->add_option("--radius", radius, "Initial circle radius");
  ev->add_option("--gauge", gauge, "raw or normalized")->check(CLI::IsMember({"raw", "normalized"}));
  ev->add_option("--t-start", t_start, "Start time");
  ev->add_option("--t-end", t_end, "End time")->capture_default_str();
  ev->add_option("--tol", tol, "Step-doubling error target");
  ev->add_option("--snapshot-interval", interval, "Snapshot spacing (0 = span/8)");

  auto* en = app.add_subcommand("entropy", "Entropy of a circle or shrinker");
  en->add_option("--alpha", alpha, "Flow exponent")->required();
  en->add_option("--k", k, "Shrinker symmetry order");
  en->add_option("--shape", shape, "circle (default) or shrinker");
  en->add_option("--radius", radius, "Circle radius");

  auto* an = app.add_subcommand("ancient", "Construct an ancient solution from a run config");
  an->add_option("--config", config_path, "JSON run spec")->required();

  auto* vf = app.add_subcommand("verify", "Run the verification suite");
  vf->add_option("--filter", filter, "Only run checks whose name contains this substring");
  vf->add_option("--inject-fault", fault, "Fault injection tag (e-sign)");

  for (auto* sub : {sh, sp, ev, en, an, vf}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (const char* env_out = std::getenv("ANCIENTFLOW_OUT"); env_out && *env_out) g.out = env_out;
  Eigen::setNbThreads(g.threads);

  try {
    auto pick_k = [&](const CLI::App* cmd) {
      // --shape circle selects the round shrinker; --k selects a dihedral one;
      // neither means a plain circle of the given radius (evolve/entropy only).
      if (cmd->count("--shape") && shape == "circle") return 0;
      if (cmd->count("--k")) return k;
      if (cmd->count("--shape")) throw af::DomainError("--shape " + shape + " requires --k");
      return -1;
    };
    if (app.got_subcommand(sh)) return cmd_shrinker(g, alpha, k);
    if (app.got_subcommand(sp)) {
      int kk = pick_k(sp);
      if (kk < 0) throw af::DomainError("spectrum needs --k or --shape circle");
      return cmd_spectrum(g, alpha, kk, modes);
    }
    if (app.got_subcommand(ev))
      return cmd_evolve(g, alpha, pick_k(ev), radius, gauge, t_start, t_end, tol, interval);
    if (app.got_subcommand(en)) return cmd_entropy(g, alpha, pick_k(en), radius);
    if (app.got_subcommand(an)) return cmd_ancient(g, config_path);
    if (app.got_subcommand(vf)) return cmd_verify(g, filter, fault);
    return 1;
  } catch (const af::DomainError& e) {
    nlohmann::json err = {{"error", e.kind}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const af::Error& e) {
    nlohmann::json err = {{"error", e.kind}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 3;
  } catch (const std::exception& e) {
    nlohmann::json err = {{"error", "Internal"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 3;
  }
}
