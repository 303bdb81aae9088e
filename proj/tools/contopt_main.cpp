// Command-line front end: run an optimization, re-evaluate a saved density
// field, or run the finite-difference verification suites on a scene.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <random>

#include "contopt/config.hpp"
#include "contopt/errors.hpp"
#include "contopt/filters.hpp"
#include "contopt/io.hpp"
#include "contopt/pipeline.hpp"
#include "contopt/solver.hpp"

namespace {

using namespace contopt;

int cmd_run(const std::string& config_path, const std::string& out_dir, const std::string& resume,
            int max_iters, bool seed_debug) {
  OptimizationConfig cfg = load_config(config_path);
  Pipeline pipe(cfg);
  if (!out_dir.empty()) pipe.set_output_dir(out_dir);
  if (max_iters >= 0) pipe.set_max_iters(max_iters);
  pipe.set_debug_exports(seed_debug);

  const RunResult res = pipe.run(resume);
  std::printf("iterations:            %d\n", res.iterations);
  std::printf("objective (optimized): %.6e\n", res.final_objective);
  std::printf("objective (binarized): %.6e\n", res.binarized_objective);
  std::printf("volume %% of bound:     %.2f (optimized)  %.2f (binarized)\n",
              100.0 * res.final_volume / cfg.vhat, 100.0 * res.binarized_volume / cfg.vhat);
  for (std::size_t lc = 0; lc < res.final_case_values.size(); ++lc)
    std::printf("case %zu value:          %.6e (optimized)  %.6e (binarized)\n", lc,
                res.final_case_values[lc], res.binarized_case_values[lc]);
  return 0;
}

int cmd_binarize(const std::string& rho_csv, const std::string& config_path,
                 const std::string& out_dir) {
  OptimizationConfig cfg = load_config(config_path);
  Pipeline pipe(cfg);
  if (!out_dir.empty()) pipe.set_output_dir(out_dir);

  DensityField field = cfg.initial_field();
  const std::vector<double> projected = read_cell_csv(rho_csv, cfg.grid);
  for (int c = 0; c < field.size(); ++c) field.rho[c] = projected[c] >= 0.5 ? 1.0 : 0.0;
  field.enforce_regions();

  const auto fw = pipe.evaluate(field, cfg.projection.beta, /*apply_filter=*/false,
                                /*with_sensitivity=*/false);
  std::printf("objective:        %.6e\n", fw.reported);
  std::printf("volume fraction:  %.6f (%.2f%% of bound)\n", fw.volume,
              100.0 * fw.volume / cfg.vhat);
  for (std::size_t lc = 0; lc < fw.case_values.size(); ++lc)
    std::printf("case %zu value:    %.6e\n", lc, fw.case_values[lc]);
  return 0;
}

// Directional FD checks of every energy term plus an adjoint spot check.
int cmd_check_gradients(const std::string& config_path) {
  OptimizationConfig cfg = load_config(config_path);
  Pipeline pipe(cfg);
  std::mt19937_64 rng(20240817);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  bool all_ok = true;

  auto report = [&](const std::string& name, double err, double tol) {
    const bool ok = err < tol;
    all_ok = all_ok && ok;
    std::printf("%-34s max rel err %.3e  (tol %.1e)  %s\n", name.c_str(), err, tol,
                ok ? "PASS" : "FAIL");
  };

  // Equilibrium of case 0 gives an admissible, contact-aware state.
  DensityField field = cfg.initial_field();
  auto fw = pipe.evaluate(field, cfg.projection.beta, true, false);
  const Vec u_star = fw.u[0].u;

  EnergyModel model;
  model.terms.push_back(fw.elastic);
  auto contact = std::make_shared<ContactEnergy>(cfg.grid, *fw.mesh, cfg.barrier_params());
  model.terms.push_back(contact);

  for (const auto& term : model.terms) {
    double max_err = 0.0;
    Vec g = Vec::Zero(u_star.size());
    term->add_gradient(u_star, g);
    for (int trial = 0; trial < 16; ++trial) {
      Vec v(u_star.size());
      for (int i = 0; i < v.size(); ++i) v[i] = unit(rng);
      v *= cfg.grid.h / v.cwiseAbs().maxCoeff();
      const double eps = 1e-6;
      double ep, em;
      try {
        ep = term->value(u_star + eps * v);
        em = term->value(u_star - eps * v);
      } catch (const std::domain_error&) {
        continue;
      }
      const double fd = (ep - em) / (2.0 * eps);
      const double an = g.dot(v);
      const double scale = std::max({std::abs(fd), std::abs(an), 1e-12});
      max_err = std::max(max_err, std::abs(fd - an) / scale);
    }
    report(std::string("gradient: ") + term->name(), max_err, 1e-4);
  }

  // Adjoint vs finite differences through the solver on a few design cells.
  fw = pipe.evaluate(field, cfg.projection.beta, true, true);
  const DensityField base = fw.field;
  std::vector<std::pair<double, int>> ranked;
  for (int c = 0; c < base.size(); ++c)
    if (base.region[c] == Region::Design && std::abs(fw.dG_drho[c]) > 0.0)
      ranked.push_back({std::abs(fw.dG_drho[c]), c});
  std::sort(ranked.rbegin(), ranked.rend());
  double adj_err = 0.0;
  const double dstep = 1e-5;
  const int n_probe = std::min<std::size_t>(3, ranked.size());
  for (int k = 0; k < n_probe; ++k) {
    const int c = ranked[k].second;
    DensityField fp = base, fm = base;
    fp.rho[c] += dstep;
    fm.rho[c] -= dstep;
    const double op = pipe.evaluate(fp, cfg.projection.beta, false, false).objective;
    const double om = pipe.evaluate(fm, cfg.projection.beta, false, false).objective;
    const double fd = (op - om) / (2.0 * dstep);
    const double scale = std::max({std::abs(fd), std::abs(fw.dG_drho[c]), 1e-12});
    adj_err = std::max(adj_err, std::abs(fd - fw.dG_drho[c]) / scale);
  }
  report("adjoint vs FD-through-solver", adj_err, 1e-3);

  return all_ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contopt: 2D density topology optimization with barrier-based frictional self-contact"};
  app.require_subcommand(1);

  std::string config_path, out_dir, resume, rho_csv;
  int max_iters = -1;
  bool seed_debug = false;

  auto* run = app.add_subcommand("run", "run an optimization from a scene file");
  run->add_option("config", config_path, "scene file")->required();
  run->add_option("--out", out_dir, "output directory (overrides the scene)");
  run->add_option("--resume", resume, "resume from a checkpoint.json");
  run->add_option("--max-iters", max_iters, "override the iteration budget");
  run->add_flag("--seed-debug", seed_debug, "export sensitivity and seed diagnostics");

  auto* bin = app.add_subcommand("binarize", "threshold a saved density field and re-evaluate it");
  bin->add_option("rho_csv", rho_csv, "projected density CSV (rho_*.csv)")->required();
  bin->add_option("config", config_path, "scene file")->required();
  bin->add_option("--out", out_dir, "output directory");

  auto* chk = app.add_subcommand("check-gradients", "run the FD verification suites on a scene");
  chk->add_option("config", config_path, "scene file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, resume, max_iters, seed_debug);
    if (bin->parsed()) return cmd_binarize(rho_csv, config_path, out_dir);
    return cmd_check_gradients(config_path);
  } catch (const contopt::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const contopt::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
