#include "contopt/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "contopt/errors.hpp"
#include "contopt/filters.hpp"
#include "contopt/friction.hpp"
#include "contopt/io.hpp"
#include "contopt/solver.hpp"
#include "contopt/strain_limit.hpp"

namespace contopt {

namespace {

std::string indexed(const std::string& dir, const char* stem, int idx, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%05d.%s", stem, idx, ext);
  return dir + "/" + buf;
}

std::vector<double> projected_density(const DensityField& f, double beta) {
  std::vector<double> out(f.rho.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = heaviside(f.rho[c], beta);
  return out;
}

}  // namespace

Pipeline::Pipeline(OptimizationConfig cfg) : cfg_(std::move(cfg)), out_dir_(cfg_.output_dir) {}

Pipeline::Forward Pipeline::evaluate(const DensityField& field_in, double beta, bool apply_filter,
                                     bool with_sensitivity) {
  Forward fw;
  fw.field = apply_filter ? density_filter(field_in, cfg_.grid, cfg_.filter) : field_in;

  ProjectionParams pp = cfg_.projection;
  pp.beta = beta;

  fw.comps = detect_components(fw.field, cfg_.grid, cfg_.seed_cells(), cfg_.eta);
  fw.mesh = std::make_shared<BoundaryMesh>(extract_boundary(fw.comps, cfg_.grid));

  std::vector<int> active;
  for (int c = 0; c < cfg_.grid.cell_count(); ++c)
    if (fw.comps.is_active(c)) active.push_back(c);

  std::vector<double> stiffness(active.size());
  for (std::size_t i = 0; i < active.size(); ++i)
    stiffness[i] = simp_modulus(fw.field.rho[active[i]], pp);
  fw.elastic = std::make_shared<ElasticEnergy>(cfg_.grid, active, stiffness, cfg_.unit_lame());

  std::shared_ptr<StrainLimitEnergy> strain;
  if (cfg_.strain_limit_enabled) {
    std::vector<int> gated;
    std::vector<double> gate_w;
    for (int c : active) {
      const double rho = fw.field.rho[c];
      if (rho < cfg_.strain_limit.rho_bar) {
        gated.push_back(c);
        gate_w.push_back(1.0 - rho / cfg_.strain_limit.rho_bar);
      }
    }
    if (!gated.empty())
      strain = std::make_shared<StrainLimitEnergy>(cfg_.grid, gated, gate_w, cfg_.strain_limit);
  }

  const BarrierParams bp = cfg_.barrier_params();
  auto contact = std::make_shared<ContactEnergy>(cfg_.grid, *fw.mesh, bp);

  std::vector<std::shared_ptr<EnergyTerm>> base_terms;
  base_terms.push_back(fw.elastic);
  if (strain) base_terms.push_back(strain);
  base_terms.push_back(contact);

  SolverParams sp = cfg_.solver_params();
  sp.state_validator = validator_;

  const int n_cases = cfg_.load_case_count();
  int log_case = 0;
  if (collect_logs_) {
    sp.log = [this, &log_case](const NewtonIterRecord& r) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.17g,%.17g,%.17g,%d\n", log_iter_, log_case,
                    r.iter, r.energy, r.residual, r.alpha, r.active_pairs);
      newton_log_ += buf;
    };
  }
  fw.u.resize(n_cases);
  fw.contacts.resize(n_cases);
  fw.case_values.assign(n_cases, 0.0);
  fw.mean_slide.assign(n_cases, 0.0);

  std::vector<EnergyModel> final_models(n_cases);

  for (int lc = 0; lc < n_cases; ++lc) {
    log_case = lc;
    DisplacementField bc = cfg_.boundary_conditions(cfg_.grid, lc);
    const Vec f_ext = cfg_.external_forces(cfg_.grid, lc);
    const Vec target = bc.dirichlet_value;

    EnergyModel model;
    model.terms = base_terms;
    model.f_ext = f_ext;

    if (cfg_.friction.mu > 0.0) {
      DisplacementField u0 = bc;
      u0.dirichlet_value.setZero();
      std::vector<FrictionStepRecord> steps;
      DisplacementField u_star = artificial_timestep_solve(
          cfg_.grid, base_terms, f_ext, *fw.mesh, bp, target, u0, cfg_.friction, sp, &steps);
      // Rebuild the finalize-solve model for the linearization: forces lagged
      // from the pre-finalize state are not recoverable here, so re-capture
      // them at u*; at a converged schedule both coincide to solver tolerance.
      FrictionState st = capture_lagged_state(*fw.mesh, u_star.u, bp, cfg_.grid, cfg_.friction.T);
      st.anchor = Vec::Zero(u_star.u.size());
      auto fric = std::make_shared<FrictionEnergy>(cfg_.grid, st, cfg_.friction.mu,
                                                   cfg_.friction.eps_v);
      model.terms.push_back(fric);
      for (const auto& s : steps) {
        fw.newton_iters += s.newton_iters;
        if (collect_logs_) {
          char buf[128];
          std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n", s.step, s.newton_iters, s.residual,
                        s.max_slide);
          friction_log_ += buf;
        }
      }
      fw.u[lc] = std::move(u_star);
    } else {
      DisplacementField u = bc;
      u.u.setZero();
      u.dirichlet_value.setZero();
      int ramps = cfg_.dirichlet_ramp_steps;
      if (ramps <= 0) {
        const double max_disp = target.size() ? target.cwiseAbs().maxCoeff() : 0.0;
        ramps = max_disp > 5.0 * cfg_.grid.h ? 10 : 1;
      }
      for (int r = 1; r <= ramps; ++r) {
        u.dirichlet_value = (double(r) / double(ramps)) * target;
        const SolveReport rep = solve_static(model, cfg_.grid, u, sp);
        fw.newton_iters += rep.newton_iters;
      }
      fw.u[lc] = std::move(u);
    }
    fw.contacts[lc] = contact->active_pairs(fw.u[lc].u);
    final_models[lc] = model;

    // Interface slip diagnostic: tangential relative displacement from rest
    // over the pairs active at equilibrium, independent of mu.
    {
      FrictionState st = capture_lagged_state(*fw.mesh, fw.u[lc].u, bp, cfg_.grid, 1.0);
      st.anchor = Vec::Zero(fw.u[lc].u.size());
      const FrictionEnergy probe(cfg_.grid, st, 1.0, 1.0);
      double sum = 0.0;
      for (std::size_t k = 0; k < st.pairs.size(); ++k)
        sum += std::abs(probe.slide(fw.u[lc].u, static_cast<int>(k)));
      fw.mean_slide[lc] = st.pairs.empty() ? 0.0 : sum / double(st.pairs.size());
    }
  }

  // Objective values and (optionally) adjoint sensitivities.
  auto linearize = [&](int lc) {
    return EquilibriumLinearization(final_models[lc], cfg_.grid, fw.u[lc]);
  };
  auto check_fresh = [&](int lc, const EquilibriumLinearization& lin) {
    const Vec g = final_models[lc].gradient(fw.u[lc].u);
    if (lin.direction_residual(g) > 10.0 * cfg_.newton_tol)
      throw SolverError("sensitivity: stale equilibrium (residual above 10x newton_tol)");
  };

  std::vector<double> dG_dE;  // indexed like elastic active cells
  if (cfg_.objective == ObjectiveKind::Compliance || cfg_.objective == ObjectiveKind::MaxCompliance) {
    const int lc = 0;
    const double G = compliance_value(*fw.elastic, fw.u[lc].u);
    fw.case_values[lc] = G;
    fw.reported = G;
    const double sign = cfg_.objective == ObjectiveKind::MaxCompliance ? -1.0 : 1.0;
    fw.objective = sign * G;
    if (with_sensitivity) {
      const EquilibriumLinearization lin = linearize(lc);
      check_fresh(lc, lin);
      dG_dE = compliance_dE(*fw.elastic, lin, fw.u[lc].u);
      for (double& v : dG_dE) v *= sign;
    }
  } else {
    ReactionSpec rs;
    rs.nodes = cfg_.reaction_nodes();
    rs.dir = cfg_.reaction_dir.normalized();
    const int ls = cfg_.case_small, ll = cfg_.case_large;
    const double R1 = reaction_force_value(final_models[ls], fw.u[ls], rs);
    const double R2 = reaction_force_value(final_models[ll], fw.u[ll], rs);
    fw.case_values[ls] = R1;
    fw.case_values[ll] = R2;
    fw.reported = R1 * R1 - R2 * R2;
    fw.objective = fw.reported;
    if (with_sensitivity) {
      const EquilibriumLinearization lin1 = linearize(ls);
      check_fresh(ls, lin1);
      const EquilibriumLinearization lin2 = linearize(ll);
      check_fresh(ll, lin2);
      const std::vector<double> d1 = reaction_dE(*fw.elastic, lin1, fw.u[ls].u, rs);
      const std::vector<double> d2 = reaction_dE(*fw.elastic, lin2, fw.u[ll].u, rs);
      dG_dE.resize(d1.size());
      for (std::size_t i = 0; i < d1.size(); ++i)
        dG_dE[i] = 2.0 * R1 * d1[i] - 2.0 * R2 * d2[i];
    }
  }

  fw.volume = volume_fraction(fw.field, beta);
  if (with_sensitivity)
    fw.dG_drho = chain_to_density(dG_dE, *fw.elastic, fw.field, pp, cfg_.grid.cell_count());
  return fw;
}

void Pipeline::write_checkpoint(int next_iter, const DensityField& raw, const MMA& mma, double beta,
                                int stagnation) const {
  nlohmann::json j;
  j["next_iteration"] = next_iter;
  j["rho"] = raw.rho;
  j["beta"] = beta;
  j["stagnation"] = stagnation;
  j["mma"]["iter"] = mma.iter;
  j["mma"]["low"] = std::vector<double>(mma.low.data(), mma.low.data() + mma.low.size());
  j["mma"]["upp"] = std::vector<double>(mma.upp.data(), mma.upp.data() + mma.upp.size());
  j["mma"]["xold1"] = std::vector<double>(mma.xold1.data(), mma.xold1.data() + mma.xold1.size());
  j["mma"]["xold2"] = std::vector<double>(mma.xold2.data(), mma.xold2.data() + mma.xold2.size());
  write_text_file(out_dir_ + "/checkpoint.json", j.dump());
}

void Pipeline::export_iteration(int iter, const Forward& fw, double beta) const {
  write_cell_csv(indexed(out_dir_, "rho", iter, "csv"), cfg_.grid, projected_density(fw.field, beta));
  write_density_png(indexed(out_dir_, "rho", iter, "png"), cfg_.grid,
                    projected_density(fw.field, beta));
  write_boundary_txt(indexed(out_dir_, "boundary", iter, "txt"), *fw.mesh);
  std::vector<std::pair<int, std::vector<ContactPair>>> per_case;
  for (std::size_t lc = 0; lc < fw.contacts.size(); ++lc)
    per_case.emplace_back(int(lc), fw.contacts[lc]);
  write_contacts_csv(indexed(out_dir_, "contacts", iter, "csv"), *fw.mesh, per_case);
  if (debug_exports_ && !fw.dG_drho.empty()) {
    write_cell_csv(indexed(out_dir_, "sens", iter, "csv"), cfg_.grid, fw.dG_drho);
    write_signed_png(indexed(out_dir_, "sens", iter, "png"), cfg_.grid, fw.dG_drho);
  }
}

void Pipeline::export_final(const RunResult& result, const Forward& fin, const Forward& bin,
                            double beta) const {
  write_cell_csv(out_dir_ + "/rho_final.csv", cfg_.grid, projected_density(fin.field, beta));
  write_density_png(out_dir_ + "/rho_final.png", cfg_.grid, projected_density(fin.field, beta));
  write_cell_csv(out_dir_ + "/rho_binarized.csv", cfg_.grid, bin.field.rho);
  write_density_png(out_dir_ + "/rho_binarized.png", cfg_.grid, bin.field.rho);
  for (std::size_t lc = 0; lc < bin.u.size(); ++lc) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "/boundary_deformed_case%zu.txt", lc);
    write_boundary_txt(out_dir_ + buf, *bin.mesh, &bin.u[lc].u);
  }

  nlohmann::json j;
  j["iterations"] = result.iterations;
  j["final_objective"] = result.final_objective;
  j["binarized_objective"] = result.binarized_objective;
  j["final_volume_fraction"] = result.final_volume;
  j["binarized_volume_fraction"] = result.binarized_volume;
  j["volume_bound"] = cfg_.vhat;
  j["final_volume_pct_of_bound"] = 100.0 * result.final_volume / cfg_.vhat;
  j["binarized_volume_pct_of_bound"] = 100.0 * result.binarized_volume / cfg_.vhat;
  j["final_case_values"] = result.final_case_values;
  j["binarized_case_values"] = result.binarized_case_values;
  write_text_file(out_dir_ + "/summary.json", j.dump(2));
}

RunResult Pipeline::run(const std::string& resume_checkpoint) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir_);

  DensityField raw = cfg_.initial_field();
  std::vector<int> design_cells;
  for (int c = 0; c < raw.size(); ++c)
    if (raw.region[c] == Region::Design) design_cells.push_back(c);

  MMA mma(static_cast<int>(design_cells.size()), cfg_.mma);
  double beta = cfg_.projection.beta;
  int start_iter = 0;
  int stagnation = 0;

  if (!resume_checkpoint.empty()) {
    std::ifstream f(resume_checkpoint);
    if (!f) throw ConfigError("cannot open checkpoint: " + resume_checkpoint);
    nlohmann::json j;
    f >> j;
    raw.rho = j.at("rho").get<std::vector<double>>();
    raw.enforce_regions();
    beta = j.at("beta").get<double>();
    stagnation = j.at("stagnation").get<int>();
    start_iter = j.at("next_iteration").get<int>();
    mma.iter = j.at("mma").at("iter").get<int>();
    auto fill = [](Vec& v, const std::vector<double>& src) {
      v = Eigen::Map<const Vec>(src.data(), src.size());
    };
    fill(mma.low, j.at("mma").at("low").get<std::vector<double>>());
    fill(mma.upp, j.at("mma").at("upp").get<std::vector<double>>());
    fill(mma.xold1, j.at("mma").at("xold1").get<std::vector<double>>());
    fill(mma.xold2, j.at("mma").at("xold2").get<std::vector<double>>());
  }

  const int max_iters = max_iters_override_.value_or(cfg_.max_iters);
  RunResult result;

  std::ostringstream history, timings;
  if (start_iter == 0) {
    history << "iteration,objective,constraint,newton_iters,active_contacts\n";
    timings << "iteration,wall_ms\n";
  }

  collect_logs_ = true;
  newton_log_.clear();
  friction_log_.clear();

  int iter = start_iter;
  for (; iter < max_iters; ++iter) {
    log_iter_ = iter;
    const auto t0 = std::chrono::steady_clock::now();

    // Beta continuation: geometric growth every beta_growth_every iterations.
    if (cfg_.beta_growth > 1.0 && iter > 0 && iter % cfg_.beta_growth_every == 0)
      beta = std::min(beta * cfg_.beta_growth, cfg_.beta_max);

    Forward fw;
    try {
      fw = evaluate(raw, beta, /*apply_filter=*/true, /*with_sensitivity=*/true);
    } catch (const std::exception& e) {
      write_checkpoint(iter, raw, mma, beta, stagnation);
      std::ostringstream os;
      os << "iteration " << iter << ": " << e.what() << " (checkpoint written)";
      throw SolverError(os.str());
    }

    const std::vector<double> dG_filtered =
        sensitivity_filter(fw.dG_drho, fw.field, cfg_.grid, cfg_.filter);
    const std::vector<double> dvol = volume_fraction_grad(fw.field, beta);

    std::vector<double> x(design_cells.size()), dF(design_cells.size()), dg(design_cells.size());
    for (std::size_t k = 0; k < design_cells.size(); ++k) {
      x[k] = raw.rho[design_cells[k]];
      dF[k] = dG_filtered[design_cells[k]];
      dg[k] = dvol[design_cells[k]];
    }
    const std::vector<double> xnew = mma.update(x, dF, fw.volume, dg, cfg_.vhat);

    double change = 0.0;
    for (std::size_t k = 0; k < design_cells.size(); ++k) {
      change = std::max(change, std::abs(xnew[k] - x[k]));
      raw.rho[design_cells[k]] = xnew[k];
    }
    raw.enforce_regions();

    const auto t1 = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.iteration = iter;
    rec.objective = fw.reported;
    rec.constraint = fw.volume;
    rec.newton_iters = fw.newton_iters;
    for (const auto& pairs : fw.contacts) rec.active_contacts += static_cast<int>(pairs.size());
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    result.records.push_back(rec);

    export_iteration(iter, fw, beta);
    history << rec.iteration << ',' << rec.objective << ',' << rec.constraint << ','
            << rec.newton_iters << ',' << rec.active_contacts << '\n';
    timings << rec.iteration << ',' << rec.wall_ms << '\n';
    write_checkpoint(iter + 1, raw, mma, beta, stagnation);

    stagnation = change < cfg_.stagnation_tol ? stagnation + 1 : 0;
    if (stagnation >= cfg_.stagnation_iters) {
      ++iter;
      break;
    }
  }
  result.iterations = iter;

  {
    std::ofstream hf(out_dir_ + "/history.csv", start_iter == 0 ? std::ios::trunc : std::ios::app);
    hf << history.str();
    std::ofstream tf(out_dir_ + "/timings.csv", start_iter == 0 ? std::ios::trunc : std::ios::app);
    tf << timings.str();
    std::ofstream nf(out_dir_ + "/newton_log.csv", start_iter == 0 ? std::ios::trunc : std::ios::app);
    if (start_iter == 0) nf << "iteration,case,newton_iter,energy,residual,alpha,active_pairs\n";
    nf << newton_log_;
    std::ofstream ff(out_dir_ + "/friction_steps.csv",
                     start_iter == 0 ? std::ios::trunc : std::ios::app);
    if (start_iter == 0) ff << "step,newton_iters,residual,max_slide\n";
    ff << friction_log_;
  }
  collect_logs_ = false;

  // Final evaluation and binarized re-evaluation.
  Forward fin = evaluate(raw, beta, /*apply_filter=*/true, /*with_sensitivity=*/false);
  const DensityField binary = binarize(fin.field, beta);
  Forward bin = evaluate(binary, beta, /*apply_filter=*/false, /*with_sensitivity=*/false);

  result.final_raw = raw;
  result.binarized = binary;
  result.final_objective = fin.reported;
  result.binarized_objective = bin.reported;
  result.final_volume = fin.volume;
  result.binarized_volume = bin.volume;
  result.final_beta = beta;
  result.final_case_values = fin.case_values;
  result.binarized_case_values = bin.case_values;
  result.final_mean_slide = fin.mean_slide;
  result.binarized_mean_slide = bin.mean_slide;

  export_final(result, fin, bin, beta);
  return result;
}

}  // namespace contopt
