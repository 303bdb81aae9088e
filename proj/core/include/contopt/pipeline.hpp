#ifndef CONTOPT_PIPELINE_HPP
#define CONTOPT_PIPELINE_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "contopt/config.hpp"
#include "contopt/contact.hpp"
#include "contopt/density_field.hpp"
#include "contopt/elasticity.hpp"
#include "contopt/mma.hpp"
#include "contopt/narrowband.hpp"
#include "contopt/sensitivity.hpp"

namespace contopt {

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;   // reported objective (compliance, or R1^2 - R2^2)
  double constraint = 0.0;  // volume fraction
  int newton_iters = 0;
  int active_contacts = 0;
  double wall_ms = 0.0;
};

struct RunResult {
  DensityField final_raw;   // raw design variables
  DensityField binarized;
  int iterations = 0;
  double final_objective = 0.0;
  double binarized_objective = 0.0;
  double final_volume = 0.0;
  double binarized_volume = 0.0;
  double final_beta = 0.0;  // projection sharpness after continuation
  std::vector<double> final_case_values;
  std::vector<double> binarized_case_values;
  std::vector<double> final_mean_slide;      // per case, optimized design
  std::vector<double> binarized_mean_slide;  // per case, binarized design
  std::vector<IterationRecord> records;
};

// Runs the optimization loop: filter, narrow band, static solves (with the
// friction schedule when mu > 0), adjoint sensitivities, sensitivity filter,
// and the MMA update; ends with binarization and re-evaluation.
class Pipeline {
 public:
  explicit Pipeline(OptimizationConfig cfg);

  RunResult run(const std::string& resume_checkpoint = "");

  // One forward evaluation of a density field. apply_filter selects the
  // optimization path (density filter on the raw design) versus direct
  // evaluation (binarized designs).
  struct Forward {
    DensityField field;  // field the solve saw (filtered or as-given)
    ComponentSet comps;
    std::shared_ptr<BoundaryMesh> mesh;
    std::shared_ptr<ElasticEnergy> elastic;
    std::vector<DisplacementField> u;
    std::vector<std::vector<ContactPair>> contacts;
    std::vector<double> case_values;  // per-case compliance or reaction force
    std::vector<double> mean_slide;   // per-case mean |u_t| over lagged pairs
    double objective = 0.0;           // minimized value
    double reported = 0.0;
    double volume = 0.0;
    int newton_iters = 0;
    std::vector<double> dG_drho;  // per cell; only when with_sensitivity
  };
  Forward evaluate(const DensityField& field, double beta, bool apply_filter,
                   bool with_sensitivity);

  const OptimizationConfig& config() const { return cfg_; }
  void set_output_dir(const std::string& dir) { out_dir_ = dir; }
  void set_max_iters(int n) { max_iters_override_ = n; }
  void set_debug_exports(bool on) { debug_exports_ = on; }
  // Installed into every static solve (feasibility audits in tests).
  void set_state_validator(std::function<void(const Vec&)> v) { validator_ = std::move(v); }

 private:
  void write_checkpoint(int next_iter, const DensityField& raw, const MMA& mma, double beta,
                        int stagnation) const;
  void export_iteration(int iter, const Forward& fw, double beta) const;
  void export_final(const RunResult& result, const Forward& fin, const Forward& bin,
                    double beta) const;

  OptimizationConfig cfg_;
  std::string out_dir_;
  std::optional<int> max_iters_override_;
  bool debug_exports_ = false;
  std::function<void(const Vec&)> validator_;

  // Per-solve convergence logs accumulated during run().
  bool collect_logs_ = false;
  int log_iter_ = -1;
  std::string newton_log_;
  std::string friction_log_;
};

}  // namespace contopt

#endif
