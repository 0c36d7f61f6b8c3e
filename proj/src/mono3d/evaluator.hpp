#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mono3d/thermal.hpp"

namespace mono3d {

struct constraints {
    double t_max_c = 80.0;
    double max_perf_loss = 0.10;
    // Latency of the latency-optimized feasible configuration; when absent
    // (e.g. during the latency-optimization pass) the latency check is skipped.
    std::optional<double> latency_ref_s;
};

struct violation {
    enum class kind { thermal, latency };
    kind what = kind::thermal;
    double magnitude = 0.0;  // degC over t_max, or seconds over the budget
};

struct objective_values {
    double latency_s = 0.0;
    double total_power_w = 0.0;
    double edap = 0.0;  // J * s * mm^2
};

struct eval_result {
    design_point point;
    perf_report perf;
    power_report power;  // at the converged temperature
    temperature_map temps;
    double max_c = 0.0;
    objective_values obj;
    bool feasible = false;
    std::vector<violation> violations;
    int loop_iterations = 0;
};

// Signals a leakage-temperature loop that failed the <1 degC criterion within
// the iteration cap (thermally unstable calibration).
struct divergence_error : solver_error {
    double max_c_prev, max_c_last;
    divergence_error(double prev, double last)
        : solver_error("leakage-temperature loop did not converge: last max temperatures " +
                       std::to_string(prev) + " -> " + std::to_string(last) + " degC"),
          max_c_prev(prev),
          max_c_last(last) {}
};

struct eval_settings {
    int grid_nx = 64;
    int grid_ny = 64;
    solver_options solver;
    double aspect_min = 0.94;
    double aspect_max = 1.0;
    double loop_tol_c = 1.0;  // convergence criterion on consecutive max_c
    int loop_cap = 20;
    int damping_after = 10;   // halve leakage updates beyond this iteration
};

// Runs the performance -> power -> thermal loop for one configuration to the
// leakage-temperature fixed point. Pure in all inputs; feasibility is judged
// against `cons`.
eval_result evaluate(const design_point& p, const network_spec& net, const calibration& cal,
                     const thermal_stack& stack, const eval_settings& set = {},
                     const constraints& cons = {});

// Re-judges feasibility of an existing result (the evaluation itself does not
// depend on the constraints).
void check_feasibility(eval_result& e, const constraints& cons);

nlohmann::ordered_json to_json(const eval_result& e, bool include_maps = false);

// Shared inputs plus a memo of constraint-independent evaluations; safe for
// concurrent use. The annealer, sweep and exhaustive search all feed from it.
class eval_context {
  public:
    eval_context(network_spec net, calibration cal, thermal_stack stack, eval_settings set);

    // Cached core evaluation, feasibility fields judged per call.
    eval_result evaluate(const design_point& p, const constraints& cons) const;
    const network_spec& net() const { return net_; }
    const calibration& cal() const { return cal_; }
    const thermal_stack& stack() const { return stack_; }
    const eval_settings& settings() const { return set_; }
    std::size_t cache_size() const;

  private:
    network_spec net_;
    calibration cal_;
    thermal_stack stack_;
    eval_settings set_;
    mutable std::mutex mx_;
    mutable std::unordered_map<std::string, eval_result> cache_;
};

}  // namespace mono3d
