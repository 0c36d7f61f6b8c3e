#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mono3d/evaluator.hpp"

namespace mono3d {

enum class objective { latency, power, edap };
const char* to_string(objective o);
objective objective_from_string(const std::string& s);
double objective_value(const eval_result& e, objective o);

// The enumerable configuration space. Array shapes are canonicalized to
// rows <= cols (the transpose is an equivalent configuration); membership
// checks for standalone points accept either orientation.
struct design_space {
    int array_min = 64;
    int array_max = 256;
    int array_step = 2;
    double aspect_min = 0.94;
    double aspect_max = 1.0;
    std::vector<int> sram_levels_kb = {32, 64, 128, 256, 512, 1024, 2048, 4096};
    std::vector<int> freqs_mhz = {500, 600, 735};

    void validate() const;
    std::vector<std::pair<int, int>> shapes() const;
    std::uint64_t size_per_freq() const;
    std::uint64_t total_size() const;
    design_point point_at(int freq_mhz, std::uint64_t index) const;
    std::vector<design_point> enumerate() const;

    // DesignPoint invariants against this space (bounds, band, levels, freq);
    // orientation-free. Fills `why` with the violated invariant on failure.
    bool valid_point(const design_point& p, std::string* why = nullptr) const;
};

struct annealer_config {
    objective obj = objective::edap;
    int starts_per_freq = 6;
    int proposals_per_temp = 5;
    double t_init = 1.44;   // 0.88 is the permitted alternative
    double t_final = 0.88;
    double cooling = 0.85;
    std::uint64_t seed = 1;
    double penalty = 10.0;
    bool require_feasible_init = false;
    unsigned threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

// Proposal rounds executed per start: cooling runs until the next temperature
// would cross below t_final, at least one round.
int temperature_steps(const annealer_config& cfg);

struct score_normalizers {
    objective_values ref;  // objective values at the space's reference point
    double t_max_c = 80.0;
    std::optional<double> latency_ref_s;
};

// Feasible points score their normalized objective; infeasible ones add
// penalty * (normalized violation magnitudes).
double score(const eval_result& e, objective obj, const score_normalizers& norm, double penalty);

// One +-1 step/level move on a uniformly chosen coordinate (rows, cols, or
// one of the SRAM sizes); frequency is pinned per start. Resamples up to 32
// times for a move that stays in the space, else returns p unchanged.
design_point neighbor(const design_point& p, const design_space& space, std::mt19937_64& rng);

struct trajectory_entry {
    int freq_mhz = 0;
    int start = 0;
    int step = 0;  // 0 is the start's initial point
    design_point point;
    double latency_s = 0, power_w = 0, edap = 0, max_c = 0;
    bool feasible = false;
    double cost = 0;
};

struct start_result {
    design_point best;
    double best_cost = 0;
    std::vector<trajectory_entry> entries;
};

start_result run_start(const design_space& space, int freq_mhz, int start_index,
                       const annealer_config& cfg, const eval_context& ctx,
                       const constraints& cons, const score_normalizers& norm);

struct optimize_result {
    eval_result best;
    double best_cost = 0;
    bool any_feasible = false;
    std::vector<trajectory_entry> trajectories;
    constraints cons;          // constraints actually applied (incl. derived ref)
    score_normalizers norm;
};

// Multi-start SA: starts_per_freq independent Metropolis trajectories per
// frequency. When the objective is not latency and no latency reference is
// given, a latency-optimization pass over the same space derives it first.
optimize_result optimize(const design_space& space, const annealer_config& cfg,
                         const eval_context& ctx, std::optional<constraints> base = {});

// Evaluates every point (oracle for MSA validation). Refuses spaces larger
// than `cap`.
optimize_result exhaustive(const design_space& space, const annealer_config& cfg,
                           const eval_context& ctx, std::optional<constraints> base = {},
                           std::uint64_t cap = 10000);

void write_trajectory_csv(std::ostream& out, const std::vector<trajectory_entry>& entries);
std::vector<trajectory_entry> parse_trajectory_csv(std::istream& in);

}  // namespace mono3d
