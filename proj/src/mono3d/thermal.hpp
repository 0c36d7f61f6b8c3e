#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mono3d/power.hpp"

namespace mono3d {

struct stack_layer {
    std::string name;
    double thickness_m = 0.0;
    double conductivity_w_mk = 0.0;
    bool active = false;
    double lateral_scale = 1.0;  // anisotropy factor on in-plane conductivity
};

// Layered chipstack, ordered heat-removal side -> substrate. The spreader is
// modeled as an effective heat-transfer coefficient at the top face; the
// optional secondary path is a lumped resistance from the substrate face.
struct thermal_stack {
    std::vector<stack_layer> layers;
    double ambient_c = 45.0;
    double htc_w_m2k = 6500.0;
    double secondary_r_c_per_w = 0.0;  // 0 disables the board-side path

    void validate() const;
    static thermal_stack load(const std::filesystem::path& path);
    std::vector<int> active_layer_indices() const;
};

struct fp_block {
    std::string name;
    double x = 0.0, y = 0.0;  // lower-left corner, meters
    double w = 0.0, h = 0.0;
    double power_w = 0.0;
};

struct floorplan {
    double width_m = 0.0;
    double height_m = 0.0;
    std::vector<fp_block> tier1;  // logic tier (closer to the spreader)
    std::vector<fp_block> tier2;  // SRAM tier

    void validate() const;
    double total_power_w() const;
};

// Die sized to the chip footprint with the point's aspect ratio (clamped to
// the band); tier1 holds the centered array block, tier2 three vertical SRAM
// slices IFMAP|Filter|OFMAP with area-proportional widths plus whitespace.
floorplan build_floorplan(const design_point& p, const calibration& cal, double aspect_min = 0.94,
                          double aspect_max = 1.0);

struct temperature_map {
    int nx = 0, ny = 0;
    std::vector<std::string> layer_names;        // active layers, top first
    std::vector<std::vector<double>> layer_t_c;  // [active layer][j*nx + i]
    double max_c = 0.0;
    std::map<std::string, double> block_mean_c;
};

double max_temp(const temperature_map& tm);

struct solver_options {
    enum class kind { automatic, cg, direct };
    kind backend = kind::automatic;
    double rtol = 1e-10;
    int max_iter = 50000;
};

struct solve_stats {
    int iterations = 0;      // 0 for the direct backend
    double residual = 0.0;   // relative, CG backend
    double injected_w = 0.0;
    double boundary_w = 0.0;  // heat leaving through htc + secondary path
};

// Finite-volume conductance network over (layer, y, x) nodes on a fixed die
// geometry. Construction assembles (and for the direct backend factorizes)
// the system once; solve() can then be called repeatedly with new block
// powers, which is what the leakage-temperature loop does.
class steady_solver {
  public:
    steady_solver(const thermal_stack& stack, double width_m, double height_m, int nx, int ny,
                  solver_options opt = {});
    ~steady_solver();
    steady_solver(steady_solver&&) noexcept;
    steady_solver& operator=(steady_solver&&) noexcept;

    temperature_map solve(const floorplan& fp);
    const solve_stats& last_stats() const { return stats_; }
    const char* backend_name() const;

  private:
    struct impl;
    std::unique_ptr<impl> impl_;
    solve_stats stats_;
};

// One-shot convenience wrapper.
temperature_map solve_steady(const thermal_stack& stack, const floorplan& fp, int nx, int ny,
                             solver_options opt = {});

void write_temperature_csv(const temperature_map& tm, std::ostream& out);
temperature_map parse_temperature_csv(std::istream& in);
void write_floorplan_csv(const floorplan& fp, std::ostream& out);
floorplan parse_floorplan_csv(std::istream& in);

}  // namespace mono3d
