#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "mono3d/perf.hpp"

namespace mono3d {

struct sram_params {
    double read_pj = 0.0;
    double write_pj = 0.0;
    double leak_mw = 0.0;   // at t_ref_c
    double area_mm2 = 0.0;
};

// Technology calibration. Bundled defaults are illustrative placeholders;
// real CACTI/measurement data goes in via the file or the SRAM lookup table.
struct calibration {
    double mac_area_mm2 = 0.0012;
    double mac_energy_pj = 0.4;
    double mac_leak_mw = 0.01;  // per PE at t_ref_c

    double interconnect_fraction = 0.15;
    double mono3d_saving = 0.10;
    double leak_coeff_per_c = 0.02;
    double t_ref_c = 45.0;

    traffic_params widths;

    // Analytic SRAM model anchor (32 KB reference entry). Read/write energy
    // scale with sqrt(size), leakage and area linearly with size.
    double sram_ref_kb = 32.0;
    sram_params sram_ref{1.0, 1.2, 1.6, 0.112};

    // Optional measured table; when present it must cover every queried size.
    std::optional<std::map<int, sram_params>> sram_table;

    sram_params sram(int size_kb) const;
    void validate() const;
};

calibration load_calibration(const std::filesystem::path& path);
std::map<int, sram_params> load_sram_table(const std::filesystem::path& path);

struct block_powers {
    double array_w = 0.0;
    double sram_ifmap_w = 0.0;
    double sram_filter_w = 0.0;
    double sram_ofmap_w = 0.0;
    double interconnect_w = 0.0;
    double total() const {
        return array_w + sram_ifmap_w + sram_filter_w + sram_ofmap_w + interconnect_w;
    }
};

struct chip_area_report {
    double tier1_mm2 = 0.0;     // systolic array tier
    double tier2_mm2 = 0.0;     // SRAM tier
    double footprint_mm2 = 0.0;
    bool tier_balance_warning = false;  // min/max tier area < 0.5
};

struct power_report {
    block_powers dynamic_w;   // includes interconnect
    block_powers leakage_w;   // interconnect_w stays 0
    double dynamic_total_w = 0.0;
    double leakage_total_w = 0.0;
    double total_w = 0.0;
    double energy_j = 0.0;    // total_w * latency
    chip_area_report area;
};

struct block_temps {
    double array_c = 0.0;
    double sram_ifmap_c = 0.0;
    double sram_filter_c = 0.0;
    double sram_ofmap_c = 0.0;
    static block_temps uniform(double t) { return {t, t, t, t}; }
};

// Block dynamic powers before the interconnect adder.
block_powers dynamic_power(const perf_report& perf, const design_point& p, const calibration& cal);

// Mono3D interconnect rule: fraction of non-interconnect dynamic power, with
// the Mono3D saving applied on top (0.135 * d0 at defaults).
double interconnect_power(double non_interconnect_dynamic_w, const calibration& cal);

// Exponential leakage-temperature model, L(T) = L_ref * exp(c * (T - t_ref)).
block_powers leakage_power(const design_point& p, const calibration& cal, const block_temps& t);

chip_area_report chip_area(const design_point& p, const calibration& cal);

double edap(double energy_j, double latency_s, double footprint_mm2);

// Full report at the given block temperatures.
power_report power_at(const perf_report& perf, const design_point& p, const calibration& cal,
                      const block_temps& t);

}  // namespace mono3d
