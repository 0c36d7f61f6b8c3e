#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mono3d/workload.hpp"

namespace mono3d {

// One accelerator configuration (the optimizer's decision variables).
struct design_point {
    int rows = 0;
    int cols = 0;
    int sram_ifmap_kb = 0;
    int sram_filter_kb = 0;
    int sram_ofmap_kb = 0;
    int freq_mhz = 0;

    int total_sram_kb() const { return sram_ifmap_kb + sram_filter_kb + sram_ofmap_kb; }
    double aspect_ratio() const;  // short side / long side
    std::string key() const;      // "RxC i/f/o @MHz", canonical for sorting/logs
    bool operator==(const design_point&) const = default;
};

struct traffic_params {
    int operand_bytes = 1;     // ifmap/filter operand width
    int ofmap_word_bytes = 4;  // accumulator width
};

struct buffer_traffic {
    std::int64_t ifmap_reads = 0;
    std::int64_t filter_reads = 0;
    std::int64_t ofmap_reads = 0;  // output-stationary: accumulation stays in PEs
    std::int64_t ofmap_writes = 0;
};

struct layer_perf {
    std::string name;
    std::int64_t cycles = 0;
    double utilization = 0.0;
    bool ifmap_refetch = false;
    bool filter_refetch = false;
};

struct perf_report {
    std::int64_t total_cycles = 0;
    double latency_s = 0.0;
    std::vector<layer_perf> per_layer;
    double mean_utilization = 0.0;  // arithmetic mean over layers
    std::int64_t mac_ops = 0;
    buffer_traffic traffic;
};

// Tiling bookkeeping: folds needed along each GEMM output dimension.
std::pair<std::int64_t, std::int64_t> fold_counts(const gemm_dims& g, int rows, int cols);

// Output-stationary fold on a fully reserved rows x cols array:
//   t_fold = (rows-1) + (cols-1) + k + rows
// (row/column input skew, k streaming steps, column-serial drain).
// Folds run back-to-back, so a layer takes fm*fn*t_fold cycles.
std::int64_t layer_cycles(const gemm_dims& g, int rows, int cols);

// Cycle-by-cycle simulation of the same dataflow (validation oracle; meant
// for small instances). layer_cycles must match it exactly.
std::int64_t oracle_cycles(const gemm_dims& g, int rows, int cols);

// Useful-MAC fraction of the issued MAC slots, in (0, 1].
double utilization(const gemm_dims& g, int rows, int cols);

// Baseline SRAM traffic of the tiled schedule. When a buffer's double-buffered
// per-fold working set exceeds its SRAM, that buffer's reads double for the
// layer (energy-only penalty; latency stays stall-free).
buffer_traffic layer_traffic(const gemm_dims& g, const design_point& p, const traffic_params& tp,
                             bool* ifmap_refetch = nullptr, bool* filter_refetch = nullptr);

perf_report network_perf(const network_spec& net, const design_point& p,
                         const traffic_params& tp = {});

}  // namespace mono3d
