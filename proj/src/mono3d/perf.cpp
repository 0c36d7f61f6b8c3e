#include "mono3d/perf.hpp"

#include <algorithm>
#include <sstream>

#include "mono3d/common.hpp"

namespace mono3d {

double design_point::aspect_ratio() const {
    return static_cast<double>(std::min(rows, cols)) / std::max(rows, cols);
}

std::string design_point::key() const {
    std::ostringstream os;
    os << rows << "x" << cols << " " << sram_ifmap_kb << "/" << sram_filter_kb << "/"
       << sram_ofmap_kb << " @" << freq_mhz;
    return os.str();
}

std::pair<std::int64_t, std::int64_t> fold_counts(const gemm_dims& g, int rows, int cols) {
    if (rows < 1 || cols < 1) throw validation_error("fold_counts: array dims must be >= 1");
    std::int64_t fm = (g.m + rows - 1) / rows;
    std::int64_t fn = (g.n + cols - 1) / cols;
    return {fm, fn};
}

std::int64_t layer_cycles(const gemm_dims& g, int rows, int cols) {
    auto [fm, fn] = fold_counts(g, rows, cols);
    std::int64_t t_fold = (rows - 1) + (cols - 1) + g.k + rows;
    return fm * fn * t_fold;
}

namespace {

// One fold, simulated cycle by cycle. Operand s reaches PE(i,j) at cycle
// i+j+s from the top/left edges; a column drains one result per cycle once
// every PE in it has finished, and the fold reserves the whole array, so each
// column drains `rows` slots.
std::int64_t simulate_fold(int rows, int cols, std::int64_t k) {
    std::vector<std::int64_t> next_s(static_cast<std::size_t>(rows) * cols, 0);
    std::vector<int> drained(cols, 0);
    std::vector<std::int64_t> col_active(cols, static_cast<std::int64_t>(rows) * k);
    std::vector<std::int64_t> col_done_cycle(cols, -1);
    std::int64_t cycle = 0;
    int cols_done = 0;
    for (; cols_done < cols; ++cycle) {
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) {
                auto& s = next_s[static_cast<std::size_t>(i) * cols + j];
                if (s < k && cycle == i + j + s) {
                    ++s;  // both operands reach PE(i,j) this cycle
                    if (--col_active[j] == 0) col_done_cycle[j] = cycle;
                }
            }
        for (int j = 0; j < cols; ++j) {
            if (drained[j] < rows && col_active[j] == 0 && cycle > col_done_cycle[j]) {
                if (++drained[j] == rows) ++cols_done;
            }
        }
    }
    return cycle;
}

}  // namespace

std::int64_t oracle_cycles(const gemm_dims& g, int rows, int cols) {
    auto [fm, fn] = fold_counts(g, rows, cols);
    std::int64_t total = 0;
    for (std::int64_t f = 0; f < fm * fn; ++f) total += simulate_fold(rows, cols, g.k);
    return total;
}

double utilization(const gemm_dims& g, int rows, int cols) {
    auto [fm, fn] = fold_counts(g, rows, cols);
    return static_cast<double>(g.m) * g.n /
           (static_cast<double>(fm) * fn * rows * cols);
}

buffer_traffic layer_traffic(const gemm_dims& g, const design_point& p, const traffic_params& tp,
                             bool* ifmap_refetch, bool* filter_refetch) {
    auto [fm, fn] = fold_counts(g, p.rows, p.cols);
    buffer_traffic t;
    t.ifmap_reads = fn * g.m * g.k;
    t.filter_reads = fm * g.k * g.n;
    t.ofmap_writes = g.m * g.n;
    t.ofmap_reads = 0;
    // Double-buffered per-fold working sets, full-array tiles.
    std::int64_t ifmap_ws = 2 * static_cast<std::int64_t>(p.rows) * g.k * tp.operand_bytes;
    std::int64_t filter_ws = 2 * static_cast<std::int64_t>(p.cols) * g.k * tp.operand_bytes;
    bool irf = ifmap_ws > static_cast<std::int64_t>(p.sram_ifmap_kb) * 1024;
    bool frf = filter_ws > static_cast<std::int64_t>(p.sram_filter_kb) * 1024;
    if (irf) t.ifmap_reads *= 2;
    if (frf) t.filter_reads *= 2;
    if (ifmap_refetch) *ifmap_refetch = irf;
    if (filter_refetch) *filter_refetch = frf;
    return t;
}

perf_report network_perf(const network_spec& net, const design_point& p,
                         const traffic_params& tp) {
    if (net.layers.empty()) throw validation_error("network_perf: empty network");
    if (p.rows < 1 || p.cols < 1 || p.freq_mhz < 1)
        throw validation_error("network_perf: invalid design point " + p.key());
    perf_report r;
    double util_sum = 0.0;
    for (const auto& l : net.layers) {
        gemm_dims g = lower_to_gemm(l);
        layer_perf lp;
        lp.name = l.name;
        lp.cycles = layer_cycles(g, p.rows, p.cols);
        lp.utilization = utilization(g, p.rows, p.cols);
        buffer_traffic t = layer_traffic(g, p, tp, &lp.ifmap_refetch, &lp.filter_refetch);
        r.traffic.ifmap_reads += t.ifmap_reads;
        r.traffic.filter_reads += t.filter_reads;
        r.traffic.ofmap_reads += t.ofmap_reads;
        r.traffic.ofmap_writes += t.ofmap_writes;
        r.total_cycles += lp.cycles;
        r.mac_ops += g.macs();
        util_sum += lp.utilization;
        r.per_layer.push_back(std::move(lp));
    }
    r.mean_utilization = util_sum / static_cast<double>(net.layers.size());
    r.latency_s = static_cast<double>(r.total_cycles) / (p.freq_mhz * 1e6);
    return r;
}

}  // namespace mono3d
