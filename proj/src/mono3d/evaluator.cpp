#include "mono3d/evaluator.hpp"

#include <cmath>

#include "mono3d/common.hpp"

namespace mono3d {
namespace {

block_temps temps_from_map(const temperature_map& tm, double fallback) {
    auto get = [&](const char* name) {
        auto it = tm.block_mean_c.find(name);
        return it == tm.block_mean_c.end() ? fallback : it->second;
    };
    return {get("array"), get("sram_ifmap"), get("sram_filter"), get("sram_ofmap")};
}

void set_block_powers(floorplan& fp, const block_powers& dyn, const block_powers& leak) {
    auto assign = [&](std::vector<fp_block>& blocks, const char* name, double w) {
        for (auto& b : blocks)
            if (b.name == name) b.power_w = w;
    };
    // Interconnect dynamic power heats the logic tier alongside the array.
    assign(fp.tier1, "array", dyn.array_w + dyn.interconnect_w + leak.array_w);
    assign(fp.tier2, "sram_ifmap", dyn.sram_ifmap_w + leak.sram_ifmap_w);
    assign(fp.tier2, "sram_filter", dyn.sram_filter_w + leak.sram_filter_w);
    assign(fp.tier2, "sram_ofmap", dyn.sram_ofmap_w + leak.sram_ofmap_w);
}

}  // namespace

eval_result evaluate(const design_point& p, const network_spec& net, const calibration& cal,
                     const thermal_stack& stack, const eval_settings& set,
                     const constraints& cons) {
    eval_result e;
    e.point = p;
    e.perf = network_perf(net, p, cal.widths);

    floorplan fp = build_floorplan(p, cal, set.aspect_min, set.aspect_max);
    steady_solver solver(stack, fp.width_m, fp.height_m, set.grid_nx, set.grid_ny, set.solver);

    block_powers dyn = dynamic_power(e.perf, p, cal);
    dyn.interconnect_w = interconnect_power(dyn.total(), cal);

    double max_c_prev = stack.ambient_c;
    block_temps bt = block_temps::uniform(stack.ambient_c);
    block_powers leak_used;
    for (int i = 1;; ++i) {
        block_powers leak = leakage_power(p, cal, bt);
        if (i > set.damping_after) {
            leak.array_w = 0.5 * (leak.array_w + leak_used.array_w);
            leak.sram_ifmap_w = 0.5 * (leak.sram_ifmap_w + leak_used.sram_ifmap_w);
            leak.sram_filter_w = 0.5 * (leak.sram_filter_w + leak_used.sram_filter_w);
            leak.sram_ofmap_w = 0.5 * (leak.sram_ofmap_w + leak_used.sram_ofmap_w);
        }
        leak_used = leak;
        set_block_powers(fp, dyn, leak);
        e.temps = solver.solve(fp);
        e.loop_iterations = i;
        bt = temps_from_map(e.temps, stack.ambient_c);
        if (std::abs(e.temps.max_c - max_c_prev) < set.loop_tol_c) break;
        if (i >= set.loop_cap) throw divergence_error(max_c_prev, e.temps.max_c);
        max_c_prev = e.temps.max_c;
    }

    e.max_c = e.temps.max_c;
    e.power = power_at(e.perf, p, cal, bt);
    e.power.dynamic_w = dyn;  // keep the loop's interconnect adder
    e.power.dynamic_total_w = dyn.total();
    e.power.leakage_w = leak_used;
    e.power.leakage_total_w = leak_used.total();
    e.power.total_w = e.power.dynamic_total_w + e.power.leakage_total_w;
    e.power.energy_j = e.power.total_w * e.perf.latency_s;
    e.obj.latency_s = e.perf.latency_s;
    e.obj.total_power_w = e.power.total_w;
    e.obj.edap = edap(e.power.energy_j, e.perf.latency_s, e.power.area.footprint_mm2);
    check_feasibility(e, cons);
    return e;
}

void check_feasibility(eval_result& e, const constraints& cons) {
    e.violations.clear();
    if (e.max_c > cons.t_max_c)
        e.violations.push_back({violation::kind::thermal, e.max_c - cons.t_max_c});
    if (cons.latency_ref_s) {
        double budget = (1.0 + cons.max_perf_loss) * *cons.latency_ref_s;
        if (e.obj.latency_s > budget)
            e.violations.push_back({violation::kind::latency, e.obj.latency_s - budget});
    }
    e.feasible = e.violations.empty();
}

nlohmann::ordered_json to_json(const eval_result& e, bool include_maps) {
    using json = nlohmann::ordered_json;
    json j;
    j["point"] = {{"rows", e.point.rows},
                  {"cols", e.point.cols},
                  {"sram_ifmap_kb", e.point.sram_ifmap_kb},
                  {"sram_filter_kb", e.point.sram_filter_kb},
                  {"sram_ofmap_kb", e.point.sram_ofmap_kb},
                  {"freq_mhz", e.point.freq_mhz}};
    json per_layer = json::array();
    for (const auto& l : e.perf.per_layer)
        per_layer.push_back({{"name", l.name},
                             {"cycles", l.cycles},
                             {"utilization", l.utilization},
                             {"ifmap_refetch", l.ifmap_refetch},
                             {"filter_refetch", l.filter_refetch}});
    j["perf"] = {{"total_cycles", e.perf.total_cycles},
                 {"latency_s", e.perf.latency_s},
                 {"mean_utilization", e.perf.mean_utilization},
                 {"mac_ops", e.perf.mac_ops},
                 {"sram_traffic",
                  {{"ifmap_reads", e.perf.traffic.ifmap_reads},
                   {"filter_reads", e.perf.traffic.filter_reads},
                   {"ofmap_reads", e.perf.traffic.ofmap_reads},
                   {"ofmap_writes", e.perf.traffic.ofmap_writes}}},
                 {"per_layer", per_layer}};
    auto blocks = [](const block_powers& b) {
        return json{{"array_w", b.array_w},
                    {"sram_ifmap_w", b.sram_ifmap_w},
                    {"sram_filter_w", b.sram_filter_w},
                    {"sram_ofmap_w", b.sram_ofmap_w},
                    {"interconnect_w", b.interconnect_w}};
    };
    j["power"] = {{"dynamic_w", blocks(e.power.dynamic_w)},
                  {"leakage_w", blocks(e.power.leakage_w)},
                  {"dynamic_total_w", e.power.dynamic_total_w},
                  {"leakage_total_w", e.power.leakage_total_w},
                  {"total_w", e.power.total_w},
                  {"energy_j", e.power.energy_j}};
    j["area"] = {{"tier1_mm2", e.power.area.tier1_mm2},
                 {"tier2_mm2", e.power.area.tier2_mm2},
                 {"footprint_mm2", e.power.area.footprint_mm2},
                 {"tier_balance_warning", e.power.area.tier_balance_warning}};
    json blocks_c = json::object();
    for (const auto& [name, t] : e.temps.block_mean_c) blocks_c[name] = t;
    j["thermal"] = {{"max_c", e.max_c},
                    {"block_mean_c", blocks_c},
                    {"loop_iterations", e.loop_iterations}};
    j["objectives"] = {{"latency_s", e.obj.latency_s},
                       {"total_power_w", e.obj.total_power_w},
                       {"edap", e.obj.edap}};
    json viols = json::array();
    for (const auto& v : e.violations)
        viols.push_back({{"kind", v.what == violation::kind::thermal ? "thermal" : "latency"},
                         {"magnitude", v.magnitude}});
    j["feasible"] = e.feasible;
    j["violations"] = viols;
    if (include_maps) {
        json layers = json::array();
        for (std::size_t l = 0; l < e.temps.layer_t_c.size(); ++l)
            layers.push_back({{"name", e.temps.layer_names[l]}, {"t_c", e.temps.layer_t_c[l]}});
        j["temperature_map"] = {{"nx", e.temps.nx}, {"ny", e.temps.ny}, {"layers", layers}};
    }
    return j;
}

eval_context::eval_context(network_spec net, calibration cal, thermal_stack stack,
                           eval_settings set)
    : net_(std::move(net)), cal_(std::move(cal)), stack_(std::move(stack)), set_(set) {
    cal_.validate();
    stack_.validate();
}

eval_result eval_context::evaluate(const design_point& p, const constraints& cons) const {
    const std::string key = p.key();
    {
        std::lock_guard lk(mx_);
        auto it = cache_.find(key);
        if (it != cache_.end()) {
            eval_result e = it->second;
            check_feasibility(e, cons);
            return e;
        }
    }
    eval_result e = mono3d::evaluate(p, net_, cal_, stack_, set_, cons);
    {
        std::lock_guard lk(mx_);
        cache_.emplace(key, e);
    }
    return e;
}

std::size_t eval_context::cache_size() const {
    std::lock_guard lk(mx_);
    return cache_.size();
}

}  // namespace mono3d
