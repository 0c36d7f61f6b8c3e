#include "mono3d/power.hpp"

#include <cmath>
#include <fstream>

#include "mono3d/common.hpp"

namespace mono3d {

sram_params calibration::sram(int size_kb) const {
    if (size_kb < 1) throw validation_error("sram size must be >= 1 KB");
    if (sram_table) {
        auto it = sram_table->find(size_kb);
        if (it == sram_table->end())
            throw config_error("sram table has no entry for " + std::to_string(size_kb) + " KB");
        return it->second;
    }
    double ratio = size_kb / sram_ref_kb;
    sram_params p;
    p.read_pj = sram_ref.read_pj * std::sqrt(ratio);
    p.write_pj = sram_ref.write_pj * std::sqrt(ratio);
    p.leak_mw = sram_ref.leak_mw * ratio;
    p.area_mm2 = sram_ref.area_mm2 * ratio;
    return p;
}

void calibration::validate() const {
    if (mac_area_mm2 < 0 || mac_energy_pj < 0 || mac_leak_mw < 0)
        throw config_error("calibration: MAC area/energy/leakage must be >= 0");
    if (interconnect_fraction < 0 || interconnect_fraction >= 1)
        throw config_error("calibration: interconnect_fraction must be in [0, 1)");
    if (mono3d_saving < 0 || mono3d_saving >= 1)
        throw config_error("calibration: mono3d_saving must be in [0, 1)");
    if (sram_ref_kb <= 0 || sram_ref.read_pj < 0 || sram_ref.write_pj < 0 ||
        sram_ref.leak_mw < 0 || sram_ref.area_mm2 < 0)
        throw config_error("calibration: SRAM reference entry must be >= 0");
    if (widths.operand_bytes < 1 || widths.ofmap_word_bytes < 1)
        throw config_error("calibration: operand widths must be >= 1 byte");
}

calibration load_calibration(const std::filesystem::path& path) {
    kv_file f = kv_file::load(path);
    calibration c;
    c.mac_area_mm2 = f.get_double("mac_area_mm2", c.mac_area_mm2);
    c.mac_energy_pj = f.get_double("mac_energy_pj", c.mac_energy_pj);
    c.mac_leak_mw = f.get_double("mac_leak_mw", c.mac_leak_mw);
    c.interconnect_fraction = f.get_double("interconnect_fraction", c.interconnect_fraction);
    c.mono3d_saving = f.get_double("mono3d_saving", c.mono3d_saving);
    c.leak_coeff_per_c = f.get_double("leak_coeff_per_c", c.leak_coeff_per_c);
    c.t_ref_c = f.get_double("t_ref_c", c.t_ref_c);
    c.widths.operand_bytes = static_cast<int>(f.get_int("operand_bytes", c.widths.operand_bytes));
    c.widths.ofmap_word_bytes =
        static_cast<int>(f.get_int("ofmap_word_bytes", c.widths.ofmap_word_bytes));
    c.sram_ref_kb = f.get_double("sram_ref_kb", c.sram_ref_kb);
    c.sram_ref.read_pj = f.get_double("sram_read_pj", c.sram_ref.read_pj);
    c.sram_ref.write_pj = f.get_double("sram_write_pj", c.sram_ref.write_pj);
    c.sram_ref.leak_mw = f.get_double("sram_leak_mw", c.sram_ref.leak_mw);
    c.sram_ref.area_mm2 = f.get_double("sram_area_mm2", c.sram_ref.area_mm2);
    if (f.has("sram_table")) {
        std::filesystem::path t = f.get("sram_table");
        if (t.is_relative()) t = path.parent_path() / t;
        c.sram_table = load_sram_table(t);
    }
    c.validate();
    return c;
}

std::map<int, sram_params> load_sram_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open sram table " + path.string());
    std::map<int, sram_params> table;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        auto fields = split(t, ',');
        while (!fields.empty() && trim(fields.back()).empty()) fields.pop_back();
        const std::string where = path.string() + " row " + std::to_string(lineno);
        if (fields.size() != 5)
            throw parse_error(where + ": expected size_kb,read_pj,write_pj,leak_mw,area_mm2");
        int size = static_cast<int>(parse_int(fields[0], where + " size_kb"));
        sram_params p;
        p.read_pj = parse_double(fields[1], where + " read_pj");
        p.write_pj = parse_double(fields[2], where + " write_pj");
        p.leak_mw = parse_double(fields[3], where + " leak_mw");
        p.area_mm2 = parse_double(fields[4], where + " area_mm2");
        table[size] = p;
    }
    if (table.empty()) throw parse_error(path.string() + ": empty sram table");
    return table;
}

block_powers dynamic_power(const perf_report& perf, const design_point& p,
                           const calibration& cal) {
    block_powers d;
    if (perf.mac_ops == 0) return d;
    if (perf.latency_s <= 0) throw validation_error("dynamic_power: latency must be > 0");
    const double inv_t = 1.0 / perf.latency_s;
    d.array_w = static_cast<double>(perf.mac_ops) * cal.mac_energy_pj * 1e-12 * inv_t;
    auto sram_dyn = [&](int size_kb, std::int64_t reads, std::int64_t writes) {
        sram_params s = cal.sram(size_kb);
        return (static_cast<double>(reads) * s.read_pj + static_cast<double>(writes) * s.write_pj) *
               1e-12 * inv_t;
    };
    d.sram_ifmap_w = sram_dyn(p.sram_ifmap_kb, perf.traffic.ifmap_reads, 0);
    d.sram_filter_w = sram_dyn(p.sram_filter_kb, perf.traffic.filter_reads, 0);
    d.sram_ofmap_w = sram_dyn(p.sram_ofmap_kb, perf.traffic.ofmap_reads, perf.traffic.ofmap_writes);
    return d;
}

double interconnect_power(double non_interconnect_dynamic_w, const calibration& cal) {
    if (non_interconnect_dynamic_w < 0)
        throw validation_error("interconnect_power: negative dynamic power");
    return cal.interconnect_fraction * (1.0 - cal.mono3d_saving) * non_interconnect_dynamic_w;
}

block_powers leakage_power(const design_point& p, const calibration& cal, const block_temps& t) {
    auto scale = [&](double t_c) { return std::exp(cal.leak_coeff_per_c * (t_c - cal.t_ref_c)); };
    block_powers l;
    l.array_w = static_cast<double>(p.rows) * p.cols * cal.mac_leak_mw * 1e-3 * scale(t.array_c);
    l.sram_ifmap_w = cal.sram(p.sram_ifmap_kb).leak_mw * 1e-3 * scale(t.sram_ifmap_c);
    l.sram_filter_w = cal.sram(p.sram_filter_kb).leak_mw * 1e-3 * scale(t.sram_filter_c);
    l.sram_ofmap_w = cal.sram(p.sram_ofmap_kb).leak_mw * 1e-3 * scale(t.sram_ofmap_c);
    return l;
}

chip_area_report chip_area(const design_point& p, const calibration& cal) {
    chip_area_report a;
    a.tier1_mm2 = static_cast<double>(p.rows) * p.cols * cal.mac_area_mm2;
    a.tier2_mm2 = cal.sram(p.sram_ifmap_kb).area_mm2 + cal.sram(p.sram_filter_kb).area_mm2 +
                  cal.sram(p.sram_ofmap_kb).area_mm2;
    a.footprint_mm2 = std::max(a.tier1_mm2, a.tier2_mm2);
    double lo = std::min(a.tier1_mm2, a.tier2_mm2);
    a.tier_balance_warning = a.footprint_mm2 > 0 && lo / a.footprint_mm2 < 0.5;
    return a;
}

double edap(double energy_j, double latency_s, double footprint_mm2) {
    if (energy_j < 0 || latency_s < 0 || footprint_mm2 < 0)
        throw validation_error("edap: operands must be >= 0");
    return energy_j * latency_s * footprint_mm2;
}

power_report power_at(const perf_report& perf, const design_point& p, const calibration& cal,
                      const block_temps& t) {
    power_report r;
    r.dynamic_w = dynamic_power(perf, p, cal);
    double d0 = r.dynamic_w.total();
    r.dynamic_w.interconnect_w = interconnect_power(d0, cal);
    r.leakage_w = leakage_power(p, cal, t);
    r.dynamic_total_w = r.dynamic_w.total();
    r.leakage_total_w = r.leakage_w.total();
    r.total_w = r.dynamic_total_w + r.leakage_total_w;
    r.energy_j = r.total_w * perf.latency_s;
    r.area = chip_area(p, cal);
    return r;
}

}  // namespace mono3d
