#include "mono3d/annealer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "mono3d/common.hpp"

namespace mono3d {

const char* to_string(objective o) {
    switch (o) {
        case objective::latency: return "latency";
        case objective::power: return "power";
        case objective::edap: return "edap";
    }
    return "?";
}

objective objective_from_string(const std::string& s) {
    if (s == "latency") return objective::latency;
    if (s == "power") return objective::power;
    if (s == "edap") return objective::edap;
    throw config_error("unknown objective '" + s + "' (expected latency|power|edap)");
}

double objective_value(const eval_result& e, objective o) {
    switch (o) {
        case objective::latency: return e.obj.latency_s;
        case objective::power: return e.obj.total_power_w;
        case objective::edap: return e.obj.edap;
    }
    return 0;
}

void design_space::validate() const {
    if (array_min < 1 || array_max < array_min || array_step < 1)
        throw config_error("design space: bad array bounds/step");
    if (!(aspect_min > 0 && aspect_min <= aspect_max && aspect_max <= 1.0))
        throw config_error("design space: aspect band must satisfy 0 < min <= max <= 1");
    if (sram_levels_kb.empty() || freqs_mhz.empty())
        throw config_error("design space: SRAM level set and frequency set must be non-empty");
    for (int s : sram_levels_kb)
        if (s < 1) throw config_error("design space: SRAM levels must be >= 1 KB");
    for (int f : freqs_mhz)
        if (f < 1) throw config_error("design space: frequencies must be >= 1 MHz");
    if (shapes().empty())
        throw config_error("design space: no array shape satisfies the aspect band");
}

std::vector<std::pair<int, int>> design_space::shapes() const {
    std::vector<std::pair<int, int>> out;
    for (int r = array_min; r <= array_max; r += array_step)
        for (int c = r; c <= array_max; c += array_step) {
            double ratio = static_cast<double>(r) / c;
            if (ratio >= aspect_min - 1e-12 && ratio <= aspect_max + 1e-12) out.emplace_back(r, c);
        }
    return out;
}

std::uint64_t design_space::size_per_freq() const {
    std::uint64_t levels = sram_levels_kb.size();
    return shapes().size() * levels * levels * levels;
}

std::uint64_t design_space::total_size() const {
    return size_per_freq() * freqs_mhz.size();
}

design_point design_space::point_at(int freq_mhz, std::uint64_t index) const {
    const auto& sh = shapes();
    const std::uint64_t levels = sram_levels_kb.size();
    if (index >= size_per_freq()) throw config_error("design space index out of range");
    std::uint64_t o = index % levels;
    index /= levels;
    std::uint64_t f = index % levels;
    index /= levels;
    std::uint64_t i = index % levels;
    index /= levels;
    const auto& [r, c] = sh[index];
    return {r,
            c,
            sram_levels_kb[static_cast<std::size_t>(i)],
            sram_levels_kb[static_cast<std::size_t>(f)],
            sram_levels_kb[static_cast<std::size_t>(o)],
            freq_mhz};
}

std::vector<design_point> design_space::enumerate() const {
    validate();
    std::vector<design_point> out;
    out.reserve(total_size());
    for (int freq : freqs_mhz)
        for (std::uint64_t i = 0; i < size_per_freq(); ++i) out.push_back(point_at(freq, i));
    return out;
}

bool design_space::valid_point(const design_point& p, std::string* why) const {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    auto in_range = [&](int v) {
        return v >= array_min && v <= array_max && (v - array_min) % array_step == 0;
    };
    if (!in_range(p.rows) || !in_range(p.cols))
        return fail("array dims must lie in " + std::to_string(array_min) + ".." +
                    std::to_string(array_max) + " step " + std::to_string(array_step));
    double ratio = p.aspect_ratio();
    if (ratio < aspect_min - 1e-12 || ratio > aspect_max + 1e-12)
        return fail("aspect ratio " + fmt_double(ratio) + " outside band [" +
                    fmt_double(aspect_min) + ", " + fmt_double(aspect_max) + "]");
    auto level = [&](int v) {
        return std::find(sram_levels_kb.begin(), sram_levels_kb.end(), v) != sram_levels_kb.end();
    };
    if (!level(p.sram_ifmap_kb) || !level(p.sram_filter_kb) || !level(p.sram_ofmap_kb))
        return fail("SRAM sizes must come from the configured level set");
    if (std::find(freqs_mhz.begin(), freqs_mhz.end(), p.freq_mhz) == freqs_mhz.end())
        return fail("frequency " + std::to_string(p.freq_mhz) + " MHz not in the configured set");
    return true;
}

void annealer_config::validate() const {
    if (!(cooling > 0 && cooling < 1)) throw config_error("annealer: cooling must be in (0,1)");
    if (!(t_final <= t_init) || t_final <= 0)
        throw config_error("annealer: need 0 < t_final <= t_init");
    if (starts_per_freq < 1 || proposals_per_temp < 1)
        throw config_error("annealer: starts and proposals must be >= 1");
    if (penalty < 0) throw config_error("annealer: penalty must be >= 0");
}

int temperature_steps(const annealer_config& cfg) {
    int steps = 0;
    double t = cfg.t_init;
    do {
        ++steps;
        t *= cfg.cooling;
    } while (t * cfg.cooling >= cfg.t_final);
    return steps;
}

double score(const eval_result& e, objective obj, const score_normalizers& norm, double penalty) {
    double ref = objective_value_ref(norm, obj);
    double cost = objective_value(e, obj) / ref;
    if (!e.feasible) {
        double v = 0;
        for (const auto& viol : e.violations) {
            if (viol.what == violation::kind::thermal)
                v += viol.magnitude / norm.t_max_c;
            else
                v += viol.magnitude / (norm.latency_ref_s ? *norm.latency_ref_s : norm.ref.latency_s);
        }
        cost += penalty * v;
    }
    return cost;
}

design_point neighbor(const design_point& p, const design_space& space, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> coord_dist(0, 4);
    std::uniform_int_distribution<int> dir_dist(0, 1);
    auto level_index = [&](int v) {
        auto it = std::find(space.sram_levels_kb.begin(), space.sram_levels_kb.end(), v);
        return static_cast<int>(it - space.sram_levels_kb.begin());
    };
    for (int attempt = 0; attempt < 32; ++attempt) {
        int coord = coord_dist(rng);
        int dir = dir_dist(rng) ? 1 : -1;
        design_point q = p;
        switch (coord) {
            case 0: q.rows += dir * space.array_step; break;
            case 1: q.cols += dir * space.array_step; break;
            case 2:
            case 3:
            case 4: {
                int* field = coord == 2   ? &q.sram_ifmap_kb
                             : coord == 3 ? &q.sram_filter_kb
                                          : &q.sram_ofmap_kb;
                int idx = level_index(*field) + dir;
                if (idx < 0 || idx >= static_cast<int>(space.sram_levels_kb.size())) continue;
                *field = space.sram_levels_kb[static_cast<std::size_t>(idx)];
                break;
            }
        }
        if (q.rows > q.cols) continue;  // canonical orientation
        if (space.valid_point(q)) return q;
    }
    return p;
}

namespace {

double sum_normalized_violations(const eval_result& e, const score_normalizers& norm) {
    double v = 0;
    for (const auto& viol : e.violations) {
        if (viol.what == violation::kind::thermal)
            v += viol.magnitude / norm.t_max_c;
        else
            v += viol.magnitude / (norm.latency_ref_s ? *norm.latency_ref_s : norm.ref.latency_s);
    }
    return v;
}

trajectory_entry make_entry(int freq, int start, int step, const eval_result& e, double cost) {
    trajectory_entry t;
    t.freq_mhz = freq;
    t.start = start;
    t.step = step;
    t.point = e.point;
    t.latency_s = e.obj.latency_s;
    t.power_w = e.obj.total_power_w;
    t.edap = e.obj.edap;
    t.max_c = e.max_c;
    t.feasible = e.feasible;
    t.cost = cost;
    return t;
}

// Global winner rule: lowest-cost feasible point; with no feasible point
// visited, the least-violating one. Ties resolve to the earlier entry in
// (freq, start, step) order so threading cannot change the answer.
struct best_tracker {
    bool have = false;
    bool feasible = false;
    double cost = 0;
    double violation_sum = 0;
    design_point point;

    bool offer(const trajectory_entry& t, double violations) {
        bool better;
        if (!have)
            better = true;
        else if (t.feasible != feasible)
            better = t.feasible;
        else if (t.feasible)
            better = t.cost < cost;
        else
            better = violations < violation_sum ||
                     (violations == violation_sum && t.cost < cost);
        if (better) {
            have = true;
            feasible = t.feasible;
            cost = t.cost;
            violation_sum = violations;
            point = t.point;
        }
        return better;
    }
};

}  // namespace

double objective_value_ref(const score_normalizers& norm, objective obj) {
    double ref = 0;
    switch (obj) {
        case objective::latency: ref = norm.ref.latency_s; break;
        case objective::power: ref = norm.ref.total_power_w; break;
        case objective::edap: ref = norm.ref.edap; break;
    }
    if (!(ref > 0)) throw config_error("score normalizer must be > 0");
    return ref;
}

start_result run_start(const design_space& space, int freq_mhz, int start_index,
                       const annealer_config& cfg, const eval_context& ctx,
                       const constraints& cons, const score_normalizers& norm) {
    std::mt19937_64 rng(mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(freq_mhz)),
                                 static_cast<std::uint64_t>(start_index)));
    std::uniform_int_distribution<std::uint64_t> idx_dist(0, space.size_per_freq() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    design_point cur = space.point_at(freq_mhz, idx_dist(rng));
    if (cfg.require_feasible_init) {
        for (int tries = 0; tries < 64; ++tries) {
            if (ctx.evaluate(cur, cons).feasible) break;
            cur = space.point_at(freq_mhz, idx_dist(rng));
        }
    }
    eval_result cur_eval = ctx.evaluate(cur, cons);
    double cur_cost = score(cur_eval, cfg.obj, norm, cfg.penalty);

    start_result out;
    out.entries.push_back(make_entry(freq_mhz, start_index, 0, cur_eval, cur_cost));
    out.best = cur;
    out.best_cost = cur_cost;

    int step = 0;
    double t = cfg.t_init;
    do {
        for (int prop = 0; prop < cfg.proposals_per_temp; ++prop) {
            design_point cand = neighbor(cur, space, rng);
            eval_result cand_eval = ctx.evaluate(cand, cons);
            double cand_cost = score(cand_eval, cfg.obj, norm, cfg.penalty);
            out.entries.push_back(make_entry(freq_mhz, start_index, ++step, cand_eval, cand_cost));
            if (cand_cost < out.best_cost) {
                out.best_cost = cand_cost;
                out.best = cand;
            }
            double delta = cand_cost - cur_cost;
            if (delta <= 0 || unit(rng) < std::exp(-delta / t)) {
                cur = cand;
                cur_cost = cand_cost;
            }
        }
        t *= cfg.cooling;
    } while (t * cfg.cooling >= cfg.t_final);
    return out;
}

namespace {

score_normalizers make_normalizers(const design_space& space, const eval_context& ctx,
                                   const constraints& cons) {
    // Reference point: first enumerated point at the first configured
    // frequency (documented normalization anchor).
    design_point ref = space.point_at(space.freqs_mhz.front(), 0);
    eval_result e = ctx.evaluate(ref, constraints{cons.t_max_c, cons.max_perf_loss, {}});
    score_normalizers norm;
    norm.ref = e.obj;
    norm.t_max_c = cons.t_max_c;
    norm.latency_ref_s = cons.latency_ref_s;
    return norm;
}

}  // namespace

optimize_result optimize(const design_space& space, const annealer_config& cfg,
                         const eval_context& ctx, std::optional<constraints> base) {
    space.validate();
    cfg.validate();
    constraints cons = base.value_or(constraints{});
    if (!cons.latency_ref_s && cfg.obj != objective::latency) {
        annealer_config lat_cfg = cfg;
        lat_cfg.obj = objective::latency;
        lat_cfg.seed = mix_seed(cfg.seed, 0x6c617463ull);  // independent stream for the ref pass
        optimize_result lat = optimize(space, lat_cfg, ctx, constraints{cons.t_max_c,
                                                                        cons.max_perf_loss, {}});
        if (lat.any_feasible) cons.latency_ref_s = lat.best.obj.latency_s;
    }

    score_normalizers norm = make_normalizers(space, ctx, cons);
    const auto& freqs = space.freqs_mhz;
    const std::size_t n_starts = freqs.size() * static_cast<std::size_t>(cfg.starts_per_freq);
    std::vector<start_result> results(n_starts);
    unsigned threads = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
    parallel_for(n_starts, threads, [&](std::size_t i) {
        int freq = freqs[i / cfg.starts_per_freq];
        int start = static_cast<int>(i % cfg.starts_per_freq);
        results[i] = run_start(space, freq, start, cfg, ctx, cons, norm);
    });

    optimize_result out;
    out.cons = cons;
    out.norm = norm;
    best_tracker tracker;
    for (const auto& r : results)
        for (const auto& t : r.entries) {
            eval_result e = ctx.evaluate(t.point, cons);
            tracker.offer(t, sum_normalized_violations(e, norm));
            out.trajectories.push_back(t);
        }
    out.best = ctx.evaluate(tracker.point, cons);
    out.best_cost = score(out.best, cfg.obj, norm, cfg.penalty);
    out.any_feasible = tracker.feasible;
    return out;
}

optimize_result exhaustive(const design_space& space, const annealer_config& cfg,
                           const eval_context& ctx, std::optional<constraints> base,
                           std::uint64_t cap) {
    space.validate();
    cfg.validate();
    const std::uint64_t n = space.total_size();
    if (n > cap)
        throw config_error("exhaustive search refused: space has " + std::to_string(n) +
                           " points (cap " + std::to_string(cap) + ")");
    std::vector<design_point> points = space.enumerate();
    constraints cons = base.value_or(constraints{});
    unsigned threads = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();

    std::vector<eval_result> evals(points.size());
    parallel_for(points.size(), threads, [&](std::size_t i) {
        evals[i] = ctx.evaluate(points[i], constraints{cons.t_max_c, cons.max_perf_loss, {}});
    });
    if (!cons.latency_ref_s && cfg.obj != objective::latency) {
        double best_lat = 0;
        bool found = false;
        for (const auto& e : evals)
            if (e.feasible && (!found || e.obj.latency_s < best_lat)) {
                best_lat = e.obj.latency_s;
                found = true;
            }
        if (found) cons.latency_ref_s = best_lat;
    }

    score_normalizers norm = make_normalizers(space, ctx, cons);
    optimize_result out;
    out.cons = cons;
    out.norm = norm;
    best_tracker tracker;
    for (std::size_t i = 0; i < evals.size(); ++i) {
        eval_result e = evals[i];
        check_feasibility(e, cons);
        double cost = score(e, cfg.obj, norm, cfg.penalty);
        trajectory_entry t = make_entry(e.point.freq_mhz, 0, static_cast<int>(i), e, cost);
        tracker.offer(t, sum_normalized_violations(e, norm));
        out.trajectories.push_back(t);
    }
    out.best = ctx.evaluate(tracker.point, cons);
    out.best_cost = score(out.best, cfg.obj, norm, cfg.penalty);
    out.any_feasible = tracker.feasible;
    return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<trajectory_entry>& entries) {
    out << "freq_mhz,start,step,rows,cols,sram_i,sram_f,sram_o,latency_s,power_w,edap,max_c,"
           "feasible\n";
    for (const auto& t : entries)
        out << t.freq_mhz << "," << t.start << "," << t.step << "," << t.point.rows << ","
            << t.point.cols << "," << t.point.sram_ifmap_kb << "," << t.point.sram_filter_kb << ","
            << t.point.sram_ofmap_kb << "," << fmt_double(t.latency_s) << ","
            << fmt_double(t.power_w) << "," << fmt_double(t.edap) << "," << fmt_double(t.max_c)
            << "," << (t.feasible ? 1 : 0) << "\n";
}

std::vector<trajectory_entry> parse_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) ||
        trim(line) !=
            "freq_mhz,start,step,rows,cols,sram_i,sram_f,sram_o,latency_s,power_w,edap,max_c,"
            "feasible")
        throw parse_error("trajectory csv: bad header");
    std::vector<trajectory_entry> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto f = split(trim(line), ',');
        const std::string where = "trajectory csv row " + std::to_string(lineno);
        if (f.size() != 13) throw parse_error(where + ": expected 13 columns");
        trajectory_entry t;
        t.freq_mhz = static_cast<int>(parse_int(f[0], where));
        t.start = static_cast<int>(parse_int(f[1], where));
        t.step = static_cast<int>(parse_int(f[2], where));
        t.point.rows = static_cast<int>(parse_int(f[3], where));
        t.point.cols = static_cast<int>(parse_int(f[4], where));
        t.point.sram_ifmap_kb = static_cast<int>(parse_int(f[5], where));
        t.point.sram_filter_kb = static_cast<int>(parse_int(f[6], where));
        t.point.sram_ofmap_kb = static_cast<int>(parse_int(f[7], where));
        t.point.freq_mhz = t.freq_mhz;
        t.latency_s = parse_double(f[8], where);
        t.power_w = parse_double(f[9], where);
        t.edap = parse_double(f[10], where);
        t.max_c = parse_double(f[11], where);
        t.feasible = parse_int(f[12], where) != 0;
        out.push_back(t);
    }
    return out;
}

}  // namespace mono3d
