#include "mono3d/thermal.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "mono3d/common.hpp"
#include "mono3d/kernels/kernels.hpp"

namespace mono3d {

void thermal_stack::validate() const {
    if (layers.size() < 2) throw config_error("thermal stack needs at least 2 layers");
    int active_count = 0;
    int last_active = -2;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.thickness_m <= 0 || l.conductivity_w_mk <= 0 || l.lateral_scale <= 0)
            throw config_error("stack layer '" + l.name +
                               "': thickness, conductivity and lateral_scale must be > 0");
        if (l.active) {
            if (last_active == static_cast<int>(i) - 1)
                throw config_error("active layers '" + layers[last_active].name + "' and '" +
                                   l.name + "' must be separated by a dielectric layer");
            last_active = static_cast<int>(i);
            ++active_count;
        }
    }
    if (active_count < 2)
        throw config_error("thermal stack needs >= 2 active layers (logic and SRAM tiers)");
    if (htc_w_m2k < 0 || secondary_r_c_per_w < 0)
        throw config_error("boundary parameters must be >= 0");
}

std::vector<int> thermal_stack::active_layer_indices() const {
    std::vector<int> idx;
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (layers[i].active) idx.push_back(static_cast<int>(i));
    return idx;
}

thermal_stack thermal_stack::load(const std::filesystem::path& path) {
    kv_file f = kv_file::load(path);
    thermal_stack s;
    s.ambient_c = f.get_double("ambient_c", s.ambient_c);
    s.htc_w_m2k = f.get_double("htc_w_m2k", s.htc_w_m2k);
    s.secondary_r_c_per_w = f.get_double("secondary_r_c_per_w", s.secondary_r_c_per_w);
    s.layers.clear();
    for (const auto& rec : f.get_all("layer")) {
        auto fields = split(rec, ',');
        if (fields.size() != 4 && fields.size() != 5)
            throw parse_error(path.string() + ": layer record '" + rec +
                              "' needs name, thickness_m, conductivity, active|passive"
                              "[, lateral_scale]");
        stack_layer l;
        l.name = trim(fields[0]);
        l.thickness_m = parse_double(fields[1], path.string() + " layer " + l.name);
        l.conductivity_w_mk = parse_double(fields[2], path.string() + " layer " + l.name);
        std::string flag = trim(fields[3]);
        if (flag == "active")
            l.active = true;
        else if (flag == "passive")
            l.active = false;
        else
            throw parse_error(path.string() + ": layer '" + l.name +
                              "': expected 'active' or 'passive', got '" + flag + "'");
        if (fields.size() == 5)
            l.lateral_scale = parse_double(fields[4], path.string() + " layer " + l.name);
        s.layers.push_back(std::move(l));
    }
    s.validate();
    return s;
}

void floorplan::validate() const {
    if (width_m <= 0 || height_m <= 0) throw floorplan_error("die dimensions must be > 0");
    const double eps = 1e-12 * std::max(width_m, height_m);
    auto check_tier = [&](const std::vector<fp_block>& blocks, const char* tier) {
        for (const auto& b : blocks) {
            if (b.w < 0 || b.h < 0 || b.power_w < 0)
                throw floorplan_error(std::string(tier) + " block '" + b.name +
                                      "': negative size or power");
            if (b.x < -eps || b.y < -eps || b.x + b.w > width_m + eps ||
                b.y + b.h > height_m + eps)
                throw floorplan_error(std::string(tier) + " block '" + b.name +
                                      "' exceeds the die outline");
        }
        for (std::size_t i = 0; i < blocks.size(); ++i)
            for (std::size_t j = i + 1; j < blocks.size(); ++j) {
                const auto& a = blocks[i];
                const auto& b = blocks[j];
                double ox = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
                double oy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
                if (ox > eps && oy > eps)
                    throw floorplan_error(std::string(tier) + " blocks '" + a.name + "' and '" +
                                          b.name + "' overlap");
            }
    };
    check_tier(tier1, "tier1");
    check_tier(tier2, "tier2");
}

double floorplan::total_power_w() const {
    double p = 0;
    for (const auto& b : tier1) p += b.power_w;
    for (const auto& b : tier2) p += b.power_w;
    return p;
}

floorplan build_floorplan(const design_point& p, const calibration& cal, double aspect_min,
                          double aspect_max) {
    chip_area_report area = chip_area(p, cal);
    const double f_m2 = area.footprint_mm2 * 1e-6;
    if (f_m2 <= 0) throw floorplan_error("zero chip footprint");
    double aspect = std::clamp(p.aspect_ratio(), aspect_min, aspect_max);
    floorplan fp;
    // H/W follows rows/cols so short/long equals the clamped array aspect.
    if (p.rows <= p.cols) {
        fp.height_m = std::sqrt(f_m2 * aspect);
        fp.width_m = f_m2 / fp.height_m;
    } else {
        fp.width_m = std::sqrt(f_m2 * aspect);
        fp.height_m = f_m2 / fp.width_m;
    }

    const double a1_m2 = area.tier1_mm2 * 1e-6;
    double s = std::sqrt(a1_m2 / f_m2);  // <= 1 since footprint = max(tiers)
    fp_block array;
    array.name = "array";
    array.w = fp.width_m * s;
    array.h = fp.height_m * s;
    array.x = (fp.width_m - array.w) / 2;
    array.y = (fp.height_m - array.h) / 2;
    fp.tier1.push_back(array);
    // Border whitespace (zero power) so tier1 tiles the die exactly.
    if (s < 1.0 - 1e-12) {
        auto ws = [&](double x, double y, double w, double h) {
            if (w > 0 && h > 0) fp.tier1.push_back({"whitespace", x, y, w, h, 0.0});
        };
        ws(0, 0, fp.width_m, array.y);
        ws(0, array.y + array.h, fp.width_m, fp.height_m - array.y - array.h);
        ws(0, array.y, array.x, array.h);
        ws(array.x + array.w, array.y, fp.width_m - array.x - array.w, array.h);
    }

    const char* names[3] = {"sram_ifmap", "sram_filter", "sram_ofmap"};
    int sizes[3] = {p.sram_ifmap_kb, p.sram_filter_kb, p.sram_ofmap_kb};
    double x = 0.0;
    for (int i = 0; i < 3; ++i) {
        double a_m2 = cal.sram(sizes[i]).area_mm2 * 1e-6;
        fp_block b;
        b.name = names[i];
        b.x = x;
        b.y = 0;
        b.w = a_m2 / fp.height_m;
        b.h = fp.height_m;
        x += b.w;
        if (x > fp.width_m * (1 + 1e-9))
            throw floorplan_error("SRAM blocks exceed the die area");
        fp.tier2.push_back(b);
    }
    if (x < fp.width_m * (1 - 1e-12))
        fp.tier2.push_back({"whitespace", x, 0, fp.width_m - x, fp.height_m, 0.0});
    fp.validate();
    return fp;
}

double max_temp(const temperature_map& tm) {
    return tm.max_c;
}

// ---------------------------------------------------------------------------
// Solver

struct steady_solver::impl {
    thermal_stack stack;
    double width, height;
    int nx, ny, nl;
    std::size_t nn;  // nodes: nl * ny * nx
    kernels::grid_dims dims;
    solver_options opt;
    bool use_direct = false;

    std::vector<double> diag, gx, gy, gz, gb;  // gb: conductance to ambient
    std::vector<double> warm;                  // previous solution

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;

    std::size_t node(int l, int j, int i) const {
        return (static_cast<std::size_t>(l) * ny + j) * nx + i;
    }

    void assemble();
    void factorize();
    std::vector<double> rasterize(const floorplan& fp) const;
    void overlap_weights(const fp_block& b, std::vector<std::pair<std::size_t, double>>& out) const;
    std::vector<double> solve_system(const std::vector<double>& rhs, solve_stats& stats);
};

void steady_solver::impl::assemble() {
    nn = static_cast<std::size_t>(nl) * ny * nx;
    dims = {nx, ny, nl};
    diag.assign(nn, 0.0);
    gx.assign(nn, 0.0);
    gy.assign(nn, 0.0);
    gz.assign(nn, 0.0);
    gb.assign(nn, 0.0);
    const double dx = width / nx;
    const double dy = height / ny;
    const double a_cell = dx * dy;

    for (int l = 0; l < nl; ++l) {
        const auto& lay = stack.layers[l];
        const double klat = lay.conductivity_w_mk * lay.lateral_scale;
        const double glx = klat * lay.thickness_m * dy / dx;
        const double gly = klat * lay.thickness_m * dx / dy;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                std::size_t n = node(l, j, i);
                if (i + 1 < nx) {
                    gx[n] = glx;
                    diag[n] += glx;
                    diag[n + 1] += glx;
                }
                if (j + 1 < ny) {
                    gy[n] = gly;
                    diag[n] += gly;
                    diag[n + nx] += gly;
                }
            }
    }
    for (int l = 0; l + 1 < nl; ++l) {
        const auto& a = stack.layers[l];
        const auto& b = stack.layers[l + 1];
        // half-thickness series between adjacent layer centers
        const double gv =
            a_cell / (a.thickness_m / (2 * a.conductivity_w_mk) +
                      b.thickness_m / (2 * b.conductivity_w_mk));
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                std::size_t n = node(l, j, i);
                std::size_t m = node(l + 1, j, i);
                gz[n] = gv;
                diag[n] += gv;
                diag[m] += gv;
            }
    }
    if (stack.htc_w_m2k > 0) {
        const auto& top = stack.layers[0];
        const double g =
            a_cell / (top.thickness_m / (2 * top.conductivity_w_mk) + 1.0 / stack.htc_w_m2k);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                std::size_t n = node(0, j, i);
                gb[n] += g;
                diag[n] += g;
            }
    }
    if (stack.secondary_r_c_per_w > 0) {
        const auto& bot = stack.layers[nl - 1];
        const double a_die = width * height;
        // lumped board-side resistance, split per cell by area
        const double g = 1.0 / (bot.thickness_m / (2 * bot.conductivity_w_mk * a_cell) +
                                stack.secondary_r_c_per_w * a_die / a_cell);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                std::size_t n = node(nl - 1, j, i);
                gb[n] += g;
                diag[n] += g;
            }
    }
}

void steady_solver::impl::factorize() {
    using T = Eigen::Triplet<double>;
    std::vector<T> trip;
    trip.reserve(nn * 4);
    const std::size_t sx = 1, sy = static_cast<std::size_t>(nx),
                      sz = static_cast<std::size_t>(nx) * ny;
    for (std::size_t n = 0; n < nn; ++n) {
        trip.emplace_back(n, n, diag[n]);
        if (gx[n] != 0.0) {
            trip.emplace_back(n, n + sx, -gx[n]);
            trip.emplace_back(n + sx, n, -gx[n]);
        }
        if (gy[n] != 0.0) {
            trip.emplace_back(n, n + sy, -gy[n]);
            trip.emplace_back(n + sy, n, -gy[n]);
        }
        if (gz[n] != 0.0) {
            trip.emplace_back(n, n + sz, -gz[n]);
            trip.emplace_back(n + sz, n, -gz[n]);
        }
    }
    Eigen::SparseMatrix<double> G(static_cast<Eigen::Index>(nn), static_cast<Eigen::Index>(nn));
    G.setFromTriplets(trip.begin(), trip.end());
    ldlt.compute(G);
    if (ldlt.info() != Eigen::Success)
        throw solver_error("sparse factorization of the thermal system failed");
}

void steady_solver::impl::overlap_weights(const fp_block& b,
                                          std::vector<std::pair<std::size_t, double>>& out) const {
    out.clear();
    if (b.w <= 0 || b.h <= 0) return;
    const double dx = width / nx;
    const double dy = height / ny;
    int i0 = std::max(0, static_cast<int>(std::floor(b.x / dx)));
    int i1 = std::min(nx - 1, static_cast<int>(std::ceil((b.x + b.w) / dx)) - 1);
    int j0 = std::max(0, static_cast<int>(std::floor(b.y / dy)));
    int j1 = std::min(ny - 1, static_cast<int>(std::ceil((b.y + b.h) / dy)) - 1);
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            double ox = std::min((i + 1) * dx, b.x + b.w) - std::max(i * dx, b.x);
            double oy = std::min((j + 1) * dy, b.y + b.h) - std::max(j * dy, b.y);
            if (ox > 0 && oy > 0)
                out.emplace_back(static_cast<std::size_t>(j) * nx + i, ox * oy / (b.w * b.h));
        }
}

std::vector<double> steady_solver::impl::rasterize(const floorplan& fp) const {
    std::vector<double> p(nn, 0.0);
    auto active = stack.active_layer_indices();
    std::vector<std::pair<std::size_t, double>> w;
    auto add_tier = [&](const std::vector<fp_block>& blocks, int layer) {
        const std::size_t base = static_cast<std::size_t>(layer) * ny * nx;
        for (const auto& b : blocks) {
            if (b.power_w == 0) continue;
            overlap_weights(b, w);
            for (auto& [cell, frac] : w) p[base + cell] += b.power_w * frac;
        }
    };
    add_tier(fp.tier1, active[0]);
    add_tier(fp.tier2, active[1]);
    return p;
}

std::vector<double> steady_solver::impl::solve_system(const std::vector<double>& rhs,
                                                      solve_stats& stats) {
    if (use_direct) {
        Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(nn));
        Eigen::VectorXd x = ldlt.solve(b);
        if (ldlt.info() != Eigen::Success) throw solver_error("direct thermal solve failed");
        stats.iterations = 0;
        stats.residual = 0.0;
        return std::vector<double>(x.data(), x.data() + nn);
    }

    // Jacobi-preconditioned CG on the matrix-free stencil operator.
    const auto& k = kernels::active();
    std::vector<double> x = warm.empty() ? std::vector<double>(nn, stack.ambient_c) : warm;
    std::vector<double> r(nn), z(nn), p(nn), q(nn);
    k.stencil_apply(dims, diag.data(), gx.data(), gy.data(), gz.data(), x.data(), r.data());
    for (std::size_t i = 0; i < nn; ++i) r[i] = rhs[i] - r[i];
    const double bnorm = std::sqrt(k.dot(rhs.data(), rhs.data(), nn));
    const double tol = opt.rtol * (bnorm > 0 ? bnorm : 1.0);
    double rnorm = std::sqrt(k.dot(r.data(), r.data(), nn));
    int it = 0;
    if (rnorm > tol) {
        k.vdiv(r.data(), diag.data(), z.data(), nn);
        p = z;
        double rz = k.dot(r.data(), z.data(), nn);
        for (; it < opt.max_iter; ++it) {
            k.stencil_apply(dims, diag.data(), gx.data(), gy.data(), gz.data(), p.data(),
                            q.data());
            const double alpha = rz / k.dot(p.data(), q.data(), nn);
            k.axpy(alpha, p.data(), x.data(), nn);
            k.axpy(-alpha, q.data(), r.data(), nn);
            rnorm = std::sqrt(k.dot(r.data(), r.data(), nn));
            if (rnorm <= tol) {
                ++it;
                break;
            }
            k.vdiv(r.data(), diag.data(), z.data(), nn);
            const double rz_next = k.dot(r.data(), z.data(), nn);
            k.xpay(z.data(), rz_next / rz, p.data(), nn);
            rz = rz_next;
        }
        if (rnorm > tol)
            throw solver_error("thermal CG did not converge: relative residual " +
                               fmt_double(rnorm / (bnorm > 0 ? bnorm : 1.0)) + " after " +
                               std::to_string(opt.max_iter) + " iterations");
    }
    stats.iterations = it;
    stats.residual = bnorm > 0 ? rnorm / bnorm : rnorm;
    return x;
}

steady_solver::steady_solver(const thermal_stack& stack, double width_m, double height_m, int nx,
                             int ny, solver_options opt)
    : impl_(std::make_unique<impl>()) {
    stack.validate();
    if (nx < 4 || ny < 4) throw validation_error("thermal grid must be at least 4x4");
    if (width_m <= 0 || height_m <= 0) throw validation_error("die dimensions must be > 0");
    if (stack.htc_w_m2k <= 0 && stack.secondary_r_c_per_w <= 0)
        throw solver_error("no heat path to ambient (htc 0 and no secondary path)");
    impl_->stack = stack;
    impl_->width = width_m;
    impl_->height = height_m;
    impl_->nx = nx;
    impl_->ny = ny;
    impl_->nl = static_cast<int>(stack.layers.size());
    impl_->opt = opt;
    impl_->assemble();
    // automatic = CG: with warm starts it beats a fresh factorization for the
    // repeated-solve pattern of the leakage loop.
    impl_->use_direct = opt.backend == solver_options::kind::direct;
    if (impl_->use_direct) impl_->factorize();
}

steady_solver::~steady_solver() = default;
steady_solver::steady_solver(steady_solver&&) noexcept = default;
steady_solver& steady_solver::operator=(steady_solver&&) noexcept = default;

const char* steady_solver::backend_name() const {
    return impl_->use_direct ? "direct" : kernels::active().name;
}

temperature_map steady_solver::solve(const floorplan& fp) {
    fp.validate();
    if (std::abs(fp.width_m - impl_->width) > 1e-12 * impl_->width ||
        std::abs(fp.height_m - impl_->height) > 1e-12 * impl_->height)
        throw validation_error("floorplan dimensions do not match the solver geometry");

    std::vector<double> p = impl_->rasterize(fp);
    std::vector<double> rhs(impl_->nn);
    for (std::size_t n = 0; n < impl_->nn; ++n)
        rhs[n] = p[n] + impl_->gb[n] * impl_->stack.ambient_c;

    stats_ = {};
    std::vector<double> t = impl_->solve_system(rhs, stats_);
    impl_->warm = t;

    stats_.injected_w = fp.total_power_w();
    for (std::size_t n = 0; n < impl_->nn; ++n)
        stats_.boundary_w += impl_->gb[n] * (t[n] - impl_->stack.ambient_c);

    temperature_map tm;
    tm.nx = impl_->nx;
    tm.ny = impl_->ny;
    auto active = impl_->stack.active_layer_indices();
    tm.max_c = -1e300;
    for (int l : active) {
        tm.layer_names.push_back(impl_->stack.layers[l].name);
        const std::size_t base = static_cast<std::size_t>(l) * impl_->ny * impl_->nx;
        std::vector<double> grid(t.begin() + base,
                                 t.begin() + base + static_cast<std::size_t>(impl_->ny) * impl_->nx);
        for (double v : grid) tm.max_c = std::max(tm.max_c, v);
        tm.layer_t_c.push_back(std::move(grid));
    }
    std::vector<std::pair<std::size_t, double>> w;
    auto block_means = [&](const std::vector<fp_block>& blocks, int tier_pos) {
        for (const auto& b : blocks) {
            if (b.name == "whitespace") continue;
            impl_->overlap_weights(b, w);
            double acc = 0, wsum = 0;
            for (auto& [cell, frac] : w) {
                acc += tm.layer_t_c[tier_pos][cell] * frac;
                wsum += frac;
            }
            tm.block_mean_c[b.name] = wsum > 0 ? acc / wsum : impl_->stack.ambient_c;
        }
    };
    block_means(fp.tier1, 0);
    block_means(fp.tier2, 1);
    return tm;
}

temperature_map solve_steady(const thermal_stack& stack, const floorplan& fp, int nx, int ny,
                             solver_options opt) {
    steady_solver s(stack, fp.width_m, fp.height_m, nx, ny, opt);
    return s.solve(fp);
}

// ---------------------------------------------------------------------------
// CSV import/export

void write_temperature_csv(const temperature_map& tm, std::ostream& out) {
    out << "layer,y,x,t_c\n";
    for (std::size_t l = 0; l < tm.layer_t_c.size(); ++l)
        for (int j = 0; j < tm.ny; ++j)
            for (int i = 0; i < tm.nx; ++i)
                out << tm.layer_names[l] << "," << j << "," << i << ","
                    << fmt_double(tm.layer_t_c[l][static_cast<std::size_t>(j) * tm.nx + i])
                    << "\n";
}

temperature_map parse_temperature_csv(std::istream& in) {
    temperature_map tm;
    std::string line;
    if (!std::getline(in, line) || trim(line) != "layer,y,x,t_c")
        throw parse_error("temperature csv: bad header");
    std::map<std::string, std::map<std::pair<int, int>, double>> grids;
    std::vector<std::string> order;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto f = split(trim(line), ',');
        if (f.size() != 4) throw parse_error("temperature csv row " + std::to_string(lineno));
        std::string name = trim(f[0]);
        if (!grids.count(name)) order.push_back(name);
        int j = static_cast<int>(parse_int(f[1], "temperature csv y"));
        int i = static_cast<int>(parse_int(f[2], "temperature csv x"));
        grids[name][{j, i}] = parse_double(f[3], "temperature csv t_c");
        tm.ny = std::max(tm.ny, j + 1);
        tm.nx = std::max(tm.nx, i + 1);
    }
    tm.max_c = -1e300;
    for (const auto& name : order) {
        std::vector<double> g(static_cast<std::size_t>(tm.nx) * tm.ny, 0.0);
        for (auto& [ji, v] : grids[name]) {
            g[static_cast<std::size_t>(ji.first) * tm.nx + ji.second] = v;
            tm.max_c = std::max(tm.max_c, v);
        }
        tm.layer_names.push_back(name);
        tm.layer_t_c.push_back(std::move(g));
    }
    return tm;
}

void write_floorplan_csv(const floorplan& fp, std::ostream& out) {
    out << "tier,name,x_m,y_m,w_m,h_m,power_w\n";
    out << "0,die,0,0," << fmt_double(fp.width_m) << "," << fmt_double(fp.height_m) << ",0\n";
    for (const auto& b : fp.tier1)
        out << "1," << b.name << "," << fmt_double(b.x) << "," << fmt_double(b.y) << ","
            << fmt_double(b.w) << "," << fmt_double(b.h) << "," << fmt_double(b.power_w) << "\n";
    for (const auto& b : fp.tier2)
        out << "2," << b.name << "," << fmt_double(b.x) << "," << fmt_double(b.y) << ","
            << fmt_double(b.w) << "," << fmt_double(b.h) << "," << fmt_double(b.power_w) << "\n";
}

floorplan parse_floorplan_csv(std::istream& in) {
    floorplan fp;
    std::string line;
    if (!std::getline(in, line) || trim(line) != "tier,name,x_m,y_m,w_m,h_m,power_w")
        throw parse_error("floorplan csv: bad header");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto f = split(trim(line), ',');
        const std::string where = "floorplan csv row " + std::to_string(lineno);
        if (f.size() != 7) throw parse_error(where);
        int tier = static_cast<int>(parse_int(f[0], where));
        fp_block b;
        b.name = trim(f[1]);
        b.x = parse_double(f[2], where);
        b.y = parse_double(f[3], where);
        b.w = parse_double(f[4], where);
        b.h = parse_double(f[5], where);
        b.power_w = parse_double(f[6], where);
        if (tier == 0) {
            fp.width_m = b.w;
            fp.height_m = b.h;
        } else if (tier == 1) {
            fp.tier1.push_back(std::move(b));
        } else if (tier == 2) {
            fp.tier2.push_back(std::move(b));
        } else {
            throw parse_error(where + ": tier must be 0, 1 or 2");
        }
    }
    fp.validate();
    return fp;
}

}  // namespace mono3d
