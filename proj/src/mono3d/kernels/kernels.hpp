#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Data-parallel inner loops of the steady-state thermal solver (CG on the
// layered finite-volume grid). Each backend implements the same table;
// dispatch.cpp picks one at runtime from CPU features, overridable with the
// MONO3D_SIMD environment variable or force_backend() in tests.
//
// Layout contract for stencil_apply: nodes are indexed (layer, y, x) row-major
// with x fastest. Link arrays hold the conductance between node n and its
// +x / +y / +z neighbor; entries on the far boundary of each axis are zero, so
// the shifted passes can run branch-free across row/layer seams.

namespace mono3d::kernels {

struct grid_dims {
    int nx = 0, ny = 0, nl = 0;
    std::size_t size() const {
        return static_cast<std::size_t>(nx) * ny * nl;
    }
};

using dot_fn = double (*)(const double*, const double*, std::size_t);
using axpy_fn = void (*)(double, const double*, double*, std::size_t);        // y += a*x
using xpay_fn = void (*)(const double*, double, double*, std::size_t);        // y = x + a*y
using vdiv_fn = void (*)(const double*, const double*, double*, std::size_t); // z = x/y
using stencil_fn = void (*)(const grid_dims&, const double* diag, const double* gx,
                            const double* gy, const double* gz, const double* x, double* y);

struct backend {
    const char* name;
    dot_fn dot;
    axpy_fn axpy;
    xpay_fn xpay;
    vdiv_fn vdiv;
    stencil_fn stencil_apply;
};

const backend& scalar_backend();
#if defined(MONO3D_HAVE_AVX2)
const backend& avx2_backend();
#endif
#if defined(MONO3D_HAVE_NEON)
const backend& neon_backend();
#endif

// Backends usable on this machine (scalar first).
std::vector<const backend*> available_backends();

// The runtime-selected backend. First call resolves it and the choice then
// stays fixed for the process so solver results are reproducible.
const backend& active();

// Test hook: force a backend by name ("scalar", "avx2", "neon").
// Throws if unknown or unavailable. Not safe while solves are running.
void force_backend(const std::string& name);

}  // namespace mono3d::kernels
