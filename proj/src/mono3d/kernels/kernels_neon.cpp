#include <arm_neon.h>

#include "mono3d/kernels/kernels.hpp"

// NEON variants, 2 doubles per lane (aarch64 only).

namespace mono3d::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
    double out = vaddvq_f64(acc);
    for (; i < n; ++i) out += a[i] * b[i];
    return out;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void xpay_neon(const double* x, double a, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(x + i), va, vld1q_f64(y + i)));
    for (; i < n; ++i) y[i] = x[i] + a * y[i];
}

void vdiv_neon(const double* x, const double* y, double* z, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(z + i, vdivq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    for (; i < n; ++i) z[i] = x[i] / y[i];
}

inline void link_pass(const double* g, const double* x, double* y, std::size_t s, std::size_t n) {
    if (n <= s) return;
    const std::size_t m = n - s;
    std::size_t i = 0;
    for (; i + 2 <= m; i += 2) {
        float64x2_t vg = vld1q_f64(g + i);
        vst1q_f64(y + i, vfmsq_f64(vld1q_f64(y + i), vg, vld1q_f64(x + i + s)));
        vst1q_f64(y + i + s, vfmsq_f64(vld1q_f64(y + i + s), vg, vld1q_f64(x + i)));
    }
    for (; i < m; ++i) {
        y[i] -= g[i] * x[i + s];
        y[i + s] -= g[i] * x[i];
    }
}

void stencil_neon(const grid_dims& d, const double* diag, const double* gx, const double* gy,
                  const double* gz, const double* x, double* y) {
    const std::size_t n = d.size();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vmulq_f64(vld1q_f64(diag + i), vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] = diag[i] * x[i];
    link_pass(gx, x, y, 1, n);
    link_pass(gy, x, y, static_cast<std::size_t>(d.nx), n);
    link_pass(gz, x, y, static_cast<std::size_t>(d.nx) * d.ny, n);
}

}  // namespace

const backend& neon_backend() {
    static const backend b{"neon", dot_neon, axpy_neon, xpay_neon, vdiv_neon, stencil_neon};
    return b;
}

}  // namespace mono3d::kernels
