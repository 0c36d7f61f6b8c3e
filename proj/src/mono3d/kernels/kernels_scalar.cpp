#include "mono3d/kernels/kernels.hpp"

// Reference kernels. Every SIMD variant is equivalence-tested against these.

namespace mono3d::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpay_scalar(const double* x, double a, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + a * y[i];
}

void vdiv_scalar(const double* x, const double* y, double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] / y[i];
}

void stencil_scalar(const grid_dims& d, const double* diag, const double* gx,
                    const double* gy, const double* gz, const double* x, double* y) {
    const std::size_t n = d.size();
    const std::size_t sx = 1;
    const std::size_t sy = static_cast<std::size_t>(d.nx);
    const std::size_t sz = static_cast<std::size_t>(d.nx) * d.ny;
    for (std::size_t i = 0; i < n; ++i) y[i] = diag[i] * x[i];
    // Link terms as shifted passes; boundary links are zero by construction.
    if (n > sx)
        for (std::size_t i = 0; i < n - sx; ++i) {
            y[i] -= gx[i] * x[i + sx];
            y[i + sx] -= gx[i] * x[i];
        }
    if (n > sy)
        for (std::size_t i = 0; i < n - sy; ++i) {
            y[i] -= gy[i] * x[i + sy];
            y[i + sy] -= gy[i] * x[i];
        }
    if (n > sz)
        for (std::size_t i = 0; i < n - sz; ++i) {
            y[i] -= gz[i] * x[i + sz];
            y[i + sz] -= gz[i] * x[i];
        }
}

}  // namespace

const backend& scalar_backend() {
    static const backend b{"scalar", dot_scalar, axpy_scalar, xpay_scalar, vdiv_scalar,
                           stencil_scalar};
    return b;
}

}  // namespace mono3d::kernels
