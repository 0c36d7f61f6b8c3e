#include <immintrin.h>

#include "mono3d/kernels/kernels.hpp"

// AVX2+FMA variants, 4 doubles per lane. Compiled with -mavx2 -mfma for this
// translation unit only; dispatch.cpp guards selection with cpuid.

namespace mono3d::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void xpay_avx2(const double* x, double a, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, vy, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] = x[i] + a * y[i];
}

void vdiv_avx2(const double* x, const double* y, double* z, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(z + i, _mm256_div_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) z[i] = x[i] / y[i];
}

// y[i] -= g[i]*x[i+s];  y[i+s] -= g[i]*x[i]  for i in [0, n-s)
inline void link_pass(const double* g, const double* x, double* y, std::size_t s, std::size_t n) {
    if (n <= s) return;
    const std::size_t m = n - s;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        __m256d vg = _mm256_loadu_pd(g + i);
        __m256d ylo = _mm256_loadu_pd(y + i);
        ylo = _mm256_fnmadd_pd(vg, _mm256_loadu_pd(x + i + s), ylo);
        _mm256_storeu_pd(y + i, ylo);
        __m256d yhi = _mm256_loadu_pd(y + i + s);
        yhi = _mm256_fnmadd_pd(vg, _mm256_loadu_pd(x + i), yhi);
        _mm256_storeu_pd(y + i + s, yhi);
    }
    for (; i < m; ++i) {
        y[i] -= g[i] * x[i + s];
        y[i + s] -= g[i] * x[i];
    }
}

void stencil_avx2(const grid_dims& d, const double* diag, const double* gx, const double* gy,
                  const double* gz, const double* x, double* y) {
    const std::size_t n = d.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(diag + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = diag[i] * x[i];
    link_pass(gx, x, y, 1, n);
    link_pass(gy, x, y, static_cast<std::size_t>(d.nx), n);
    link_pass(gz, x, y, static_cast<std::size_t>(d.nx) * d.ny, n);
}

}  // namespace

const backend& avx2_backend() {
    static const backend b{"avx2", dot_avx2, axpy_avx2, xpay_avx2, vdiv_avx2, stencil_avx2};
    return b;
}

}  // namespace mono3d::kernels
