#include <atomic>
#include <cstdlib>
#include <stdexcept>

#include "mono3d/kernels/kernels.hpp"

namespace mono3d::kernels {
namespace {

bool avx2_supported() {
#if defined(MONO3D_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const backend* pick(const std::string& name) {
    if (name == "scalar") return &scalar_backend();
#if defined(MONO3D_HAVE_AVX2)
    if (name == "avx2" && avx2_supported()) return &avx2_backend();
#endif
#if defined(MONO3D_HAVE_NEON)
    if (name == "neon") return &neon_backend();
#endif
    return nullptr;
}

const backend* resolve_default() {
    if (const char* env = std::getenv("MONO3D_SIMD"); env && *env && std::string(env) != "auto") {
        const backend* b = pick(env);
        if (!b) throw std::runtime_error(std::string("MONO3D_SIMD=") + env +
                                         " is unknown or unsupported on this CPU");
        return b;
    }
#if defined(MONO3D_HAVE_AVX2)
    if (avx2_supported()) return &avx2_backend();
#endif
#if defined(MONO3D_HAVE_NEON)
    return &neon_backend();
#endif
    return &scalar_backend();
}

std::atomic<const backend*> g_active{nullptr};

}  // namespace

std::vector<const backend*> available_backends() {
    std::vector<const backend*> out{&scalar_backend()};
#if defined(MONO3D_HAVE_AVX2)
    if (avx2_supported()) out.push_back(&avx2_backend());
#endif
#if defined(MONO3D_HAVE_NEON)
    out.push_back(&neon_backend());
#endif
    return out;
}

const backend& active() {
    const backend* b = g_active.load(std::memory_order_acquire);
    if (!b) {
        b = resolve_default();
        const backend* expected = nullptr;
        g_active.compare_exchange_strong(expected, b, std::memory_order_acq_rel);
        b = g_active.load(std::memory_order_acquire);
    }
    return *b;
}

void force_backend(const std::string& name) {
    const backend* b = pick(name);
    if (!b) throw std::runtime_error("kernel backend '" + name + "' unknown or unsupported");
    g_active.store(b, std::memory_order_release);
}

}  // namespace mono3d::kernels
