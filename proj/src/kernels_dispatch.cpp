#include "madegan/kernels.hpp"

namespace madegan::kernels {

namespace {

const KernelTable* detect() {
#if MADEGAN_HAVE_AVX2
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return &avx2_table();
#endif
    return &scalar_table();
}

const KernelTable* g_active = detect();

}  // namespace

const KernelTable& active() { return *g_active; }

const KernelTable& set_active(const KernelTable& t) {
    const KernelTable* prev = g_active;
    g_active = &t;
    return *prev;
}

std::string_view backend_name() { return g_active->name; }

}  // namespace madegan::kernels
