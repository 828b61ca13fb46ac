#pragma once

#include <cstddef>
#include <string_view>

// Hot arithmetic kernels used by the tensor ops. Each kernel has a scalar
// reference implementation and, on x86-64 with AVX2, a vectorized variant
// selected once at startup. The dispatch table is swappable so the
// equivalence tests can run both backends on identical inputs.

namespace madegan::kernels {

struct KernelTable {
    double (*dot)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    void (*scale)(double alpha, double* x, std::size_t n);
    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    const char* name;
};

const KernelTable& scalar_table();
#if MADEGAN_HAVE_AVX2
const KernelTable& avx2_table();
#endif

// Active table (AVX2 when the CPU supports it, scalar otherwise).
const KernelTable& active();

// Override the active table; returns the previous one. Test hook.
const KernelTable& set_active(const KernelTable& t);

std::string_view backend_name();

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy(alpha, x, y, n); }
inline void scale(double alpha, double* x, std::size_t n) { active().scale(alpha, x, n); }
inline void add(const double* a, const double* b, double* out, std::size_t n) { active().add(a, b, out, n); }
inline void sub(const double* a, const double* b, double* out, std::size_t n) { active().sub(a, b, out, n); }
inline void mul(const double* a, const double* b, double* out, std::size_t n) { active().mul(a, b, out, n); }
inline double sum(const double* x, std::size_t n) { return active().sum(x, n); }

}  // namespace madegan::kernels
