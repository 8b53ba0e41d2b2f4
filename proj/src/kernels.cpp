#include "atg/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace atg::kernels {

double dot(std::span<const double> a, std::span<const double> b, Exec exec) {
    return chunked_sum(exec, a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double norm2(std::span<const double> a, Exec exec) { return std::sqrt(dot(a, a, exec)); }

double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y, Exec exec) {
    for_each_index(exec, y.size(), [&](std::size_t i) { y[i] += alpha * x[i]; });
}

void xpby(std::span<const double> x, double beta, std::span<double> y, Exec exec) {
    for_each_index(exec, y.size(), [&](std::size_t i) { y[i] = x[i] + beta * y[i]; });
}

double ordered_sum(std::span<const double> values) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace atg::kernels
