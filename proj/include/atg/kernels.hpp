#pragma once

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace atg {

/// How element loops and vector kernels run. Both paths produce identical
/// results: parallel loops write per-item slots that are combined in a fixed
/// order afterwards.
enum class Exec { Serial, Parallel };

namespace kernels {

/// Reductions are split into chunks of this size and the chunk partials are
/// summed in order, so the result does not depend on the thread count.
inline constexpr std::size_t kReductionChunk = 4096;

template <typename F>
void for_each_index(Exec exec, std::size_t n, F&& body) {
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) body(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < n; ++i) body(i);
    }
}

/// Like for_each_index, but an exception thrown by body is captured and the
/// one from the lowest index is rethrown after the loop.
template <typename F>
void for_each_index_checked(Exec exec, std::size_t n, F&& body) {
    std::vector<std::exception_ptr> errors;
    bool any = false;
    if (exec == Exec::Parallel) {
        errors.resize(n);
#pragma omp parallel for schedule(static) reduction(|| : any)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
                any = true;
            }
        }
        if (any) {
            for (auto& e : errors) {
                if (e) std::rethrow_exception(e);
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) body(i);
    }
}

/// Sum of f(i) for i in [0, n) with a thread-count independent summation order.
template <typename F>
double chunked_sum(Exec exec, std::size_t n, F&& f) {
    const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
    std::vector<double> partial(chunks, 0.0);
    for_each_index(exec, chunks, [&](std::size_t c) {
        const std::size_t lo = c * kReductionChunk;
        const std::size_t hi = lo + kReductionChunk < n ? lo + kReductionChunk : n;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        partial[c] = s;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

double dot(std::span<const double> a, std::span<const double> b, Exec exec = Exec::Parallel);
double norm2(std::span<const double> a, Exec exec = Exec::Parallel);
double norm_inf(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y, Exec exec = Exec::Parallel);
/// y = x + beta * y
void xpby(std::span<const double> x, double beta, std::span<double> y, Exec exec = Exec::Parallel);
/// Ordered sum of a vector of per-item contributions.
double ordered_sum(std::span<const double> values);

int max_threads();

}  // namespace kernels
}  // namespace atg
