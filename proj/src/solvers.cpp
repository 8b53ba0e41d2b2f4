#include "atg/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace atg {

namespace {

using kernels::axpy;
using kernels::dot;
using kernels::norm2;

std::vector<double> initial_guess(std::size_t n, std::span<const double> x0) {
    if (x0.empty()) return std::vector<double>(n, 0.0);
    if (x0.size() != n) throw std::invalid_argument("solver: initial guess has wrong length");
    return {x0.begin(), x0.end()};
}

void check_inputs(const SparseMatrix& a, std::span<const double> b) {
    if (b.size() != a.n()) throw std::invalid_argument("solver: right-hand side has wrong length");
    for (double v : b) {
        if (!std::isfinite(v)) throw std::invalid_argument("solver: right-hand side is not finite");
    }
}

double true_residual(const SparseMatrix& a, std::span<const double> b, std::span<const double> x,
                     std::vector<double>& r, Exec exec) {
    a.multiply(x, r, exec);
    kernels::for_each_index(exec, r.size(), [&](std::size_t i) { r[i] = b[i] - r[i]; });
    return norm2(r, exec);
}

std::size_t iteration_budget(const SparseMatrix& a, const SolverOptions& opts) {
    return opts.max_iter ? opts.max_iter : std::max<std::size_t>(10 * a.n(), 10);
}

// Inverse diagonal; rows with a zero diagonal are left unscaled.
std::vector<double> jacobi_scaling(const SparseMatrix& a) {
    auto d = a.diagonal();
    for (auto& v : d) v = v != 0.0 ? 1.0 / v : 1.0;
    return d;
}

}  // namespace

SolveResult cg_solve(const SparseMatrix& a, std::span<const double> b, const SolverOptions& opts,
                     std::span<const double> x0) {
    check_inputs(a, b);
    const auto n = a.n();
    const auto exec = opts.exec;
    SolveResult out;
    const double bnorm = norm2(b, exec);
    if (bnorm == 0.0) {
        out.x.assign(n, 0.0);
        out.report = {0, 0.0, true, "zero right-hand side"};
        return out;
    }

    const std::size_t sample = std::min<std::size_t>(n, 64);
    for (std::size_t i = 0; i < sample; ++i) {
        for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
            const double aij = a.values()[k];
            const double aji = a.coeff(a.cols()[k], static_cast<Index>(i));
            if (std::abs(aij - aji) > 1e-12 * std::max(1.0, std::abs(aij))) {
                throw std::invalid_argument("cg_solve: matrix is not symmetric");
            }
        }
    }
    auto inv_diag = a.diagonal();
    for (std::size_t i = 0; i < n; ++i) {
        if (inv_diag[i] == 0.0) {
            throw PreconditionerError("cg_solve: zero diagonal entry in row " + std::to_string(i));
        }
        inv_diag[i] = 1.0 / inv_diag[i];
    }

    auto& x = out.x;
    x = initial_guess(n, x0);
    std::vector<double> r(n), z(n), p(n), ap(n);
    double rel = true_residual(a, b, x, r, exec) / bnorm;
    const auto budget = iteration_budget(a, opts);
    std::size_t it = 0;

    while (rel > opts.tol && it < budget) {
        kernels::for_each_index(exec, n, [&](std::size_t i) { z[i] = inv_diag[i] * r[i]; });
        p = z;
        double rz = dot(r, z, exec);
        bool restart = false;
        while (it < budget) {
            a.multiply(p, ap, exec);
            const double pap = dot(p, ap, exec);
            if (!(pap > 0.0)) {
                out.report = {it, rel, false, "matrix is not positive definite"};
                return out;
            }
            const double alpha = rz / pap;
            axpy(alpha, p, x, exec);
            axpy(-alpha, ap, r, exec);
            ++it;
            rel = norm2(r, exec) / bnorm;
            if (rel <= opts.tol) {
                restart = true;
                break;
            }
            kernels::for_each_index(exec, n, [&](std::size_t i) { z[i] = inv_diag[i] * r[i]; });
            const double rz_new = dot(r, z, exec);
            kernels::xpby(z, rz_new / rz, p, exec);
            rz = rz_new;
        }
        // Guard against drift between the recursive and the true residual.
        rel = true_residual(a, b, x, r, exec) / bnorm;
        if (!restart) break;
    }
    out.report = {it, rel, rel <= opts.tol, rel <= opts.tol ? "converged" : "iteration limit reached"};
    return out;
}

SolveResult gmres_solve(const SparseMatrix& a, std::span<const double> b, const SolverOptions& opts,
                        std::span<const double> x0, std::size_t restart) {
    check_inputs(a, b);
    const auto n = a.n();
    const auto exec = opts.exec;
    SolveResult out;
    const double bnorm = norm2(b, exec);
    if (bnorm == 0.0) {
        out.x.assign(n, 0.0);
        out.report = {0, 0.0, true, "zero right-hand side"};
        return out;
    }
    const auto scale = jacobi_scaling(a);
    const auto budget = iteration_budget(a, opts);
    const std::size_t m = std::max<std::size_t>(1, std::min(restart, n));

    auto& x = out.x;
    x = initial_guess(n, x0);
    std::vector<double> r(n), w(n), tmp(n);
    std::vector<std::vector<double>> v(m + 1, std::vector<double>(n));
    std::vector<double> h((m + 1) * m), cs(m), sn(m), g(m + 1), y(m);
    auto H = [&](std::size_t i, std::size_t j) -> double& { return h[i * m + j]; };

    double beta = true_residual(a, b, x, r, exec);
    double rel = beta / bnorm;
    std::size_t it = 0;
    while (rel > opts.tol && it < budget) {
        std::fill(h.begin(), h.end(), 0.0);
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;
        for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
        std::size_t k = 0;
        for (; k < m && it < budget; ++k, ++it) {
            kernels::for_each_index(exec, n, [&](std::size_t i) { tmp[i] = scale[i] * v[k][i]; });
            a.multiply(tmp, w, exec);
            for (std::size_t j = 0; j <= k; ++j) {
                H(j, k) = dot(w, v[j], exec);
                axpy(-H(j, k), v[j], w, exec);
            }
            H(k + 1, k) = norm2(w, exec);
            const bool happy = H(k + 1, k) <= 1e-14 * beta;
            if (!happy) {
                for (std::size_t i = 0; i < n; ++i) v[k + 1][i] = w[i] / H(k + 1, k);
            }
            for (std::size_t j = 0; j < k; ++j) {
                const double t = cs[j] * H(j, k) + sn[j] * H(j + 1, k);
                H(j + 1, k) = -sn[j] * H(j, k) + cs[j] * H(j + 1, k);
                H(j, k) = t;
            }
            const double denom = std::hypot(H(k, k), H(k + 1, k));
            cs[k] = denom == 0.0 ? 1.0 : H(k, k) / denom;
            sn[k] = denom == 0.0 ? 0.0 : H(k + 1, k) / denom;
            H(k, k) = denom;
            H(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            if (std::abs(g[k + 1]) / bnorm <= opts.tol || happy) {
                ++k;
                ++it;
                break;
            }
        }
        // Back substitution on the leading k x k triangle; singular pivots are skipped.
        for (std::size_t ii = k; ii-- > 0;) {
            double s = g[ii];
            for (std::size_t j = ii + 1; j < k; ++j) s -= H(ii, j) * y[j];
            y[ii] = H(ii, ii) != 0.0 ? s / H(ii, ii) : 0.0;
        }
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (std::size_t j = 0; j < k; ++j) axpy(y[j], v[j], tmp, exec);
        for (std::size_t i = 0; i < n; ++i) x[i] += scale[i] * tmp[i];
        const double prev = rel;
        beta = true_residual(a, b, x, r, exec);
        rel = beta / bnorm;
        if (beta == 0.0 || (rel > opts.tol && rel >= prev * (1.0 - 1e-12))) break;
    }
    const bool ok = rel <= opts.tol && std::isfinite(rel);
    out.report = {it, rel, ok, ok ? "converged" : "GMRES did not reach the tolerance"};
    return out;
}

SolveResult krylov_nonsym_solve(const SparseMatrix& a, std::span<const double> b, const SolverOptions& opts,
                                std::span<const double> x0) {
    check_inputs(a, b);
    const auto n = a.n();
    const auto exec = opts.exec;
    SolveResult out;
    const double bnorm = norm2(b, exec);
    if (bnorm == 0.0) {
        out.x.assign(n, 0.0);
        out.report = {0, 0.0, true, "zero right-hand side"};
        return out;
    }
    const auto scale = jacobi_scaling(a);
    const auto budget = iteration_budget(a, opts);

    auto& x = out.x;
    x = initial_guess(n, x0);
    std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), phat(n), s(n), shat(n), t(n);
    double rel = true_residual(a, b, x, r, exec) / bnorm;
    rhat = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    std::size_t it = 0;
    std::string why = "iteration limit reached";
    bool broke_down = false;
    const double tiny = std::numeric_limits<double>::min() * 1e10;

    while (rel > opts.tol && it < budget) {
        const double rho_new = dot(rhat, r, exec);
        if (std::abs(rho_new) <= tiny * bnorm * bnorm) {
            why = "BiCGStab breakdown (rho = 0)";
            broke_down = true;
            break;
        }
        const double beta = (rho_new / rho) * (alpha / omega);
        kernels::for_each_index(exec, n, [&](std::size_t i) { p[i] = r[i] + beta * (p[i] - omega * v[i]); });
        kernels::for_each_index(exec, n, [&](std::size_t i) { phat[i] = scale[i] * p[i]; });
        a.multiply(phat, v, exec);
        const double rv = dot(rhat, v, exec);
        if (std::abs(rv) <= tiny) {
            why = "BiCGStab breakdown (<rhat, v> = 0)";
            broke_down = true;
            break;
        }
        alpha = rho_new / rv;
        kernels::for_each_index(exec, n, [&](std::size_t i) { s[i] = r[i] - alpha * v[i]; });
        ++it;
        if (norm2(s, exec) / bnorm <= opts.tol) {
            axpy(alpha, phat, x, exec);
            rel = true_residual(a, b, x, r, exec) / bnorm;
            if (rel <= opts.tol) break;
            rhat = r;
            rho = alpha = omega = 1.0;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            continue;
        }
        kernels::for_each_index(exec, n, [&](std::size_t i) { shat[i] = scale[i] * s[i]; });
        a.multiply(shat, t, exec);
        const double tt = dot(t, t, exec);
        if (tt <= tiny) {
            why = "BiCGStab breakdown (t = 0)";
            broke_down = true;
            break;
        }
        omega = dot(t, s, exec) / tt;
        kernels::for_each_index(exec, n, [&](std::size_t i) {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        });
        rel = norm2(r, exec) / bnorm;
        rho = rho_new;
        if (rel <= opts.tol) {
            rel = true_residual(a, b, x, r, exec) / bnorm;
            if (rel <= opts.tol) break;
            rhat = r;
            rho = alpha = omega = 1.0;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
        }
        if (omega == 0.0 || !std::isfinite(rel)) {
            why = "BiCGStab breakdown (omega = 0)";
            broke_down = true;
            break;
        }
    }

    rel = true_residual(a, b, x, r, exec) / bnorm;
    if (rel <= opts.tol) {
        out.report = {it, rel, true, "converged"};
        return out;
    }
    if (!std::isfinite(rel)) x.assign(n, 0.0);
    // Remaining budget goes to GMRES from the current iterate.
    SolverOptions rest = opts;
    rest.max_iter = budget > it ? budget - it : 1;
    auto g = gmres_solve(a, b, rest, x);
    g.report.iterations += it;
    if (!g.report.converged) {
        g.report.message = (broke_down ? why : std::string("BiCGStab stalled")) + "; " + g.report.message;
    }
    return g;
}

}  // namespace atg
