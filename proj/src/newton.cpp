#include "atg/newton.hpp"

#include <algorithm>
#include <cmath>

namespace atg {

namespace {

// Inner tolerance that drives the linear residual well below the Newton target.
SolverOptions inner_options(const NewtonOptions& opts, double residual_l2) {
    SolverOptions lin = opts.linear;
    if (residual_l2 > 0.0) lin.tol = std::max(std::min(lin.tol, 0.1 * opts.tol / residual_l2), 1e-14);
    return lin;
}

std::vector<double> correction(const SparseMatrix& jac, std::span<const double> residual, const SolverOptions& lin,
                               SolveReport& report) {
    std::vector<double> rhs(residual.begin(), residual.end());
    for (auto& v : rhs) v = -v;
    auto solved = krylov_nonsym_solve(jac, rhs, lin);
    report = solved.report;
    return std::move(solved.x);
}

}  // namespace

NewtonStep newton_step(const FeFunction& w, const GeneralProblem& p, const NewtonOptions& opts) {
    const auto& space = w.space();
    const auto exec = opts.linear.exec;
    const auto r = nonlinear_residual(space, w, p, opts.quad_order, exec);
    const auto jac = assemble_linearized(space, w, p, opts.quad_order, exec);
    NewtonStep out{w, {}, kernels::norm_inf(r), 0.0};
    const auto delta = correction(jac, r, inner_options(opts, kernels::norm2(r, exec)), out.linear);
    kernels::axpy(1.0, delta, out.u.coefficients(), exec);
    out.residual_after = kernels::norm_inf(nonlinear_residual(space, out.u, p, opts.quad_order, exec));
    return out;
}

NewtonResult newton_solve(const GeneralProblem& p, const FeFunction& initial, const NewtonOptions& opts) {
    const auto& space = initial.space();
    const auto exec = opts.linear.exec;
    NewtonResult out{initial, {}, 0, {}};
    auto r = nonlinear_residual(space, out.u, p, opts.quad_order, exec);
    double res_inf = kernels::norm_inf(r);
    double res_l2 = kernels::norm2(r, exec);
    out.residual_history.push_back(res_inf);

    std::size_t it = 0;
    std::string message = "iteration limit reached";
    while (it < opts.max_iter) {
        if (res_inf <= opts.tol) {
            message = "converged";
            break;
        }
        const auto jac = assemble_linearized(space, out.u, p, opts.quad_order, exec);
        SolveReport lin;
        const auto delta = correction(jac, r, inner_options(opts, res_l2), lin);
        out.linear_iterations += lin.iterations;
        ++it;

        double step = 1.0;
        FeFunction trial = out.u;
        std::vector<double> r_trial;
        for (int h = 0;; ++h) {
            auto c = trial.coefficients();
            const auto base = out.u.coefficients();
            for (std::size_t i = 0; i < c.size(); ++i) c[i] = base[i] + step * delta[i];
            r_trial = nonlinear_residual(space, trial, p, opts.quad_order, exec);
            if (kernels::norm2(r_trial, exec) <= res_l2 || h >= opts.max_halvings) break;
            step *= 0.5;
        }
        out.u = std::move(trial);
        r = std::move(r_trial);
        res_inf = kernels::norm_inf(r);
        res_l2 = kernels::norm2(r, exec);
        out.residual_history.push_back(res_inf);
        if (!std::isfinite(res_inf)) {
            message = "residual is not finite";
            break;
        }
    }
    if (res_inf <= opts.tol && it <= opts.max_iter && opts.max_iter > 0) message = "converged";
    const bool ok = message == "converged";
    out.report = {it, res_inf, ok, message};
    return out;
}

}  // namespace atg
