#pragma once

#include "atg/assembly.hpp"
#include "atg/solvers.hpp"

#include <memory>
#include <vector>

namespace atg {

struct NewtonOptions {
    double tol = 1e-10;           // on the max-norm of the nonlinear residual
    std::size_t max_iter = 50;
    int max_halvings = 10;
    int quad_order = kLoadQuadOrder;  // shared by residual and Jacobian
    SolverOptions linear{};
};

struct NewtonStep {
    FeFunction u;
    SolveReport linear;
    double residual_before = 0.0;  // max-norm
    double residual_after = 0.0;
};

struct NewtonResult {
    FeFunction u;
    SolveReport report;  // iterations = Newton steps, final_residual = max-norm
    std::size_t linear_iterations = 0;
    std::vector<double> residual_history;
};

/// One undamped step about w: solve J(w) (u - w) = -R(w).
NewtonStep newton_step(const FeFunction& w, const GeneralProblem& p, const NewtonOptions& opts = {});

/// Newton iteration with step halving whenever the residual grows.
NewtonResult newton_solve(const GeneralProblem& p, const FeFunction& initial, const NewtonOptions& opts = {});

}  // namespace atg
