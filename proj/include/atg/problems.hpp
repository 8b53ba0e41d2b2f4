#pragma once

#include "atg/fields.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace atg {

/// -div(alpha grad u) + beta . grad u + gamma u = source, u = 0 on the boundary.
struct LinearProblem {
    MatrixField alpha;
    VectorField alpha_div;  // (sum_i d_i alpha_ij)_j; empty when alpha is constant
    VectorField beta;
    ScalarField gamma;
    ScalarField source;
    ExactSolution exact;
};

/// -div(alpha(x,u) grad u) + beta(x,u) . grad u + gamma(x,u) = source.
struct MildProblem {
    MatrixOfU alpha;
    MatrixOfU alpha_u;
    VectorOfU alpha_div_x;  // x-divergence of alpha at frozen u; empty when zero
    VectorOfU beta;
    VectorOfU beta_u;
    ScalarOfU gamma;
    ScalarOfU gamma_u;
    ScalarField source;
    ExactSolution exact;
    bool mildly_nonlinear = true;
};

/// -div f(x,u,grad u) + g(x,u,grad u) = source with derivatives
/// a = D_z f, b = D_y f, c = D_z g, d = D_y g.
struct GeneralProblem {
    VectorOfYZ flux;
    ScalarOfYZ g;
    MatrixOfYZ a;
    VectorOfYZ b;
    VectorOfYZ c;
    ScalarOfYZ d;
    ScalarField source;
    ExactSolution exact;
};

/// A registered problem with every formulation it supports.
struct Problem {
    std::string name;
    std::optional<LinearProblem> linear;
    std::optional<MildProblem> mild;
    std::optional<GeneralProblem> general;

    const ExactSolution& exact() const;
    const ScalarField& source() const;
};

/// Linear coefficients read as a (trivially) mild problem: gamma(x,u) = gamma(x) u.
MildProblem mild_view(const LinearProblem& p);

/// f(x,y,z) = alpha(x,y) z, g = beta(x,y) . z + gamma(x,y).
GeneralProblem general_view(const MildProblem& p);

/// -Laplace u + u^5 = f on [-1,1]^2 with u = sin(pi x) sin(pi y).
Problem make_test1();
/// -div((2 - u) grad u) = f on [-1,1]^2 with u = sin(pi x) sin(pi y).
Problem make_test2();
/// -Laplace u + (1,1) . grad u + u = f on [-1,1]^2 with u = sin(pi x) sin(pi y).
Problem make_linear_nonspd();

const std::vector<std::string>& problem_ids();
/// Throws std::invalid_argument listing the valid ids on an unknown name.
Problem make_problem(const std::string& id);

/// Maximum strong-form residual of the exact solution at `samples` random
/// interior points. Throws std::invalid_argument without a Hessian.
double verify_manufactured(const LinearProblem& p, int samples = 100, std::uint64_t seed = 1);
double verify_manufactured(const MildProblem& p, int samples = 100, std::uint64_t seed = 1);
double verify_manufactured(const GeneralProblem& p, int samples = 100, std::uint64_t seed = 1);

}  // namespace atg
