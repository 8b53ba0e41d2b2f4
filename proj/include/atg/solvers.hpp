#pragma once

#include "atg/sparse.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace atg {

class PreconditionerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolveReport {
    std::size_t iterations = 0;
    double final_residual = 0.0;  // ||b - A x|| / ||b||
    bool converged = false;
    std::string message;
};

struct SolverOptions {
    double tol = 1e-10;
    std::size_t max_iter = 0;  // 0 selects 10 n
    Exec exec = Exec::Parallel;
};

struct SolveResult {
    std::vector<double> x;
    SolveReport report;
};

/// Jacobi-preconditioned conjugate gradients for symmetric positive definite A.
/// Throws std::invalid_argument for a visibly nonsymmetric matrix and
/// PreconditionerError for a zero diagonal entry.
SolveResult cg_solve(const SparseMatrix& a, std::span<const double> b, const SolverOptions& opts = {},
                     std::span<const double> x0 = {});

/// Jacobi-preconditioned BiCGStab, falling back to restarted GMRES on
/// breakdown or stagnation. Never throws on singular input; failure is
/// reported through `converged`.
SolveResult krylov_nonsym_solve(const SparseMatrix& a, std::span<const double> b,
                                const SolverOptions& opts = {}, std::span<const double> x0 = {});

/// Restarted GMRES(m) with Jacobi scaling.
SolveResult gmres_solve(const SparseMatrix& a, std::span<const double> b, const SolverOptions& opts = {},
                        std::span<const double> x0 = {}, std::size_t restart = 60);

}  // namespace atg
