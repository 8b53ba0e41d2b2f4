#pragma once

#include "atg/adaptivity.hpp"
#include "atg/newton.hpp"
#include "atg/problems.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace atg {

enum class Algorithm { AtgLinear, AtgMild, AtgMildNewton, AtgNewton1, AtgNewton2, RegularAdaptive, TwoGridUniform };

const std::vector<std::string>& algorithm_ids();
std::string to_string(Algorithm a);
/// Throws std::invalid_argument listing the valid ids.
Algorithm parse_algorithm(const std::string& id);

struct RunConfig {
    std::string problem = "test1";
    Algorithm algorithm = Algorithm::AtgMild;
    double theta = 0.25;
    int initial_n = 8;
    int max_levels = 12;  // for two-grid-uniform: number of mesh halvings
    std::size_t max_dofs = 300000;
    double zeta_tilde = 0.5;
    double tol = 1e-10;
    std::size_t newton_max_iter = 50;
    int matrix_order = kMatrixQuadOrder;
    int load_order = kLoadQuadOrder;
    std::uint64_t seed = 1;  // reserved; every driver is deterministic
    bool record_timing = false;
    Exec exec = Exec::Parallel;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

struct LevelRecord {
    int k = 0;
    std::size_t n_dofs = 0;
    std::size_t n_triangles = 0;
    double h1_semi_err = 0.0;
    double l2_err = 0.0;
    double energy_err = 0.0;
    double eta = 0.0;
    double osc = 0.0;
    double hot1 = 0.0;
    double hot2 = 0.0;
    double hot3 = 0.0;
    double e1 = 0.0;
    double e2 = 0.0;
    std::size_t solver_iters = 0;  // Krylov iterations on this level
    std::size_t newton_iters = 0;  // Newton steps on this level
    double wall_ms = 0.0;
    double marked_fraction = 0.0;  // captured fraction of the marking that left this level
    std::vector<double> newton_residuals;  // max-norm residual after each correction step
    double correction_size = 0.0;          // max |u - u_intermediate| for the corrected drivers

    double hot() const { return hot1 + hot2 + hot3; }
};

struct ConvergenceHistory {
    RunConfig config;
    std::vector<LevelRecord> levels;
    bool completed = true;
    std::string failure;
};

/// State handed to observers after each level solve.
struct LevelState {
    int k;
    const FeFunction& u;
    const FeFunction& frozen;                 // coefficient function of the estimator
    const FeFunction& previous;               // prolongated previous-level solution
    const FeFunction* intermediate = nullptr; // first-stage solution of corrected drivers
    const EstimatorReport& estimate;
};

/// State handed to observers after each bisection.
struct RefinementStep {
    int k;
    const FeFunction& u;
    const FeFunction& frozen;
    std::span<const RefinementRecord> records;
    std::shared_ptr<const FeSpace> fine_space;
};

struct RunHooks {
    std::function<void(const LevelState&)> on_level;
    std::function<void(const RefinementStep&)> on_refine;
};

ConvergenceHistory run(const Problem& p, const RunConfig& cfg, const RunHooks& hooks = {});

ConvergenceHistory run_atg_linear(const Problem& p, RunConfig cfg, const RunHooks& hooks = {});
ConvergenceHistory run_atg_mild(const Problem& p, RunConfig cfg, const RunHooks& hooks = {});
ConvergenceHistory run_atg_mild_newton(const Problem& p, RunConfig cfg, const RunHooks& hooks = {});
ConvergenceHistory run_atg_newton1(const Problem& p, RunConfig cfg, const RunHooks& hooks = {});
ConvergenceHistory run_atg_newton2(const Problem& p, RunConfig cfg, const RunHooks& hooks = {});
ConvergenceHistory run_regular_adaptive(const Problem& p, RunConfig cfg, const RunHooks& hooks = {});
ConvergenceHistory run_two_grid_uniform(const Problem& p, RunConfig cfg, const RunHooks& hooks = {});

struct HotTerms {
    double hot1 = 0.0;
    double hot2 = 0.0;
    double hot3 = 0.0;

    double sum() const { return hot1 + hot2 + hot3; }
};

/// Weighted sums of squared L2 errors after step k (errors indexed by level):
/// hot1 = sum_{i=0..k} z^i e_{k+1-i}^2, hot2 = sum_{i=0..k} z^i e_{k-i}^2,
/// hot3 = sum_{i=0..k-1} z^i e_{k-1-i}^2.
HotTerms compute_hot(std::span<const double> l2_errors, std::size_t k, double zeta_tilde);

/// Level j >= 1 receives compute_hot(errors, j - 1): the sums in the bound for
/// u_j. Level 0 gets zeros.
void fill_hot(ConvergenceHistory& history, double zeta_tilde);

struct EfficiencyTerms {
    double e1 = 0.0;
    double e2 = 0.0;
};

/// sigma* = -alpha : D^2 u - div(alpha) . grad u + beta . grad u + gamma u.
ScalarField sigma_star(const LinearProblem& p);
/// Same strong operator for coefficients depending on u.
ScalarField sigma_star(const MildProblem& p);

/// e1 = |u - u_h|_1 + (sum H_K^2 ||D^2 u||_K^2)^{1/2};
/// e2 = ||u - u_c|| + (sum H_K^2 ||sigma - mean_K sigma||_K^2)^{1/2}, plus
/// (sum H_K^2 ||grad(u - u_c)||_K^2)^{1/2} when `nonlinear`.
EfficiencyTerms efficiency_terms(const FeFunction& u_fine, const FeFunction& u_coarse_on_fine,
                                 const ExactSolution& exact, const ScalarField& sigma, bool nonlinear,
                                 int order = kLoadQuadOrder, Exec exec = Exec::Parallel);

/// Least-squares slope of log(h1_semi_err) against log(n_dofs) over the last
/// `window` levels. Throws std::invalid_argument if window < 2 or exceeds the history.
double convergence_slope(const ConvergenceHistory& h, std::size_t window);
double convergence_slope(std::span<const double> dofs, std::span<const double> values);

/// Slope of eta over the same window.
double estimator_slope(const ConvergenceHistory& h, std::size_t window);

}  // namespace atg
