#pragma once

#include "atg/assembly.hpp"
#include "atg/fespace.hpp"
#include "atg/problems.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace atg {

/// Squared indicators. Edge vectors are indexed by mesh edge id; boundary
/// edges carry 0.
struct EstimatorReport {
    std::vector<double> eta2_R;
    std::vector<double> eta2_J;
    std::vector<double> osc2_R;
    std::vector<double> osc2_J;
    double eta_global = 0.0;
    double osc_global = 0.0;

    double eta2() const { return eta_global * eta_global; }
};

/// Pointwise element residual and flux on one triangle of the mesh that the
/// callbacks were built for.
struct EstimatorKernels {
    std::function<double(Index t, const QuadPoint& q)> residual;
    std::function<Vec2(Index t, const QuadPoint& q)> flux;
};

struct EstimatorOptions {
    int element_order = kLoadQuadOrder;
    int edge_order = kLoadQuadOrder;
    Exec exec = Exec::Parallel;
};

/// eta_R^2 = H_K^2 ||R||_K^2, eta_J^2 = H_E ||[flux . n]||_E^2 with H_K = |K|^{1/2};
/// oscillations subtract the elementwise (edgewise) mean.
EstimatorReport estimate(const Mesh& mesh, const EstimatorKernels& kernels, const EstimatorOptions& opts = {});

/// R = -div(alpha grad u_h) + beta . grad u_c + gamma u_c - f, flux alpha grad u_h.
EstimatorKernels linear_kernels(const FeFunction& u_fine, const FeFunction& u_coarse, const LinearProblem& p);
/// R = -div(alpha(w) grad u_h) + beta(w) . grad u_h + gamma(w) - f, flux alpha(w) grad u_h.
EstimatorKernels mild_kernels(const FeFunction& u_fine, const FeFunction& w, const MildProblem& p);

EstimatorReport estimate_linear(const FeFunction& u_fine, const FeFunction& u_coarse_on_fine,
                                const LinearProblem& p, const EstimatorOptions& opts = {});
EstimatorReport estimate_mild(const FeFunction& u_fine, const FeFunction& u_coarse_on_fine, const MildProblem& p,
                              const EstimatorOptions& opts = {});

struct MarkedSet {
    std::vector<Index> elements;  // in marking order
    double theta = 0.0;
    double captured_fraction = 0.0;
};

/// eta_R^2 plus half of each adjacent edge's eta_J^2.
std::vector<double> element_indicators(const Mesh& mesh, const EstimatorReport& report);

/// Smallest prefix of the elements sorted by descending indicator (ties by
/// ascending id) capturing at least theta of the total. Empty when the total is 0.
MarkedSet dorfler_mark(std::span<const double> indicators, double theta);
MarkedSet dorfler_mark(const Mesh& mesh, const EstimatorReport& report, double theta);

/// Estimator of a fixed function before and after one bisection step.
struct ReductionAudit {
    double max_child_defect = 0.0;    // max |sum children eta_R^2 - parent eta_R^2 / 2| / (parent eta_R^2)
    double max_intra_edge_jump = 0.0; // max eta_J on fine edges inside a coarse triangle
    double eta2_coarse = 0.0;         // eta^2(T_k)
    double eta2_fine = 0.0;           // eta^2(T_{k+1}) of the prolongated functions
    double eta2_removed = 0.0;        // residuals of refined elements plus jumps of bisected edges
    std::size_t n_records = 0;
    std::size_t n_intra_edges = 0;

    static constexpr double rho = 0.29289321881345248;  // 1 - 1/sqrt(2)
    double aggregate_slack() const { return eta2_coarse - rho * eta2_removed - eta2_fine; }
};

/// Audit for u and frozen w on the coarse mesh against the bisection that
/// produced fine_space. All integrals use `order`; the parent/child residual
/// comparison applies it on 16 congruent subtriangles of each triangle.
ReductionAudit audit_reduction(const FeFunction& u, const FeFunction& w, const MildProblem& p,
                               std::span<const RefinementRecord> records,
                               std::shared_ptr<const FeSpace> fine_space, int order = 10,
                               Exec exec = Exec::Parallel);

}  // namespace atg
