#pragma once

#include "atg/fields.hpp"
#include "atg/kernels.hpp"
#include "atg/mesh.hpp"

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace atg {

class HierarchyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gradients of the three barycentric coordinates of a triangle.
std::array<Vec2, 3> barycentric_gradients(const std::array<Vec2, 3>& p);

/// P1 Lagrange space with homogeneous Dirichlet conditions: one dof per
/// interior vertex, numbered in vertex order.
class FeSpace {
public:
    explicit FeSpace(std::shared_ptr<const Mesh> mesh);

    const Mesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    std::size_t n_dofs() const { return vertex_of_dof_.size(); }
    Index dof_of_vertex(Index v) const { return dof_of_vertex_[v]; }
    Index vertex_of_dof(Index d) const { return vertex_of_dof_[d]; }

private:
    std::shared_ptr<const Mesh> mesh_;
    std::vector<Index> dof_of_vertex_;
    std::vector<Index> vertex_of_dof_;
};

std::shared_ptr<const FeSpace> build_space(std::shared_ptr<const Mesh> mesh);

/// Restriction of a P1 function to one triangle.
struct LocalP1 {
    std::array<double, 3> values{};
    Vec2 gradient{};

    double at(const Barycentric& l) const { return l[0] * values[0] + l[1] * values[1] + l[2] * values[2]; }
};

struct PointValue {
    double value = 0.0;
    Vec2 gradient{};
};

class FeFunction {
public:
    explicit FeFunction(std::shared_ptr<const FeSpace> space);
    FeFunction(std::shared_ptr<const FeSpace> space, std::vector<double> coefficients);

    const FeSpace& space() const { return *space_; }
    const std::shared_ptr<const FeSpace>& space_ptr() const { return space_; }
    std::span<const double> coefficients() const { return coeffs_; }
    std::span<double> coefficients() { return coeffs_; }

    /// Value at a mesh vertex (0 on the boundary).
    double vertex_value(Index v) const;
    LocalP1 local(Index t) const;
    PointValue evaluate(Index t, const Barycentric& l) const;

private:
    std::shared_ptr<const FeSpace> space_;
    std::vector<double> coeffs_;
};

/// Nodal interpolant of g (boundary values are dropped).
FeFunction interpolate(std::shared_ptr<const FeSpace> space, const ScalarField& g);

/// Embeds a coarse function into the space on a mesh obtained by bisect_marked.
FeFunction prolongate(const FeFunction& coarse, std::span<const RefinementRecord> records,
                      std::shared_ptr<const FeSpace> fine_space);

struct NormReport {
    double l2 = 0.0;
    double h1_semi = 0.0;
    double energy1 = 0.0;  // sqrt((alpha(x) grad v, grad v))
    double energy2 = 0.0;  // sqrt((alpha(x, u) grad v, grad v)) along a reference u
};

/// Weights for the two energy norms. Empty callbacks mean the identity.
struct EnergyWeights {
    MatrixField alpha;
    MatrixOfU alpha_of_u;
    ScalarField reference;  // u in alpha(x, u); error mode defaults to the exact solution
};

NormReport norms(const FeFunction& v, const EnergyWeights& weights = {}, int quad_order = 6,
                 Exec exec = Exec::Parallel);

/// Norms of u - v for an exact solution u.
NormReport error_norms(const FeFunction& v, const ExactSolution& exact, const EnergyWeights& weights = {},
                       int quad_order = 6, Exec exec = Exec::Parallel);

/// L2 norm of v - w for functions on the same space.
double l2_distance(const FeFunction& v, const FeFunction& w, int quad_order = 2);

std::string write_function(const FeFunction& fn);
std::vector<double> read_function(std::string_view text);

}  // namespace atg
