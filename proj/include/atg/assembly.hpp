#pragma once

#include "atg/fespace.hpp"
#include "atg/problems.hpp"
#include "atg/quadrature.hpp"
#include "atg/sparse.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace atg {

inline constexpr int kMatrixQuadOrder = 4;
inline constexpr int kLoadQuadOrder = 6;

/// Raised when a coefficient callback returns NaN or infinity.
class CoefficientError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct ElementGeometry {
    std::array<Vec2, 3> p;
    double area = 0.0;
    std::array<Vec2, 3> grad;  // gradients of the barycentric coordinates
};

ElementGeometry element_geometry(const Mesh& mesh, Index t);

struct QuadPoint {
    Vec2 x;
    Barycentric l;
};

/// Pointwise coefficients of (a grad v + b v, grad xi) + (c . grad v + d v, xi).
struct FormCoefficients {
    Mat2 a;
    Vec2 b;
    Vec2 c;
    double d = 0.0;
};

/// Pointwise integrand of (G, grad xi) + (s, xi).
struct LoadCoefficients {
    Vec2 flux;
    double s = 0.0;
};

using FormKernel = std::function<FormCoefficients(Index t, const QuadPoint& q)>;
using LoadKernel = std::function<LoadCoefficients(Index t, const QuadPoint& q)>;

using LocalMatrix = std::array<std::array<double, 3>, 3>;

/// Element matrix, row = test function, column = trial function.
LocalMatrix local_matrix(const ElementGeometry& g, Index t, const FormKernel& kernel, int order);

/// Element matrices are computed per element (in parallel if requested) and
/// added into the pattern serially in element order.
SparseMatrix assemble_form(const FeSpace& space, const FormKernel& kernel, int order = kMatrixQuadOrder,
                           Exec exec = Exec::Parallel);
std::vector<double> assemble_vector(const FeSpace& space, const LoadKernel& kernel, int order = kLoadQuadOrder,
                                    Exec exec = Exec::Parallel);

/// Restrictions of fn to every triangle.
std::vector<LocalP1> localize(const FeFunction& fn);

/// (alpha grad u, grad v)
SparseMatrix assemble_AS(const FeSpace& space, const MatrixField& alpha, int order = kMatrixQuadOrder,
                         Exec exec = Exec::Parallel);
/// (beta . grad u + gamma u, v)
SparseMatrix assemble_AN_matrix(const FeSpace& space, const VectorField& beta, const ScalarField& gamma,
                                int order = kMatrixQuadOrder, Exec exec = Exec::Parallel);
/// The full non-SPD form in a single pass.
SparseMatrix assemble_linear_full(const FeSpace& space, const LinearProblem& p, int order = kMatrixQuadOrder,
                                  Exec exec = Exec::Parallel);
/// (f, phi_i)
std::vector<double> assemble_load(const FeSpace& space, const ScalarField& source, int order = kLoadQuadOrder,
                                  Exec exec = Exec::Parallel);

/// Matrix of v, xi -> (a(w) grad v + b(w) v, grad xi) + (c(w) . grad v + d(w) v, xi).
SparseMatrix assemble_linearized(const FeSpace& space, const FeFunction& w, const GeneralProblem& p,
                                 int order = kMatrixQuadOrder, Exec exec = Exec::Parallel);

/// Entry i = (f(x,w,grad w), grad phi_i) + (g(x,w,grad w) - source, phi_i).
std::vector<double> nonlinear_residual(const FeSpace& space, const FeFunction& w, const GeneralProblem& p,
                                       int order = kLoadQuadOrder, Exec exec = Exec::Parallel);

struct AssembledSystem {
    SparseMatrix matrix;
    std::vector<double> rhs;
};

/// Coefficients frozen at w: matrix (alpha(w) grad u, grad xi) + (beta(w) . grad u, xi),
/// right-hand side (f - gamma(w), xi).
AssembledSystem assemble_frozen_mild(const FeSpace& space, const FeFunction& w, const MildProblem& p,
                                     int matrix_order = kMatrixQuadOrder, int load_order = kLoadQuadOrder,
                                     Exec exec = Exec::Parallel);

}  // namespace atg
