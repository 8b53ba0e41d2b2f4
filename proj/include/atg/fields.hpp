#pragma once

#include "atg/geometry.hpp"

#include <functional>

namespace atg {

using ScalarField = std::function<double(Vec2)>;
using VectorField = std::function<Vec2(Vec2)>;
using MatrixField = std::function<Mat2(Vec2)>;

/// Coefficients depending on position and the solution value u.
using ScalarOfU = std::function<double(Vec2, double)>;
using VectorOfU = std::function<Vec2(Vec2, double)>;
using MatrixOfU = std::function<Mat2(Vec2, double)>;

/// Coefficients depending on position, solution value y and gradient z.
using ScalarOfYZ = std::function<double(Vec2, double, Vec2)>;
using VectorOfYZ = std::function<Vec2(Vec2, double, Vec2)>;
using MatrixOfYZ = std::function<Mat2(Vec2, double, Vec2)>;

/// Manufactured exact solution with its first and second derivatives.
struct ExactSolution {
    ScalarField u;
    VectorField grad;
    MatrixField hessian;
};

}  // namespace atg
