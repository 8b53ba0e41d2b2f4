#pragma once

#include "atg/geometry.hpp"

#include <stdexcept>
#include <vector>

namespace atg {

/// Triangle rule in barycentric coordinates. Weights are positive and sum to 1;
/// multiply by |K| at use.
struct QuadratureRule {
    int order = 0;
    std::vector<Barycentric> points;
    std::vector<double> weights;
};

/// Gauss rule on the unit interval [0, 1]; weights sum to 1.
struct EdgeRule {
    int order = 0;
    std::vector<double> points;
    std::vector<double> weights;
};

/// Supported orders: 1, 2, 4, 6, 10. Rules are built once and cached.
const QuadratureRule& quad_rule(int order);

/// Any order >= 1; exact for polynomials of degree <= order on a segment.
const EdgeRule& quad_rule_edge(int order);

/// n-point Gauss-Legendre nodes and weights mapped to [0, 1].
EdgeRule gauss_legendre_unit(int n);

}  // namespace atg
