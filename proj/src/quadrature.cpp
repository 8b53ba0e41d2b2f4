#include "atg/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace atg {

EdgeRule gauss_legendre_unit(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre_unit: n must be >= 1");
    EdgeRule rule;
    rule.order = 2 * n - 1;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton on P_n starting from the Chebyshev-like guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        rule.points[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/(..) halved for [0,1]
    }
    return rule;
}

namespace {

QuadratureRule collapsed_gauss(int order) {
    // Duffy map x = s, y = (1 - s) t; the Jacobian adds one degree in s.
    const int n = (order + 3) / 2;
    const auto gl = gauss_legendre_unit(n);
    QuadratureRule rule;
    rule.order = order;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double s = gl.points[i];
            const double t = gl.points[j];
            const double x = s;
            const double y = (1.0 - s) * t;
            rule.points.push_back({1.0 - x - y, x, y});
            rule.weights.push_back(2.0 * (1.0 - s) * gl.weights[i] * gl.weights[j]);
        }
    }
    return rule;
}

QuadratureRule build_rule(int order) {
    switch (order) {
        case 1:
            return {1, {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}}, {1.0}};
        case 2:
            return {2,
                    {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
                     {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
                     {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}},
                    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
        case 4:
        case 6:
        case 10:
            return collapsed_gauss(order);
        default:
            throw std::invalid_argument("quad_rule: unsupported order " + std::to_string(order) +
                                        " (supported: 1, 2, 4, 6, 10)");
    }
}

}  // namespace

const QuadratureRule& quad_rule(int order) {
    static std::mutex mu;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
    return it->second;
}

const EdgeRule& quad_rule_edge(int order) {
    if (order < 1) throw std::invalid_argument("quad_rule_edge: order must be >= 1");
    static std::mutex mu;
    static std::map<int, EdgeRule> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) {
        auto rule = gauss_legendre_unit((order + 2) / 2);
        rule.order = order;
        it = cache.emplace(order, std::move(rule)).first;
    }
    return it->second;
}

}  // namespace atg
