#include "atg/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace atg {

namespace {

constexpr double pi = std::numbers::pi;

ExactSolution sine_product() {
    return {
        [](Vec2 x) { return std::sin(pi * x.x) * std::sin(pi * x.y); },
        [](Vec2 x) {
            return Vec2{pi * std::cos(pi * x.x) * std::sin(pi * x.y),
                        pi * std::sin(pi * x.x) * std::cos(pi * x.y)};
        },
        [](Vec2 x) {
            const double ss = std::sin(pi * x.x) * std::sin(pi * x.y);
            const double cc = std::cos(pi * x.x) * std::cos(pi * x.y);
            return Mat2{-pi * pi * ss, pi * pi * cc, pi * pi * cc, -pi * pi * ss};
        },
    };
}

Mat2 zero_matrix() { return {}; }

template <typename Gen>
Vec2 random_interior_point(Gen& gen) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    return {dist(gen), dist(gen)};
}

void require_exact(const ExactSolution& e) {
    if (!e.u || !e.grad || !e.hessian) {
        throw std::invalid_argument("verify_manufactured: exact solution has no Hessian");
    }
}

}  // namespace

const ExactSolution& Problem::exact() const {
    if (general) return general->exact;
    if (mild) return mild->exact;
    if (linear) return linear->exact;
    throw std::logic_error("Problem '" + name + "' has no formulation");
}

const ScalarField& Problem::source() const {
    if (general) return general->source;
    if (mild) return mild->source;
    if (linear) return linear->source;
    throw std::logic_error("Problem '" + name + "' has no formulation");
}

MildProblem mild_view(const LinearProblem& p) {
    MildProblem m;
    m.alpha = [a = p.alpha](Vec2 x, double) { return a(x); };
    m.alpha_u = [](Vec2, double) { return zero_matrix(); };
    if (p.alpha_div) m.alpha_div_x = [d = p.alpha_div](Vec2 x, double) { return d(x); };
    m.beta = [b = p.beta](Vec2 x, double) { return b(x); };
    m.beta_u = [](Vec2, double) { return Vec2{}; };
    m.gamma = [g = p.gamma](Vec2 x, double u) { return g(x) * u; };
    m.gamma_u = [g = p.gamma](Vec2 x, double) { return g(x); };
    m.source = p.source;
    m.exact = p.exact;
    m.mildly_nonlinear = false;
    return m;
}

GeneralProblem general_view(const MildProblem& p) {
    GeneralProblem g;
    g.flux = [a = p.alpha](Vec2 x, double y, Vec2 z) { return a(x, y) * z; };
    g.g = [b = p.beta, c = p.gamma](Vec2 x, double y, Vec2 z) { return dot(b(x, y), z) + c(x, y); };
    g.a = [a = p.alpha](Vec2 x, double y, Vec2) { return a(x, y); };
    g.b = [au = p.alpha_u](Vec2 x, double y, Vec2 z) { return au(x, y) * z; };
    g.c = [b = p.beta](Vec2 x, double y, Vec2) { return b(x, y); };
    g.d = [bu = p.beta_u, cu = p.gamma_u](Vec2 x, double y, Vec2 z) { return dot(bu(x, y), z) + cu(x, y); };
    g.source = p.source;
    g.exact = p.exact;
    return g;
}

Problem make_test1() {
    const auto exact = sine_product();
    ScalarField source = [](Vec2 x) {
        const double ss = std::sin(pi * x.x) * std::sin(pi * x.y);
        return 2.0 * pi * pi * ss + std::pow(ss, 5);
    };

    MildProblem mild;
    mild.alpha = [](Vec2, double) { return Mat2::identity(); };
    mild.alpha_u = [](Vec2, double) { return zero_matrix(); };
    mild.beta = [](Vec2, double) { return Vec2{}; };
    mild.beta_u = [](Vec2, double) { return Vec2{}; };
    mild.gamma = [](Vec2, double u) { return std::pow(u, 5); };
    mild.gamma_u = [](Vec2, double u) { return 5.0 * std::pow(u, 4); };
    mild.source = source;
    mild.exact = exact;

    GeneralProblem general;
    general.flux = [](Vec2, double, Vec2 z) { return z; };
    general.g = [](Vec2, double y, Vec2) { return std::pow(y, 5); };
    general.a = [](Vec2, double, Vec2) { return Mat2::identity(); };
    general.b = [](Vec2, double, Vec2) { return Vec2{}; };
    general.c = [](Vec2, double, Vec2) { return Vec2{}; };
    general.d = [](Vec2, double y, Vec2) { return 5.0 * std::pow(y, 4); };
    general.source = source;
    general.exact = exact;

    return {"test1", std::nullopt, std::move(mild), std::move(general)};
}

Problem make_test2() {
    const auto exact = sine_product();
    ScalarField source = [](Vec2 x) {
        const double sx = std::sin(pi * x.x), sy = std::sin(pi * x.y);
        return 4.0 * pi * pi * sx * sy + pi * pi * sy * sy * std::cos(2.0 * pi * x.x) +
               pi * pi * sx * sx * std::cos(2.0 * pi * x.y);
    };

    MildProblem mild;
    mild.alpha = [](Vec2, double u) { return Mat2::scaled_identity(2.0 - u); };
    mild.alpha_u = [](Vec2, double) { return Mat2::scaled_identity(-1.0); };
    mild.beta = [](Vec2, double) { return Vec2{}; };
    mild.beta_u = [](Vec2, double) { return Vec2{}; };
    mild.gamma = [](Vec2, double) { return 0.0; };
    mild.gamma_u = [](Vec2, double) { return 0.0; };
    mild.source = source;
    mild.exact = exact;

    GeneralProblem general;
    general.flux = [](Vec2, double y, Vec2 z) { return (2.0 - y) * z; };
    general.g = [](Vec2, double, Vec2) { return 0.0; };
    general.a = [](Vec2, double y, Vec2) { return Mat2::scaled_identity(2.0 - y); };
    general.b = [](Vec2, double, Vec2 z) { return -1.0 * z; };
    general.c = [](Vec2, double, Vec2) { return Vec2{}; };
    general.d = [](Vec2, double, Vec2) { return 0.0; };
    general.source = source;
    general.exact = exact;

    return {"test2", std::nullopt, std::move(mild), std::move(general)};
}

Problem make_linear_nonspd() {
    LinearProblem lin;
    lin.alpha = [](Vec2) { return Mat2::identity(); };
    lin.beta = [](Vec2) { return Vec2{1.0, 1.0}; };
    lin.gamma = [](Vec2) { return 1.0; };
    lin.source = [](Vec2 x) {
        const double sx = std::sin(pi * x.x), sy = std::sin(pi * x.y);
        const double cx = std::cos(pi * x.x), cy = std::cos(pi * x.y);
        return 2.0 * pi * pi * sx * sy + pi * cx * sy + pi * sx * cy + sx * sy;
    };
    lin.exact = sine_product();
    auto mild = mild_view(lin);
    auto general = general_view(mild);
    return {"linear-nonspd", std::move(lin), std::move(mild), std::move(general)};
}

const std::vector<std::string>& problem_ids() {
    static const std::vector<std::string> ids{"test1", "test2", "linear-nonspd"};
    return ids;
}

Problem make_problem(const std::string& id) {
    if (id == "test1") return make_test1();
    if (id == "test2") return make_test2();
    if (id == "linear-nonspd") return make_linear_nonspd();
    std::string valid;
    for (const auto& p : problem_ids()) valid += (valid.empty() ? "" : ", ") + p;
    throw std::invalid_argument("unknown problem '" + id + "' (valid: " + valid + ")");
}

double verify_manufactured(const LinearProblem& p, int samples, std::uint64_t seed) {
    require_exact(p.exact);
    std::mt19937_64 gen(seed);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const Vec2 x = random_interior_point(gen);
        const Vec2 g = p.exact.grad(x);
        const Mat2 a = p.alpha(x);
        double div = contract(a, p.exact.hessian(x));
        if (p.alpha_div) div += dot(p.alpha_div(x), g);
        const double r = -div + dot(p.beta(x), g) + p.gamma(x) * p.exact.u(x) - p.source(x);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

double verify_manufactured(const MildProblem& p, int samples, std::uint64_t seed) {
    require_exact(p.exact);
    std::mt19937_64 gen(seed);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const Vec2 x = random_interior_point(gen);
        const double u = p.exact.u(x);
        const Vec2 g = p.exact.grad(x);
        double div = contract(p.alpha(x, u), p.exact.hessian(x)) + dot(g, p.alpha_u(x, u) * g);
        if (p.alpha_div_x) div += dot(p.alpha_div_x(x, u), g);
        const double r = -div + dot(p.beta(x, u), g) + p.gamma(x, u) - p.source(x);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

double verify_manufactured(const GeneralProblem& p, int samples, std::uint64_t seed) {
    require_exact(p.exact);
    std::mt19937_64 gen(seed);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const Vec2 x = random_interior_point(gen);
        const double u = p.exact.u(x);
        const Vec2 g = p.exact.grad(x);
        // div f(x, u, grad u) without explicit x-dependence of f.
        const double div = contract(p.a(x, u, g), p.exact.hessian(x)) + dot(p.b(x, u, g), g);
        const double r = -div + p.g(x, u, g) - p.source(x);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

}  // namespace atg
