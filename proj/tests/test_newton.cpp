#include "atg/newton.hpp"

#include <doctest.h>

#include <cmath>

using namespace atg;

namespace {

std::shared_ptr<const FeSpace> uniform_space(int n) {
    return build_space(std::make_shared<const Mesh>(build_initial_uniform(n)));
}

}  // namespace

TEST_CASE("linear problem converges in one step") {
    const auto s = uniform_space(8);
    const auto p = make_linear_nonspd();
    const auto g = general_view(*p.mild);
    NewtonOptions o;
    o.tol = 1e-9;
    o.linear.tol = 1e-14;
    const auto r = newton_solve(g, FeFunction(s), o);
    CHECK(r.report.converged);
    CHECK(r.report.iterations == 1);
    CHECK(r.residual_history.size() == 2);
}

TEST_CASE("test1 from zero converges quadratically") {
    const auto s = uniform_space(8);
    const auto p = make_test1();
    const auto r = newton_solve(*p.general, FeFunction(s));
    CHECK(r.report.converged);
    CHECK(r.report.iterations <= 10);
    CHECK(r.report.final_residual <= 1e-10);
    CHECK(r.linear_iterations > 0);
    for (std::size_t i = 1; i < r.residual_history.size(); ++i) {
        CHECK(r.residual_history[i] < r.residual_history[i - 1]);
    }

    // Galerkin error is comparable to the interpolation error.
    const auto e = error_norms(r.u, p.exact());
    const auto ei = error_norms(interpolate(s, p.exact().u), p.exact());
    CHECK(e.h1_semi <= 1.2 * ei.h1_semi);
}

TEST_CASE("single step reduces the residual near the solution") {
    const auto s = uniform_space(8);
    const auto p = make_test2();
    const auto w = interpolate(s, p.exact().u);
    const auto st = newton_step(w, *p.general);
    CHECK(st.linear.converged);
    CHECK(st.residual_after < 0.1 * st.residual_before);
}

TEST_CASE("zero iterations returns the initial guess unconverged") {
    const auto s = uniform_space(4);
    const auto p = make_test1();
    NewtonOptions o;
    o.max_iter = 0;
    const auto r = newton_solve(*p.general, FeFunction(s), o);
    CHECK_FALSE(r.report.converged);
    CHECK(r.report.iterations == 0);
    for (double c : r.u.coefficients()) CHECK(c == 0.0);
}
