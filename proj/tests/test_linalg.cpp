#include "atg/solvers.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace atg;

namespace {

SparseMatrix dense(const std::vector<std::vector<double>>& rows) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            if (rows[i][j] != 0.0) t.push_back({Index(i), Index(j), rows[i][j]});
        }
    }
    return SparseMatrix::from_triplets(rows.size(), t);
}

double residual(const SparseMatrix& a, const std::vector<double>& x, const std::vector<double>& b) {
    const auto ax = a * x;
    double r = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        r += (ax[i] - b[i]) * (ax[i] - b[i]);
        nb += b[i] * b[i];
    }
    return std::sqrt(r / nb);
}

// Random SPD matrix M^T M + n I with a sparse M.
SparseMatrix random_spd(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0)), a(n, std::vector<double>(n, 0.0));
    for (auto& row : m) {
        for (auto& v : row) v = (rng() % 3 == 0) ? u(rng) : 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) a[i][j] += m[k][i] * m[k][j];
        }
        a[i][i] += static_cast<double>(n) * 0.1;
    }
    return dense(a);
}

}  // namespace

TEST_CASE("sparse matrix basics") {
    const auto a = SparseMatrix::from_triplets(3, {{0, 0, 1.0}, {0, 2, 2.0}, {0, 0, 3.0}, {2, 1, -1.0}});
    CHECK(a.coeff(0, 0) == 4.0);
    CHECK(a.coeff(0, 2) == 2.0);
    CHECK(a.coeff(1, 1) == 0.0);
    CHECK(a.nnz() == 3);
    for (std::size_t i = 0; i < a.n(); ++i) {
        for (std::size_t k = a.row_ptr()[i] + 1; k < a.row_ptr()[i + 1]; ++k) CHECK(a.cols()[k - 1] < a.cols()[k]);
    }
    const std::vector<double> x{1.0, 2.0, 3.0};
    const auto y = a * x;
    CHECK(y[0] == 10.0);
    CHECK(y[1] == 0.0);
    CHECK(y[2] == -2.0);
    CHECK(a.max_asymmetry() == 2.0);
    const auto d = a.diagonal();
    CHECK(d[0] == 4.0);
    CHECK(d[2] == 0.0);
    const auto s = a + SparseMatrix::identity(3);
    CHECK(s.coeff(1, 1) == 1.0);
    CHECK(s.coeff(0, 0) == 5.0);
    CHECK((s - a).coeff(0, 2) == 0.0);
    auto copy = a;
    CHECK_THROWS_AS(copy.at(1, 2), std::out_of_range);
    CHECK_THROWS_AS(SparseMatrix::from_triplets(2, {{2, 0, 1.0}}), std::invalid_argument);
}

TEST_CASE("cg: identity, 2x2 hand solve, zero rhs") {
    const std::vector<double> b{1.5, -2.0, 0.25};
    const auto id = cg_solve(SparseMatrix::identity(3), b);
    CHECK(id.report.converged);
    CHECK(id.report.iterations <= 1);
    for (int i = 0; i < 3; ++i) CHECK(id.x[i] == doctest::Approx(b[i]));

    const auto a = dense({{4, 1}, {1, 3}});
    const auto r = cg_solve(a, std::vector<double>{1, 2});
    CHECK(r.report.converged);
    CHECK(std::abs(r.x[0] - 1.0 / 11.0) <= 1e-10);
    CHECK(std::abs(r.x[1] - 7.0 / 11.0) <= 1e-10);

    const auto z = cg_solve(a, std::vector<double>{0, 0});
    CHECK(z.report.iterations == 0);
    CHECK(z.x[0] == 0.0);
    CHECK(z.x[1] == 0.0);
}

TEST_CASE("cg: errors and iteration limit") {
    CHECK_THROWS_AS(cg_solve(dense({{2, 1}, {0, 2}}), std::vector<double>{1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(cg_solve(dense({{0, 1}, {1, 2}}), std::vector<double>{1, 1}), PreconditionerError);
    const auto a = random_spd(30, 2);
    std::vector<double> b(30, 1.0);
    SolverOptions o;
    o.max_iter = 2;
    const auto r = cg_solve(a, b, o);
    CHECK_FALSE(r.report.converged);
    CHECK(r.report.iterations == 2);
    const auto full = cg_solve(a, b);
    CHECK(full.report.converged);
    CHECK(full.report.final_residual <= 1e-10);
    CHECK(residual(a, full.x, b) <= 1e-10);
}

TEST_CASE("cg error decreases monotonically in the A-norm") {
    const auto a = random_spd(10, 9);
    std::vector<double> xs(10);
    for (std::size_t i = 0; i < 10; ++i) xs[i] = std::sin(1.0 + static_cast<double>(i));
    const auto b = a * xs;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= 10; ++k) {
        SolverOptions o;
        o.max_iter = k;
        o.tol = 1e-300;
        const auto r = cg_solve(a, b, o);
        std::vector<double> e(10);
        for (std::size_t i = 0; i < 10; ++i) e[i] = r.x[i] - xs[i];
        const auto ae = a * e;
        double en = 0.0;
        for (std::size_t i = 0; i < 10; ++i) en += e[i] * ae[i];
        CHECK(en <= prev * (1.0 + 1e-12));
        prev = en;
    }
}

TEST_CASE("nonsymmetric solvers") {
    const auto a = dense({{2, 1}, {0, 2}});
    const auto r = krylov_nonsym_solve(a, std::vector<double>{3, 2});
    CHECK(r.report.converged);
    CHECK(std::abs(r.x[0] - 1.0) <= 1e-10);
    CHECK(std::abs(r.x[1] - 1.0) <= 1e-10);
    const auto g = gmres_solve(a, std::vector<double>{3, 2});
    CHECK(g.report.converged);
    CHECK(std::abs(g.x[0] - 1.0) <= 1e-10);

    const auto spd = random_spd(25, 4);
    std::vector<double> b(25);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::cos(static_cast<double>(i));
    const auto x1 = cg_solve(spd, b, {1e-13});
    const auto x2 = krylov_nonsym_solve(spd, b, {1e-13});
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(std::abs(x1.x[i] - x2.x[i]) <= 1e-9);

    const auto singular = dense({{1, 0}, {0, 0}});
    const auto s = krylov_nonsym_solve(singular, std::vector<double>{1, 1});
    CHECK_FALSE(s.report.converged);
    CHECK_FALSE(s.report.message.empty());
    for (double v : s.x) CHECK(std::isfinite(v));
}
