// Acceptance suite: one PASS/FAIL line per criterion, details on the lines
// below it. Exit status is nonzero when any criterion fails.

#include "atg/algorithms.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace atg;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", what));
    }
    void info(const std::string& what) { notes.push_back("info " + what); }
};

struct Timed {
    ConvergenceHistory h;
    double seconds = 0.0;
};

Timed timed_run(const std::string& problem, Algorithm a, double theta, int levels, int initial_n = 8,
                std::size_t max_dofs = 300000, const RunHooks& hooks = {}) {
    RunConfig c;
    c.problem = problem;
    c.algorithm = a;
    c.theta = theta;
    c.max_levels = levels;
    c.initial_n = initial_n;
    c.max_dofs = max_dofs;
    const auto t0 = Clock::now();
    Timed t{run(make_problem(problem), c, hooks), 0.0};
    t.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return t;
}

double slope_over(const ConvergenceHistory& h, std::size_t first, std::size_t last, double LevelRecord::*field) {
    std::vector<double> d, v;
    for (std::size_t k = first; k <= last && k < h.levels.size(); ++k) {
        d.push_back(static_cast<double>(h.levels[k].n_dofs));
        v.push_back(h.levels[k].*field);
    }
    return convergence_slope(d, v);
}

bool in_band(double s) { return s >= -0.65 && s <= -0.35; }

void rate_check(Outcome& out, const std::string& problem, Algorithm a) {
    const auto t = timed_run(problem, a, 0.25, 12);
    const auto name = fmt::format("{} {}", problem, to_string(a));
    out.require(t.h.completed && t.h.levels.size() == 13, fmt::format("{}: 13 levels completed", name));
    if (t.h.levels.size() < 7) return;
    const double s = convergence_slope(t.h, 6);
    const double se = estimator_slope(t.h, 6);
    out.require(in_band(s), fmt::format("{}: H1 slope over last 6 levels {:.3f} in [-0.65, -0.35]", name, s));
    out.require(in_band(se), fmt::format("{}: estimator slope over last 6 levels {:.3f} in [-0.65, -0.35]", name, se));
    out.require(t.seconds <= 60.0, fmt::format("{}: runtime {:.1f} s <= 60 s", name, t.seconds));
    out.info(fmt::format("{}: H1 slope over levels 3-12 {:.3f}, final n_dofs {}", name,
                         slope_over(t.h, 3, 12, &LevelRecord::h1_semi_err), t.h.levels.back().n_dofs));
    // Longer run: the last-6-level window moves through the refinement waves.
    const auto long_run = timed_run(problem, a, 0.25, 36, 8, 2000000);
    const auto n = long_run.h.levels.size();
    if (n >= 20) {
        out.info(fmt::format("{}: H1 slope over levels 13-{} {:.3f} ({} levels, final n_dofs {})", name, n - 1,
                             slope_over(long_run.h, 13, n - 1, &LevelRecord::h1_semi_err), n,
                             long_run.h.levels.back().n_dofs));
    }
}

Outcome criterion1() {
    Outcome out;
    rate_check(out, "test1", Algorithm::AtgMild);
    rate_check(out, "test1", Algorithm::RegularAdaptive);
    return out;
}

Outcome criterion2() {
    Outcome out;
    rate_check(out, "test2", Algorithm::AtgMild);
    rate_check(out, "test2", Algorithm::AtgNewton1);
    return out;
}

Outcome criterion3() {
    Outcome out;
    const auto t = timed_run("test1", Algorithm::AtgMild, 0.15, 10);
    out.require(t.h.completed, "test1 atg-mild theta=0.15 run completed");
    const double s = slope_over(t.h, 0, 10, &LevelRecord::h1_semi_err);
    out.info(fmt::format("H1 slope over the first 10 levels at theta=0.15: {:.3f} ({} the optimal band)", s,
                         in_band(s) ? "inside" : "outside"));
    return out;
}

void hot_check(Outcome& out, const std::string& problem, Algorithm a, double theta) {
    const auto name = fmt::format("{} {} theta={}", problem, to_string(a), theta);
    const auto t = timed_run(problem, a, theta, 11, 32, 2000000);
    out.require(t.h.completed && t.h.levels.size() == 12, fmt::format("{} (initial n=32): 12 levels", name));
    if (t.h.levels.size() < 12) return;
    std::vector<double> e;
    for (const auto& l : t.h.levels) e.push_back(l.l2_err);
    std::vector<double> hot(11, 0.0);
    for (std::size_t k = 1; k <= 10; ++k) hot[k] = compute_hot(e, k, 0.5).sum();
    bool monotone = true, small = true;
    double worst_ratio = 0.0;
    for (std::size_t k = 4; k <= 10; ++k) monotone = monotone && hot[k] <= hot[k - 1];
    for (std::size_t k = 1; k <= 10; ++k) {
        const double r = hot[k] / t.h.levels[k].h1_semi_err;
        worst_ratio = std::max(worst_ratio, r);
        small = small && r <= 0.05;
    }
    out.require(monotone, fmt::format("{}: hot(k) non-increasing for k >= 3", name));
    out.require(hot[10] <= hot[1] / 3.0,
                fmt::format("{}: hot(10) / hot(1) = {:.3f} <= 1/3", name, hot[10] / hot[1]));
    out.require(small, fmt::format("{}: max hot(k) / h1_err(k) = {:.4f} <= 0.05", name, worst_ratio));
    out.info(fmt::format("{}: hot(1) = {:.3e}, hot(10) = {:.3e}, h1_err(1) = {:.3e}", name, hot[1], hot[10],
                         t.h.levels[1].h1_semi_err));

    const auto coarse = timed_run(problem, a, theta, 11, 8);
    if (coarse.h.levels.size() == 12) {
        std::vector<double> ec;
        for (const auto& l : coarse.h.levels) ec.push_back(l.l2_err);
        double r = 0.0;
        for (std::size_t k = 1; k <= 10; ++k) r = std::max(r, compute_hot(ec, k, 0.5).sum() / coarse.h.levels[k].h1_semi_err);
        out.info(fmt::format("{} with initial n=8: hot(10) / hot(1) = {:.3f}, max hot(k) / h1_err(k) = {:.4f}", name,
                             compute_hot(ec, 10, 0.5).sum() / compute_hot(ec, 1, 0.5).sum(), r));
    }
}

Outcome criterion4() {
    Outcome out;
    hot_check(out, "test1", Algorithm::AtgMild, 0.15);
    hot_check(out, "test2", Algorithm::AtgMild, 0.25);
    hot_check(out, "test2", Algorithm::AtgNewton1, 0.25);
    return out;
}

Outcome criterion5() {
    Outcome out;
    const auto t = timed_run("test1", Algorithm::AtgMild, 0.15, 20, 8, 100000000);
    out.require(t.h.completed && t.h.levels.size() == 21, "test1 atg-mild theta=0.15: 20 refinements completed");
    const auto n = t.h.levels.back().n_dofs;
    out.require(n < 300000, fmt::format("final n_dofs {} < 300000", n));
    out.require(t.seconds <= 300.0, fmt::format("runtime {:.1f} s <= 300 s", t.seconds));
    const double h1 = t.h.levels.back().h1_semi_err;
    // Uniform meshes need h1 ~ C h; fit C on the level-0 uniform mesh.
    const double c = t.h.levels.front().h1_semi_err * std::sqrt(static_cast<double>(t.h.levels.front().n_dofs));
    out.info(fmt::format("final H1 error {:.3e}; a uniform mesh at the level-0 constant would need about {:.2e} dofs",
                         h1, (c / h1) * (c / h1)));
    return out;
}

Outcome criterion6() {
    Outcome out;
    const auto t = timed_run("test1", Algorithm::AtgMild, 0.25, 12);
    out.require(t.h.completed && t.h.levels.size() == 13, "test1 atg-mild theta=0.25: 13 levels");
    if (t.h.levels.size() < 13) return out;
    const auto eff = [&](std::size_t k) { return t.h.levels[k].eta / t.h.levels[k].h1_semi_err; };
    double lo = 1e300, hi = 0.0;
    for (std::size_t k = 4; k <= 12; ++k) {
        lo = std::min(lo, eff(k) / eff(4));
        hi = std::max(hi, eff(k) / eff(4));
    }
    out.require(lo >= 1.0 / 3.0 && hi <= 3.0,
                fmt::format("eta / h1_err relative to level 4 within [{:.3f}, {:.3f}] (allowed [1/3, 3])", lo, hi));
    out.info(fmt::format("eta / h1_err at level 4: {:.3f}", eff(4)));
    return out;
}

Outcome criterion7() {
    Outcome out;
    const auto p = make_test1();
    double defect = 0.0, jump = 0.0, slack = 1e300;
    std::size_t steps = 0, intra = 0;
    RunHooks hooks;
    hooks.on_refine = [&](const RefinementStep& s) {
        const auto a = audit_reduction(s.u, s.frozen, *p.mild, s.records, s.fine_space);
        defect = std::max(defect, a.max_child_defect);
        jump = std::max(jump, a.max_intra_edge_jump);
        slack = std::min(slack, a.aggregate_slack() / a.eta2_coarse);
        intra += a.n_intra_edges;
        ++steps;
    };
    const auto t = timed_run("test1", Algorithm::AtgMild, 0.25, 12, 8, 300000, hooks);
    out.require(t.h.completed && steps == 12, fmt::format("{} refinement steps audited", steps));
    out.require(defect <= 1e-8, fmt::format("max relative child residual defect {:.2e} <= 1e-8", defect));
    out.require(intra > 0 && jump <= 1e-13, fmt::format("max jump on {} intra-element edges {:.2e} <= 1e-13", intra, jump));
    out.require(slack >= -1e-12,
                fmt::format("min (eta2(T_k) - rho eta2(removed) - eta2(T_k+1)) / eta2(T_k) = {:.3e} >= 0", slack));
    return out;
}

Outcome criterion8() {
    Outcome out;
    // P1 blocks on the unit right triangle.
    const Mesh unit({{0, 0, true}, {1, 0, true}, {0, 1, true}}, {Triangle{{0, 1, 2}, 0}});
    const auto g = element_geometry(unit, 0);
    const auto k = local_matrix(g, 0, [](Index, const QuadPoint&) { return FormCoefficients{Mat2::identity(), {}, {}, 0.0}; }, 4);
    const auto m = local_matrix(g, 0, [](Index, const QuadPoint&) { return FormCoefficients{{}, {}, {}, 1.0}; }, 4);
    const double ks[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    double dk = 0.0, dm = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            dk = std::max(dk, std::abs(k[i][j] - ks[i][j]));
            dm = std::max(dm, std::abs(m[i][j] - (i == j ? 2.0 : 1.0) / 24.0));
        }
    }
    out.require(dk <= 1e-13 && dm <= 1e-13, fmt::format("stiffness/mass blocks: errors {:.1e}, {:.1e}", dk, dm));

    const auto a = SparseMatrix::from_triplets(2, {{0, 0, 4.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0}});
    const auto x = cg_solve(a, std::vector<double>{1.0, 2.0}).x;
    const double dc = std::max(std::abs(x[0] - 1.0 / 11.0), std::abs(x[1] - 7.0 / 11.0));
    out.require(dc <= 1e-10, fmt::format("CG on [[4,1],[1,3]]: error {:.1e}", dc));

    std::mt19937_64 rng(99);
    bool dorfler_ok = true;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng() % 12;
        std::vector<double> ind(n);
        for (auto& v : ind) v = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const double theta = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        const auto mk = dorfler_mark(ind, theta);
        double total = 0.0, captured = 0.0;
        for (double v : ind) total += v;
        for (Index t : mk.elements) captured += ind[t];
        std::size_t best = n;
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            double c = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask & (1u << i)) c += ind[i];
            }
            if (c >= theta * total) best = std::min<std::size_t>(best, std::popcount(mask));
        }
        dorfler_ok = dorfler_ok && mk.elements.size() == best && captured >= theta * total;
    }
    out.require(dorfler_ok, "Dorfler marking is minimal against subset brute force (300 cases, <= 12 elements)");

    const auto space = build_space(std::make_shared<const Mesh>(build_initial_uniform(6)));
    double fd_worst = 0.0;
    for (const auto& prob : {make_test1(), make_test2()}) {
        std::vector<double> c(space->n_dofs());
        for (auto& v : c) v = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
        const FeFunction w(space, c);
        const auto jac = assemble_linearized(*space, w, *prob.general, kLoadQuadOrder);
        const auto r0 = nonlinear_residual(*space, w, *prob.general);
        for (Index j = 0; j < space->n_dofs(); j += 2) {
            auto cj = c;
            cj[j] += 1e-6;
            const auto r1 = nonlinear_residual(*space, FeFunction(space, cj), *prob.general);
            double col = 0.0, diff = 0.0;
            for (Index i = 0; i < space->n_dofs(); ++i) {
                col = std::max(col, std::abs(jac.coeff(i, j)));
                diff = std::max(diff, std::abs((r1[i] - r0[i]) / 1e-6 - jac.coeff(i, j)));
            }
            fd_worst = std::max(fd_worst, diff / col);
        }
    }
    out.require(fd_worst <= 1e-5, fmt::format("Jacobian vs finite differences: relative error {:.1e}", fd_worst));

    double mres = 0.0;
    for (const auto& id : problem_ids()) {
        const auto prob = make_problem(id);
        if (prob.linear) mres = std::max(mres, verify_manufactured(*prob.linear));
        if (prob.mild) mres = std::max(mres, verify_manufactured(*prob.mild));
        if (prob.general) mres = std::max(mres, verify_manufactured(*prob.general));
    }
    out.require(mres <= 1e-10, fmt::format("manufactured strong-form residuals: max {:.1e}", mres));

    const auto coarse = std::make_shared<const Mesh>(build_initial_uniform(4));
    const auto cs = build_space(coarse);
    std::vector<double> cc(cs->n_dofs());
    for (auto& v : cc) v = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    const FeFunction u(cs, cc);
    std::vector<Index> marked{1, 6, 11, 20, 27};
    const auto bis = bisect_marked(*coarse, marked);
    const auto fs = build_space(std::make_shared<const Mesh>(bis.mesh));
    const auto uf = prolongate(u, bis.records, fs);
    bool exact = true;
    for (const auto& rec : bis.records) {
        const double expect = 0.5 * (uf.vertex_value(rec.source_endpoints[0]) + uf.vertex_value(rec.source_endpoints[1]));
        exact = exact && uf.vertex_value(rec.new_vertex) == expect;
    }
    out.require(exact, fmt::format("prolongation midpoint rule exact on {} bisections", bis.records.size()));
    return out;
}

Outcome criterion9() {
    Outcome out;
    std::mt19937_64 rng(2024);
    auto mesh = build_initial_uniform(4);
    std::set<std::array<long long, 3>> classes;
    bool conform = true, area = true, halving = true;
    double area_err = 0.0, halving_err = 0.0;
    std::size_t restarts = 0, max_tris = 0;
    const auto record_classes = [&](const Mesh& m) {
        for (Index t = 0; t < m.n_triangles(); ++t) {
            const auto p = m.corners(t);
            std::array<double, 3> ang{};
            for (int i = 0; i < 3; ++i) {
                const Vec2 a = p[(i + 1) % 3] - p[i], b = p[(i + 2) % 3] - p[i];
                ang[i] = std::acos(std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0));
            }
            std::sort(ang.begin(), ang.end());
            classes.insert({std::llround(ang[0] * 1e6), std::llround(ang[1] * 1e6), std::llround(ang[2] * 1e6)});
        }
    };
    record_classes(mesh);
    for (int step = 0; step < 10000; ++step) {
        if (mesh.n_triangles() > 3000) {
            mesh = build_initial_uniform(4);
            ++restarts;
        }
        std::vector<Index> marked;
        const std::size_t count = 1 + rng() % 3;
        for (std::size_t i = 0; i < count; ++i) marked.push_back(static_cast<Index>(rng() % mesh.n_triangles()));
        auto bis = bisect_marked(mesh, marked);
        const auto& fine = bis.mesh;
        conform = conform && conformity_check(fine).ok();
        double total = 0.0;
        for (Index t = 0; t < fine.n_triangles(); ++t) total += fine.area(t);
        area_err = std::max(area_err, std::abs(total - 4.0));
        for (const auto& rec : bis.records) {
            const auto& v = fine.vertices();
            auto tri_area = [&](const Triangle& t) {
                return 0.5 * signed_area2(v[t.v[0]].pos(), v[t.v[1]].pos(), v[t.v[2]].pos());
            };
            const double half = 0.5 * tri_area(rec.parent);
            for (const auto& child : rec.children) halving_err = std::max(halving_err, std::abs(tri_area(child) - half));
        }
        record_classes(fine);
        max_tris = std::max(max_tris, fine.n_triangles());
        mesh = std::move(bis.mesh);
    }
    area = area_err <= 1e-12;
    halving = halving_err <= 1e-14;
    out.require(conform, "every refined mesh passes the conformity check");
    out.require(area, fmt::format("area conservation: max deviation {:.1e} <= 1e-12", area_err));
    out.require(halving, fmt::format("child areas are exact halves: max deviation {:.1e} <= 1e-14", halving_err));
    out.require(classes.size() <= 8, fmt::format("{} similarity classes (uniform(4) has 1; bound 8)", classes.size()));
    out.info(fmt::format("10000 steps, {} restarts from uniform(4), largest mesh {} triangles", restarts, max_tris));
    return out;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"optimal rate, test1 (atg-mild, regular-adaptive)", criterion1},
        {"optimal rate, test2 (atg-mild, atg-newton1)", criterion2},
        {"theta=0.15 slope recorded", criterion3},
        {"higher-order terms", criterion4},
        {"DOF economy at theta=0.15", criterion5},
        {"effectivity stability", criterion6},
        {"estimator reduction", criterion7},
        {"unit oracles", criterion8},
        {"mesh fuzz", criterion9},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double s = std::chrono::duration<double>(Clock::now() - t0).count();
        fmt::print("criterion {}: {} - {} ({:.1f} s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, s);
        for (const auto& n : o.notes) fmt::print("    {}\n", n);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
