#include "atg/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace atg {

namespace {

struct AlgorithmName {
    Algorithm id;
    const char* name;
};

constexpr AlgorithmName kNames[] = {
    {Algorithm::AtgLinear, "atg-linear"},
    {Algorithm::AtgMild, "atg-mild"},
    {Algorithm::AtgMildNewton, "atg-mild-newton"},
    {Algorithm::AtgNewton1, "atg-newton1"},
    {Algorithm::AtgNewton2, "atg-newton2"},
    {Algorithm::RegularAdaptive, "regular-adaptive"},
    {Algorithm::TwoGridUniform, "two-grid-uniform"},
};

struct LevelSolution {
    LevelSolution(FeFunction u_, FeFunction frozen_, std::optional<FeFunction> intermediate_ = std::nullopt,
                  std::size_t krylov = 0, std::size_t newton = 0, std::vector<double> residuals = {})
        : u(std::move(u_)),
          frozen(std::move(frozen_)),
          intermediate(std::move(intermediate_)),
          krylov_iters(krylov),
          newton_iters(newton),
          newton_residuals(std::move(residuals)) {}

    FeFunction u;
    FeFunction frozen;
    std::optional<FeFunction> intermediate;
    std::size_t krylov_iters = 0;
    std::size_t newton_iters = 0;
    std::vector<double> newton_residuals;
    bool ok = true;
    std::string failure;
};

using Clock = std::chrono::steady_clock;

class Driver {
public:
    Driver(const Problem& p, RunConfig cfg, RunHooks hooks) : p_(p), cfg_(std::move(cfg)), hooks_(std::move(hooks)) {
        cfg_.validate();
        lin_.tol = cfg_.tol;
        lin_.exec = cfg_.exec;
        newton_.tol = cfg_.tol;
        newton_.max_iter = cfg_.newton_max_iter;
        newton_.quad_order = cfg_.load_order;
        newton_.linear = lin_;
        linear_mode_ = cfg_.algorithm == Algorithm::AtgLinear;
        if (linear_mode_) {
            if (!p.linear) throw std::invalid_argument("atg-linear needs a linear problem; '" + p.name + "' is not");
            weights_.alpha = p.linear->alpha;
            sigma_ = sigma_star(*p.linear);
        } else {
            if (!p.mild) {
                throw std::invalid_argument(to_string(cfg_.algorithm) + " needs a problem with a mildly nonlinear "
                                            "form for estimation; '" + p.name + "' has none");
            }
            general_ = p.general ? *p.general : general_view(*p.mild);
            weights_.alpha_of_u = p.mild->alpha;
            sigma_ = sigma_star(*p.mild);
        }
    }

    ConvergenceHistory adaptive();
    ConvergenceHistory two_grid();

private:
    LevelSolution initial(const std::shared_ptr<const FeSpace>& space);
    LevelSolution step(const FeFunction& w);
    LevelSolution newton_full(const FeFunction& start);
    LevelSolution frozen_mild(const FeFunction& w);
    EstimatorReport estimate(const LevelSolution& s) const;
    LevelRecord make_record(int k, const LevelSolution& s, const FeFunction& prev, const EstimatorReport& rep) const;
    void fail(ConvergenceHistory& h, const std::string& why) const {
        h.completed = false;
        h.failure = why;
    }

    const Problem& p_;
    RunConfig cfg_;
    RunHooks hooks_;
    SolverOptions lin_;
    NewtonOptions newton_;
    bool linear_mode_ = false;
    GeneralProblem general_;
    EnergyWeights weights_;
    ScalarField sigma_;
};

LevelSolution Driver::newton_full(const FeFunction& start) {
    auto r = newton_solve(general_, start, newton_);
    LevelSolution s{r.u, r.u, std::nullopt, r.linear_iterations, r.report.iterations, r.residual_history};
    if (!r.report.converged) {
        s.ok = false;
        s.failure = "Newton: " + r.report.message;
    }
    return s;
}

LevelSolution Driver::frozen_mild(const FeFunction& w) {
    auto sys = assemble_frozen_mild(w.space(), w, *p_.mild, cfg_.matrix_order, cfg_.load_order, cfg_.exec);
    auto r = krylov_nonsym_solve(sys.matrix, sys.rhs, lin_, w.coefficients());
    LevelSolution s{FeFunction(w.space_ptr(), std::move(r.x)), w, std::nullopt, r.report.iterations, 0, {}};
    if (!r.report.converged) {
        s.ok = false;
        s.failure = "frozen-coefficient solve: " + r.report.message;
    }
    return s;
}

LevelSolution Driver::initial(const std::shared_ptr<const FeSpace>& space) {
    if (linear_mode_) {
        const auto a = assemble_linear_full(*space, *p_.linear, cfg_.matrix_order, cfg_.exec);
        const auto b = assemble_load(*space, p_.linear->source, cfg_.load_order, cfg_.exec);
        auto r = krylov_nonsym_solve(a, b, lin_);
        FeFunction u(space, std::move(r.x));
        LevelSolution s{u, u, std::nullopt, r.report.iterations, 0, {}};
        if (!r.report.converged) {
            s.ok = false;
            s.failure = "initial non-SPD solve: " + r.report.message;
        }
        return s;
    }
    return newton_full(FeFunction(space));
}

LevelSolution Driver::step(const FeFunction& w) {
    const auto& space = w.space();
    switch (cfg_.algorithm) {
        case Algorithm::AtgLinear: {
            const auto& lp = *p_.linear;
            const auto as = assemble_AS(space, lp.alpha, cfg_.matrix_order, cfg_.exec);
            const auto an = assemble_AN_matrix(space, lp.beta, lp.gamma, cfg_.matrix_order, cfg_.exec);
            auto rhs = assemble_load(space, lp.source, cfg_.load_order, cfg_.exec);
            const auto nw = an * w.coefficients();
            for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= nw[i];
            auto r = cg_solve(as, rhs, lin_, w.coefficients());
            LevelSolution s{FeFunction(w.space_ptr(), std::move(r.x)), w, std::nullopt, r.report.iterations, 0, {}};
            if (!r.report.converged) {
                s.ok = false;
                s.failure = "SPD solve: " + r.report.message;
            }
            return s;
        }
        case Algorithm::AtgMild:
            return frozen_mild(w);
        case Algorithm::AtgMildNewton: {
            auto first = frozen_mild(w);
            if (!first.ok) return first;
            auto st = newton_step(first.u, general_, newton_);
            LevelSolution s{st.u, first.u, first.u, first.krylov_iters + st.linear.iterations, 1,
                            {st.residual_after}};
            if (!st.linear.converged) {
                s.ok = false;
                s.failure = "Newton correction: " + st.linear.message;
            }
            return s;
        }
        case Algorithm::AtgNewton1:
        case Algorithm::AtgNewton2: {
            auto st = newton_step(w, general_, newton_);
            LevelSolution s{st.u, w, std::nullopt, st.linear.iterations, 1, {st.residual_after}};
            if (st.linear.converged && cfg_.algorithm == Algorithm::AtgNewton2) {
                auto st2 = newton_step(st.u, general_, newton_);
                s.intermediate = st.u;
                s.frozen = st.u;
                s.u = st2.u;
                s.krylov_iters += st2.linear.iterations;
                s.newton_iters = 2;
                s.newton_residuals.push_back(st2.residual_after);
                st.linear = st2.linear;
            }
            if (!st.linear.converged) {
                s.ok = false;
                s.failure = "Newton step: " + st.linear.message;
            }
            return s;
        }
        case Algorithm::RegularAdaptive:
            return newton_full(w);
        case Algorithm::TwoGridUniform:
            break;
    }
    throw std::logic_error("step: unsupported algorithm");
}

EstimatorReport Driver::estimate(const LevelSolution& s) const {
    const EstimatorOptions opts{cfg_.load_order, cfg_.load_order, cfg_.exec};
    if (linear_mode_) return estimate_linear(s.u, s.frozen, *p_.linear, opts);
    return estimate_mild(s.u, s.frozen, *p_.mild, opts);
}

LevelRecord Driver::make_record(int k, const LevelSolution& s, const FeFunction& prev,
                                const EstimatorReport& rep) const {
    const auto& exact = p_.exact();
    LevelRecord r;
    r.k = k;
    r.n_dofs = s.u.space().n_dofs();
    r.n_triangles = s.u.space().mesh().n_triangles();
    const auto nr = error_norms(s.u, exact, weights_, cfg_.load_order, cfg_.exec);
    r.h1_semi_err = nr.h1_semi;
    r.l2_err = nr.l2;
    r.energy_err = linear_mode_ ? nr.energy1 : nr.energy2;
    r.eta = rep.eta_global;
    r.osc = rep.osc_global;
    const auto eff = efficiency_terms(s.u, prev, exact, sigma_, !linear_mode_, cfg_.load_order, cfg_.exec);
    r.e1 = eff.e1;
    r.e2 = eff.e2;
    r.solver_iters = s.krylov_iters;
    r.newton_iters = s.newton_iters;
    r.newton_residuals = s.newton_residuals;
    if (s.intermediate) {
        const auto a = s.u.coefficients();
        const auto b = s.intermediate->coefficients();
        for (std::size_t i = 0; i < a.size(); ++i) r.correction_size = std::max(r.correction_size, std::abs(a[i] - b[i]));
    }
    return r;
}

double elapsed_ms(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

ConvergenceHistory Driver::adaptive() {
    ConvergenceHistory h;
    h.config = cfg_;
    auto mesh = std::make_shared<const Mesh>(build_initial_uniform(cfg_.initial_n));
    auto space = build_space(mesh);

    auto t0 = Clock::now();
    auto sol = initial(space);
    if (!sol.ok) {
        fail(h, sol.failure);
        return h;
    }
    FeFunction prev = sol.u;  // u_{-1} = u_0

    for (int k = 0;; ++k) {
        const auto rep = estimate(sol);
        auto rec = make_record(k, sol, prev, rep);
        if (cfg_.record_timing) rec.wall_ms = elapsed_ms(t0);
        if (hooks_.on_level) {
            hooks_.on_level({k, sol.u, sol.frozen, prev, sol.intermediate ? &*sol.intermediate : nullptr, rep});
        }
        if (k >= cfg_.max_levels) {
            h.levels.push_back(std::move(rec));
            break;
        }
        const auto marked = dorfler_mark(*mesh, rep, cfg_.theta);
        rec.marked_fraction = marked.captured_fraction;
        h.levels.push_back(std::move(rec));
        if (marked.elements.empty()) break;

        auto bis = bisect_marked(*mesh, marked.elements);
        auto fine_mesh = std::make_shared<const Mesh>(std::move(bis.mesh));
        auto fine_space = build_space(fine_mesh);
        if (fine_space->n_dofs() > cfg_.max_dofs) break;
        if (hooks_.on_refine) hooks_.on_refine({k, sol.u, sol.frozen, bis.records, fine_space});

        t0 = Clock::now();
        auto w = prolongate(sol.u, bis.records, fine_space);
        auto next = step(w);
        if (!next.ok) {
            fail(h, "level " + std::to_string(k + 1) + ": " + next.failure);
            break;
        }
        sol = std::move(next);
        prev = std::move(w);
        mesh = std::move(fine_mesh);
        space = std::move(fine_space);
    }
    fill_hot(h, cfg_.zeta_tilde);
    return h;
}

ConvergenceHistory Driver::two_grid() {
    ConvergenceHistory h;
    h.config = cfg_;
    const double fine_n = static_cast<double>(cfg_.initial_n) * std::ldexp(1.0, cfg_.max_levels);
    if ((fine_n - 1.0) * (fine_n - 1.0) > static_cast<double>(cfg_.max_dofs)) {
        throw std::invalid_argument("two-grid-uniform: fine mesh with n = " + std::to_string(fine_n) +
                                    " exceeds max-dofs");
    }
    auto mesh = std::make_shared<const Mesh>(build_initial_uniform(cfg_.initial_n));
    auto t0 = Clock::now();
    auto coarse = initial(build_space(mesh));
    if (!coarse.ok) {
        fail(h, coarse.failure);
        return h;
    }
    {
        const auto rep = estimate(coarse);
        auto rec = make_record(0, coarse, coarse.u, rep);
        if (cfg_.record_timing) rec.wall_ms = elapsed_ms(t0);
        if (hooks_.on_level) hooks_.on_level({0, coarse.u, coarse.frozen, coarse.u, nullptr, rep});
        h.levels.push_back(std::move(rec));
    }

    t0 = Clock::now();
    FeFunction w = coarse.u;
    for (int round = 0; round < 2 * cfg_.max_levels; ++round) {
        std::vector<Index> all(mesh->n_triangles());
        for (Index t = 0; t < all.size(); ++t) all[t] = t;
        auto bis = bisect_marked(*mesh, all);
        auto fine_mesh = std::make_shared<const Mesh>(std::move(bis.mesh));
        w = prolongate(w, bis.records, build_space(fine_mesh));
        mesh = std::move(fine_mesh);
    }
    auto fine = [&] {
        if (linear_mode_) return step(w);
        auto st = newton_step(w, general_, newton_);
        LevelSolution s{st.u, w, std::nullopt, st.linear.iterations, 1, {st.residual_after}};
        if (!st.linear.converged) {
            s.ok = false;
            s.failure = "fine Newton step: " + st.linear.message;
        }
        return s;
    }();
    if (!fine.ok) {
        fail(h, fine.failure);
    } else {
        const auto rep = estimate(fine);
        auto rec = make_record(1, fine, w, rep);
        if (cfg_.record_timing) rec.wall_ms = elapsed_ms(t0);
        if (hooks_.on_level) hooks_.on_level({1, fine.u, fine.frozen, w, nullptr, rep});
        h.levels.push_back(std::move(rec));
    }
    fill_hot(h, cfg_.zeta_tilde);
    return h;
}

ConvergenceHistory run_as(const Problem& p, RunConfig cfg, Algorithm a, const RunHooks& hooks) {
    cfg.algorithm = a;
    return run(p, cfg, hooks);
}

}  // namespace

const std::vector<std::string>& algorithm_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> v;
        for (const auto& n : kNames) v.emplace_back(n.name);
        return v;
    }();
    return ids;
}

std::string to_string(Algorithm a) {
    for (const auto& n : kNames) {
        if (n.id == a) return n.name;
    }
    throw std::invalid_argument("unknown algorithm enumerator");
}

Algorithm parse_algorithm(const std::string& id) {
    for (const auto& n : kNames) {
        if (id == n.name) return n.id;
    }
    std::string valid;
    for (const auto& n : kNames) valid += (valid.empty() ? "" : ", ") + std::string(n.name);
    throw std::invalid_argument("unknown algorithm '" + id + "' (valid: " + valid + ")");
}

void RunConfig::validate() const {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0, 1)");
    if (!(zeta_tilde > 0.0 && zeta_tilde < 1.0)) throw std::invalid_argument("zeta-tilde must lie in (0, 1)");
    if (initial_n < 1) throw std::invalid_argument("initial-n must be at least 1");
    if (max_levels < 0) throw std::invalid_argument("max-levels must be nonnegative");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    for (int q : {matrix_order, load_order}) {
        if (q != 1 && q != 2 && q != 4 && q != 6 && q != 10) {
            throw std::invalid_argument("quadrature order must be one of 1, 2, 4, 6, 10");
        }
    }
}

ConvergenceHistory run(const Problem& p, const RunConfig& cfg, const RunHooks& hooks) {
    Driver d(p, cfg, hooks);
    return cfg.algorithm == Algorithm::TwoGridUniform ? d.two_grid() : d.adaptive();
}

ConvergenceHistory run_atg_linear(const Problem& p, RunConfig cfg, const RunHooks& hooks) {
    return run_as(p, std::move(cfg), Algorithm::AtgLinear, hooks);
}
ConvergenceHistory run_atg_mild(const Problem& p, RunConfig cfg, const RunHooks& hooks) {
    return run_as(p, std::move(cfg), Algorithm::AtgMild, hooks);
}
ConvergenceHistory run_atg_mild_newton(const Problem& p, RunConfig cfg, const RunHooks& hooks) {
    return run_as(p, std::move(cfg), Algorithm::AtgMildNewton, hooks);
}
ConvergenceHistory run_atg_newton1(const Problem& p, RunConfig cfg, const RunHooks& hooks) {
    return run_as(p, std::move(cfg), Algorithm::AtgNewton1, hooks);
}
ConvergenceHistory run_atg_newton2(const Problem& p, RunConfig cfg, const RunHooks& hooks) {
    return run_as(p, std::move(cfg), Algorithm::AtgNewton2, hooks);
}
ConvergenceHistory run_regular_adaptive(const Problem& p, RunConfig cfg, const RunHooks& hooks) {
    return run_as(p, std::move(cfg), Algorithm::RegularAdaptive, hooks);
}
ConvergenceHistory run_two_grid_uniform(const Problem& p, RunConfig cfg, const RunHooks& hooks) {
    return run_as(p, std::move(cfg), Algorithm::TwoGridUniform, hooks);
}

HotTerms compute_hot(std::span<const double> e, std::size_t k, double zeta) {
    if (!(zeta > 0.0 && zeta < 1.0)) throw std::invalid_argument("compute_hot: zeta-tilde must lie in (0, 1)");
    if (e.size() < k + 2) throw std::invalid_argument("compute_hot: need L2 errors up to level k + 1");
    HotTerms h;
    double w = 1.0;
    for (std::size_t i = 0; i <= k; ++i, w *= zeta) {
        h.hot1 += w * e[k + 1 - i] * e[k + 1 - i];
        h.hot2 += w * e[k - i] * e[k - i];
        if (i < k) h.hot3 += w * e[k - 1 - i] * e[k - 1 - i];
    }
    return h;
}

void fill_hot(ConvergenceHistory& history, double zeta) {
    std::vector<double> e;
    for (const auto& l : history.levels) e.push_back(l.l2_err);
    for (std::size_t j = 1; j < history.levels.size(); ++j) {
        const auto h = compute_hot(std::span<const double>(e).first(j + 1), j - 1, zeta);
        auto& rec = history.levels[j];
        rec.hot1 = h.hot1;
        rec.hot2 = h.hot2;
        rec.hot3 = h.hot3;
    }
}

ScalarField sigma_star(const LinearProblem& p) {
    return [p](Vec2 x) {
        const Vec2 g = p.exact.grad(x);
        double s = -contract(p.alpha(x), p.exact.hessian(x));
        if (p.alpha_div) s -= dot(p.alpha_div(x), g);
        if (p.beta) s += dot(p.beta(x), g);
        if (p.gamma) s += p.gamma(x) * p.exact.u(x);
        return s;
    };
}

ScalarField sigma_star(const MildProblem& p) {
    return [p](Vec2 x) {
        const double u = p.exact.u(x);
        const Vec2 g = p.exact.grad(x);
        Vec2 div_coeff = p.alpha_u(x, u).transposed() * g;
        if (p.alpha_div_x) div_coeff += p.alpha_div_x(x, u);
        return -contract(p.alpha(x, u), p.exact.hessian(x)) - dot(div_coeff, g) + dot(p.beta(x, u), g) +
               p.gamma(x, u);
    };
}

EfficiencyTerms efficiency_terms(const FeFunction& u_fine, const FeFunction& u_coarse, const ExactSolution& exact,
                                 const ScalarField& sigma, bool nonlinear, int order, Exec exec) {
    if (!exact.hessian) throw std::invalid_argument("efficiency_terms: exact Hessian is required");
    if (&u_fine.space().mesh() != &u_coarse.space().mesh()) {
        throw std::invalid_argument("efficiency_terms: functions live on different meshes");
    }
    const auto& mesh = u_fine.space().mesh();
    const auto& rule = quad_rule(order);
    const auto nt = mesh.n_triangles();
    // Per-element parts: |u-u_h|_1^2, H^2||D^2u||^2, ||u-u_c||^2, H^2||sigma-mean||^2, H^2|u-u_c|_1^2.
    std::vector<std::array<double, 5>> part(nt);
    kernels::for_each_index_checked(exec, nt, [&](std::size_t ti) {
        const auto t = static_cast<Index>(ti);
        const auto p = mesh.corners(t);
        const double area = mesh.area(t);
        const auto uh = u_fine.local(t);
        const auto uc = u_coarse.local(t);
        std::array<double, 5> acc{};
        std::vector<double> sig(rule.points.size());
        double mean = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto& l = rule.points[q];
            const Vec2 x = from_barycentric(p, l);
            const double w = rule.weights[q];
            const Vec2 g = exact.grad(x);
            const Mat2 hs = exact.hessian(x);
            const Vec2 dh = g - uh.gradient;
            const Vec2 dc = g - uc.gradient;
            const double ec = exact.u(x) - uc.at(l);
            acc[0] += w * dot(dh, dh);
            acc[1] += w * contract(hs, hs);
            acc[2] += w * ec * ec;
            acc[4] += w * dot(dc, dc);
            sig[q] = sigma(x);
            mean += w * sig[q];
        }
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            acc[3] += rule.weights[q] * (sig[q] - mean) * (sig[q] - mean);
        }
        // ||.||_K^2 = |K| * weighted sum; H_K^2 = |K|.
        part[t] = {area * acc[0], area * area * acc[1], area * acc[2], area * area * acc[3], area * area * acc[4]};
    });
    std::array<double, 5> total{};
    for (const auto& pt : part) {
        for (int i = 0; i < 5; ++i) total[i] += pt[i];
    }
    EfficiencyTerms out;
    out.e1 = std::sqrt(total[0]) + std::sqrt(total[1]);
    out.e2 = std::sqrt(total[2]) + std::sqrt(total[3]);
    if (nonlinear) out.e2 += std::sqrt(total[4]);
    return out;
}

double convergence_slope(std::span<const double> dofs, std::span<const double> values) {
    if (dofs.size() != values.size()) throw std::invalid_argument("convergence_slope: length mismatch");
    const std::size_t n = dofs.size();
    if (n < 2) throw std::invalid_argument("convergence_slope: need at least two levels");
    double sx = 0.0, sy = 0.0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(dofs[i] > 0.0) || !(values[i] > 0.0)) {
            throw std::domain_error("convergence_slope: values must be positive");
        }
        lx[i] = std::log(dofs[i]);
        ly[i] = std::log(values[i]);
        sx += lx[i];
        sy += ly[i];
    }
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    if (den == 0.0) throw std::domain_error("convergence_slope: dofs do not vary");
    return num / den;
}

namespace {

double history_slope(const ConvergenceHistory& h, std::size_t window, double LevelRecord::*field) {
    if (window < 2 || window > h.levels.size()) {
        throw std::invalid_argument("convergence_slope: window of " + std::to_string(window) + " levels for a history of " +
                                    std::to_string(h.levels.size()));
    }
    std::vector<double> d, v;
    for (std::size_t i = h.levels.size() - window; i < h.levels.size(); ++i) {
        d.push_back(static_cast<double>(h.levels[i].n_dofs));
        v.push_back(h.levels[i].*field);
    }
    return convergence_slope(d, v);
}

}  // namespace

double convergence_slope(const ConvergenceHistory& h, std::size_t window) {
    return history_slope(h, window, &LevelRecord::h1_semi_err);
}

double estimator_slope(const ConvergenceHistory& h, std::size_t window) {
    return history_slope(h, window, &LevelRecord::eta);
}

}  // namespace atg
