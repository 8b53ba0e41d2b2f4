#include "atg/adaptivity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <stdexcept>

namespace atg {

namespace {

void require_same_mesh(const FeFunction& a, const FeFunction& b) {
    if (&a.space().mesh() != &b.space().mesh()) {
        throw std::invalid_argument("estimator: functions live on different meshes");
    }
}

Barycentric barycentric_of(const std::array<Vec2, 3>& p, Vec2 x) {
    const double total = signed_area2(p[0], p[1], p[2]);
    return {signed_area2(x, p[1], p[2]) / total, signed_area2(p[0], x, p[2]) / total,
            signed_area2(p[0], p[1], x) / total};
}

int local_index(const Triangle& tri, Index v) {
    for (int i = 0; i < 3; ++i) {
        if (tri.v[i] == v) return i;
    }
    throw std::logic_error("edge endpoint is not a vertex of its adjacent triangle");
}

}  // namespace

EstimatorReport estimate(const Mesh& mesh, const EstimatorKernels& k, const EstimatorOptions& opts) {
    const auto nt = mesh.n_triangles();
    const auto ne = mesh.n_edges();
    EstimatorReport rep;
    rep.eta2_R.assign(nt, 0.0);
    rep.osc2_R.assign(nt, 0.0);
    rep.eta2_J.assign(ne, 0.0);
    rep.osc2_J.assign(ne, 0.0);

    const auto& rule = quad_rule(opts.element_order);
    kernels::for_each_index_checked(opts.exec, nt, [&](std::size_t ti) {
        const auto t = static_cast<Index>(ti);
        const auto p = mesh.corners(t);
        const double area = mesh.area(t);
        std::vector<double> r(rule.points.size());
        double mean = 0.0;
        for (std::size_t q = 0; q < r.size(); ++q) {
            r[q] = k.residual(t, {from_barycentric(p, rule.points[q]), rule.points[q]});
            mean += rule.weights[q] * r[q];
        }
        double sq = 0.0, dev = 0.0;
        for (std::size_t q = 0; q < r.size(); ++q) {
            sq += rule.weights[q] * r[q] * r[q];
            dev += rule.weights[q] * (r[q] - mean) * (r[q] - mean);
        }
        // H_K^2 * ||.||^2_K with H_K^2 = |K| and ||.||^2_K = |K| * weighted sum.
        rep.eta2_R[t] = area * area * sq;
        rep.osc2_R[t] = area * area * dev;
    });

    const auto& erule = quad_rule_edge(opts.edge_order);
    const auto& tris = mesh.triangles();
    kernels::for_each_index_checked(opts.exec, ne, [&](std::size_t ei) {
        const auto& e = mesh.edges()[ei];
        if (e.boundary) return;
        const Vec2 a = mesh.vertices()[e.v[0]].pos();
        const Vec2 b = mesh.vertices()[e.v[1]].pos();
        const Vec2 d = b - a;
        const double len = norm(d);
        const Vec2 n{d.y / len, -d.x / len};
        std::array<std::array<int, 2>, 2> loc{};
        for (int s = 0; s < 2; ++s) {
            const auto& tri = tris[e.adjacent[s]];
            loc[s] = {local_index(tri, e.v[0]), local_index(tri, e.v[1])};
        }
        std::vector<double> jump(erule.points.size());
        double mean = 0.0;
        for (std::size_t q = 0; q < jump.size(); ++q) {
            const double s = erule.points[q];
            const Vec2 x = a + s * d;
            double j = 0.0;
            for (int side = 0; side < 2; ++side) {
                Barycentric l{0.0, 0.0, 0.0};
                l[loc[side][0]] = 1.0 - s;
                l[loc[side][1]] = s;
                const double fn = dot(k.flux(e.adjacent[side], {x, l}), n);
                j += side == 0 ? fn : -fn;
            }
            jump[q] = j;
            mean += erule.weights[q] * j;
        }
        double sq = 0.0, dev = 0.0;
        for (std::size_t q = 0; q < jump.size(); ++q) {
            sq += erule.weights[q] * jump[q] * jump[q];
            dev += erule.weights[q] * (jump[q] - mean) * (jump[q] - mean);
        }
        rep.eta2_J[ei] = len * len * sq;
        rep.osc2_J[ei] = len * len * dev;
    });

    rep.eta_global = std::sqrt(kernels::ordered_sum(rep.eta2_R) + kernels::ordered_sum(rep.eta2_J));
    rep.osc_global = std::sqrt(kernels::ordered_sum(rep.osc2_R) + kernels::ordered_sum(rep.osc2_J));
    return rep;
}

EstimatorKernels linear_kernels(const FeFunction& u_fine, const FeFunction& u_coarse, const LinearProblem& p) {
    require_same_mesh(u_fine, u_coarse);
    auto uh = std::make_shared<const std::vector<LocalP1>>(localize(u_fine));
    auto uc = std::make_shared<const std::vector<LocalP1>>(localize(u_coarse));
    EstimatorKernels k;
    k.residual = [uh, uc, p](Index t, const QuadPoint& q) {
        const Vec2 gh = (*uh)[t].gradient;
        const auto& c = (*uc)[t];
        double r = dot(p.beta ? p.beta(q.x) : Vec2{}, c.gradient) + (p.gamma ? p.gamma(q.x) : 0.0) * c.at(q.l) -
                   p.source(q.x);
        if (p.alpha_div) r -= dot(p.alpha_div(q.x), gh);
        return r;
    };
    k.flux = [uh, p](Index t, const QuadPoint& q) { return p.alpha(q.x) * (*uh)[t].gradient; };
    return k;
}

EstimatorKernels mild_kernels(const FeFunction& u_fine, const FeFunction& w, const MildProblem& p) {
    require_same_mesh(u_fine, w);
    if (!p.alpha_u) throw std::invalid_argument("estimate_mild: alpha_u derivative is required");
    auto uh = std::make_shared<const std::vector<LocalP1>>(localize(u_fine));
    auto wl = std::make_shared<const std::vector<LocalP1>>(localize(w));
    EstimatorKernels k;
    k.residual = [uh, wl, p](Index t, const QuadPoint& q) {
        const Vec2 gh = (*uh)[t].gradient;
        const auto& wt = (*wl)[t];
        const double y = wt.at(q.l);
        Vec2 div_coeff = p.alpha_u(q.x, y).transposed() * wt.gradient;
        if (p.alpha_div_x) div_coeff += p.alpha_div_x(q.x, y);
        return -dot(div_coeff, gh) + dot(p.beta(q.x, y), gh) + p.gamma(q.x, y) - p.source(q.x);
    };
    k.flux = [uh, wl, p](Index t, const QuadPoint& q) {
        return p.alpha(q.x, (*wl)[t].at(q.l)) * (*uh)[t].gradient;
    };
    return k;
}

EstimatorReport estimate_linear(const FeFunction& u_fine, const FeFunction& u_coarse_on_fine, const LinearProblem& p,
                                const EstimatorOptions& opts) {
    return estimate(u_fine.space().mesh(), linear_kernels(u_fine, u_coarse_on_fine, p), opts);
}

EstimatorReport estimate_mild(const FeFunction& u_fine, const FeFunction& u_coarse_on_fine, const MildProblem& p,
                              const EstimatorOptions& opts) {
    return estimate(u_fine.space().mesh(), mild_kernels(u_fine, u_coarse_on_fine, p), opts);
}

std::vector<double> element_indicators(const Mesh& mesh, const EstimatorReport& report) {
    std::vector<double> out = report.eta2_R;
    for (Index e = 0; e < mesh.n_edges(); ++e) {
        const auto& edge = mesh.edges()[e];
        for (Index t : edge.adjacent) {
            if (t != kNone) out[t] += 0.5 * report.eta2_J[e];
        }
    }
    return out;
}

MarkedSet dorfler_mark(std::span<const double> indicators, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("dorfler_mark: theta must lie in (0, 1)");
    MarkedSet out;
    out.theta = theta;
    const double total = kernels::ordered_sum(indicators);
    if (!(total > 0.0)) {
        out.captured_fraction = 1.0;
        return out;
    }
    std::vector<Index> order(indicators.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return indicators[a] > indicators[b]; });
    double captured = 0.0;
    for (Index t : order) {
        if (captured >= theta * total) break;
        captured += indicators[t];
        out.elements.push_back(t);
    }
    out.captured_fraction = captured / total;
    return out;
}

MarkedSet dorfler_mark(const Mesh& mesh, const EstimatorReport& report, double theta) {
    const auto ind = element_indicators(mesh, report);
    return dorfler_mark(ind, theta);
}

ReductionAudit audit_reduction(const FeFunction& u, const FeFunction& w, const MildProblem& p,
                               std::span<const RefinementRecord> records, std::shared_ptr<const FeSpace> fine_space,
                               int order, Exec exec) {
    const auto& coarse = u.space().mesh();
    const auto& fine = fine_space->mesh();
    const EstimatorOptions opts{order, order, exec};
    ReductionAudit audit;
    audit.n_records = records.size();

    const auto coarse_k = mild_kernels(u, w, p);
    const auto coarse_rep = estimate(coarse, coarse_k, opts);
    audit.eta2_coarse = coarse_rep.eta2();

    const auto uf = prolongate(u, records, fine_space);
    const auto wf = prolongate(w, records, fine_space);
    const auto fine_rep = estimate(fine, mild_kernels(uf, wf, p), opts);
    audit.eta2_fine = fine_rep.eta2();

    for (Index e = 0; e < fine.n_edges(); ++e) {
        const auto& edge = fine.edges()[e];
        if (edge.boundary) continue;
        if (fine.triangles()[edge.adjacent[0]].parent != fine.triangles()[edge.adjacent[1]].parent) continue;
        ++audit.n_intra_edges;
        audit.max_intra_edge_jump = std::max(audit.max_intra_edge_jump, std::sqrt(fine_rep.eta2_J[e]));
    }

    // Residual indicator of a geometric triangle inside coarse triangle `a`,
    // integrated with `order` on 16 congruent subtriangles.
    const auto& rule = quad_rule(order);
    const auto& fv = fine.vertices();
    std::function<double(const std::array<Vec2, 3>&, Index, int)> integral_r2 =
        [&](const std::array<Vec2, 3>& pts, Index a, int depth) -> double {
        if (depth > 0) {
            const Vec2 m01 = 0.5 * (pts[0] + pts[1]), m12 = 0.5 * (pts[1] + pts[2]), m20 = 0.5 * (pts[2] + pts[0]);
            return integral_r2({pts[0], m01, m20}, a, depth - 1) + integral_r2({m01, pts[1], m12}, a, depth - 1) +
                   integral_r2({m20, m12, pts[2]}, a, depth - 1) + integral_r2({m12, m20, m01}, a, depth - 1);
        }
        const auto anc = coarse.corners(a);
        double sq = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Vec2 x = from_barycentric(pts, rule.points[q]);
            const double r = coarse_k.residual(a, {x, barycentric_of(anc, x)});
            sq += rule.weights[q] * r * r;
        }
        return 0.5 * signed_area2(pts[0], pts[1], pts[2]) * sq;
    };
    auto indicator = [&](const Triangle& tri, Index a) {
        const std::array<Vec2, 3> pts{fv[tri.v[0]].pos(), fv[tri.v[1]].pos(), fv[tri.v[2]].pos()};
        return 0.5 * signed_area2(pts[0], pts[1], pts[2]) * integral_r2(pts, a, 2);
    };
    std::vector<double> defect(records.size(), 0.0);
    kernels::for_each_index_checked(exec, records.size(), [&](std::size_t i) {
        const auto& rec = records[i];
        const double parent = indicator(rec.parent, rec.ancestor);
        const double kids = indicator(rec.children[0], rec.ancestor) + indicator(rec.children[1], rec.ancestor);
        const double diff = std::abs(kids - 0.5 * parent);
        defect[i] = parent > 0.0 ? diff / parent : (diff > 0.0 ? 1.0 : 0.0);
    });
    for (double d : defect) audit.max_child_defect = std::max(audit.max_child_defect, d);

    std::set<Index> refined, bisected;
    for (const auto& rec : records) {
        if (rec.parent_id != kNone) refined.insert(rec.parent_id);
        if (auto e = coarse.find_edge(rec.source_endpoints[0], rec.source_endpoints[1])) bisected.insert(*e);
    }
    for (Index t : refined) audit.eta2_removed += coarse_rep.eta2_R[t];
    for (Index e : bisected) audit.eta2_removed += coarse_rep.eta2_J[e];
    return audit;
}

}  // namespace atg
