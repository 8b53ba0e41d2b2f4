#include "atg/fespace.hpp"

#include "atg/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace atg {

std::array<Vec2, 3> barycentric_gradients(const std::array<Vec2, 3>& p) {
    const double a2 = signed_area2(p[0], p[1], p[2]);
    const double inv = 1.0 / a2;
    return {Vec2{(p[1].y - p[2].y) * inv, (p[2].x - p[1].x) * inv},
            Vec2{(p[2].y - p[0].y) * inv, (p[0].x - p[2].x) * inv},
            Vec2{(p[0].y - p[1].y) * inv, (p[1].x - p[0].x) * inv}};
}

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
    const auto& verts = mesh_->vertices();
    dof_of_vertex_.assign(verts.size(), kNone);
    for (Index v = 0; v < verts.size(); ++v) {
        if (verts[v].boundary) continue;
        dof_of_vertex_[v] = static_cast<Index>(vertex_of_dof_.size());
        vertex_of_dof_.push_back(v);
    }
}

std::shared_ptr<const FeSpace> build_space(std::shared_ptr<const Mesh> mesh) {
    return std::make_shared<const FeSpace>(std::move(mesh));
}

FeFunction::FeFunction(std::shared_ptr<const FeSpace> space)
    : space_(std::move(space)), coeffs_(space_->n_dofs(), 0.0) {}

FeFunction::FeFunction(std::shared_ptr<const FeSpace> space, std::vector<double> coefficients)
    : space_(std::move(space)), coeffs_(std::move(coefficients)) {
    if (coeffs_.size() != space_->n_dofs()) {
        throw std::invalid_argument("FeFunction: " + std::to_string(coeffs_.size()) +
                                    " coefficients for a space with " +
                                    std::to_string(space_->n_dofs()) + " dofs");
    }
}

double FeFunction::vertex_value(Index v) const {
    const Index d = space_->dof_of_vertex(v);
    return d == kNone ? 0.0 : coeffs_[d];
}

LocalP1 FeFunction::local(Index t) const {
    const auto& mesh = space_->mesh();
    const auto& tri = mesh.triangles()[t];
    const auto grads = barycentric_gradients(mesh.corners(t));
    LocalP1 out;
    for (int i = 0; i < 3; ++i) {
        out.values[i] = vertex_value(tri.v[i]);
        out.gradient += out.values[i] * grads[i];
    }
    return out;
}

PointValue FeFunction::evaluate(Index t, const Barycentric& l) const {
    if (t >= space_->mesh().n_triangles()) {
        throw std::out_of_range("FeFunction::evaluate: triangle id " + std::to_string(t) +
                                " out of range");
    }
    const auto loc = local(t);
    return {loc.at(l), loc.gradient};
}

FeFunction interpolate(std::shared_ptr<const FeSpace> space, const ScalarField& g) {
    std::vector<double> c(space->n_dofs());
    const auto& verts = space->mesh().vertices();
    for (Index d = 0; d < c.size(); ++d) c[d] = g(verts[space->vertex_of_dof(d)].pos());
    return FeFunction(std::move(space), std::move(c));
}

FeFunction prolongate(const FeFunction& coarse, std::span<const RefinementRecord> records,
                      std::shared_ptr<const FeSpace> fine_space) {
    const auto& cmesh = coarse.space().mesh();
    const auto& fmesh = fine_space->mesh();
    const auto nc = cmesh.n_vertices();
    const auto nf = fmesh.n_vertices();
    if (nf < nc) throw HierarchyError("prolongate: fine mesh has fewer vertices than coarse mesh");

    std::vector<double> values(nf, 0.0);
    std::vector<char> known(nf, 0);
    for (Index v = 0; v < nc; ++v) {
        values[v] = coarse.vertex_value(v);
        known[v] = 1;
    }
    for (const auto& r : records) {
        if (r.ancestor >= cmesh.n_triangles()) {
            throw HierarchyError("prolongate: record parent is not a triangle of the coarse mesh");
        }
        const auto [a, b] = r.source_endpoints;
        if (r.new_vertex >= nf || a >= nf || b >= nf || !known[a] || !known[b]) {
            throw HierarchyError("prolongate: record does not match the fine mesh");
        }
        if (!known[r.new_vertex]) {
            values[r.new_vertex] = 0.5 * (values[a] + values[b]);
            known[r.new_vertex] = 1;
        }
    }
    std::vector<double> c(fine_space->n_dofs());
    for (Index d = 0; d < c.size(); ++d) {
        const Index v = fine_space->vertex_of_dof(d);
        if (!known[v]) {
            throw HierarchyError("prolongate: fine vertex " + std::to_string(v) +
                                 " is not covered by the refinement records");
        }
        c[d] = values[v];
    }
    return FeFunction(std::move(fine_space), std::move(c));
}

namespace {

double energy_density(const Mat2& a, const Vec2& g) { return dot(a * g, g); }

struct NormParts {
    double l2 = 0.0, h1 = 0.0, e1 = 0.0, e2 = 0.0;
};

// Per-element squared norms of (u - v) where u is `exact` (or zero).
NormReport integrate_norms(const FeFunction& v, const ExactSolution* exact,
                           const EnergyWeights& weights, int quad_order, Exec exec) {
    const auto& mesh = v.space().mesh();
    const auto& rule = quad_rule(quad_order);
    const auto nt = mesh.n_triangles();
    std::vector<NormParts> parts(nt);

    ScalarField reference = weights.reference;
    if (!reference && exact) reference = exact->u;

    kernels::for_each_index(exec, nt, [&](std::size_t t) {
        const auto p = mesh.corners(static_cast<Index>(t));
        const double area = 0.5 * signed_area2(p[0], p[1], p[2]);
        const auto loc = v.local(static_cast<Index>(t));
        NormParts acc;
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            const auto& l = rule.points[q];
            const Vec2 x = from_barycentric(p, l);
            const double w = rule.weights[q] * area;
            double e = -loc.at(l);
            Vec2 ge = -1.0 * loc.gradient;
            if (exact) {
                e += exact->u(x);
                ge += exact->grad(x);
            }
            const Mat2 a1 = weights.alpha ? weights.alpha(x) : Mat2::identity();
            Mat2 a2 = Mat2::identity();
            if (weights.alpha_of_u) a2 = weights.alpha_of_u(x, reference ? reference(x) : 0.0);
            acc.l2 += w * e * e;
            acc.h1 += w * dot(ge, ge);
            acc.e1 += w * energy_density(a1, ge);
            acc.e2 += w * energy_density(a2, ge);
        }
        parts[t] = acc;
    });

    NormParts total;
    for (const auto& p : parts) {
        total.l2 += p.l2;
        total.h1 += p.h1;
        total.e1 += p.e1;
        total.e2 += p.e2;
    }
    return {std::sqrt(total.l2), std::sqrt(total.h1), std::sqrt(std::max(total.e1, 0.0)),
            std::sqrt(std::max(total.e2, 0.0))};
}

}  // namespace

NormReport norms(const FeFunction& v, const EnergyWeights& weights, int quad_order, Exec exec) {
    return integrate_norms(v, nullptr, weights, quad_order, exec);
}

NormReport error_norms(const FeFunction& v, const ExactSolution& exact, const EnergyWeights& weights,
                       int quad_order, Exec exec) {
    if (!exact.u || !exact.grad) throw std::invalid_argument("error_norms: exact solution pack is incomplete");
    return integrate_norms(v, &exact, weights, quad_order, exec);
}

double l2_distance(const FeFunction& v, const FeFunction& w, int quad_order) {
    if (&v.space() != &w.space()) throw std::invalid_argument("l2_distance: functions live on different spaces");
    const auto& mesh = v.space().mesh();
    const auto& rule = quad_rule(quad_order);
    double sum = 0.0;
    for (Index t = 0; t < mesh.n_triangles(); ++t) {
        const auto lv = v.local(t);
        const auto lw = w.local(t);
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            const double d = lv.at(rule.points[q]) - lw.at(rule.points[q]);
            acc += rule.weights[q] * d * d;
        }
        sum += acc * mesh.area(t);
    }
    return std::sqrt(sum);
}

std::string write_function(const FeFunction& fn) {
    std::ostringstream os;
    os.precision(17);
    os << "atgfn 1\n" << fn.coefficients().size() << '\n';
    for (double c : fn.coefficients()) os << c << '\n';
    return os.str();
}

std::vector<double> read_function(std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string magic;
    int version = 0;
    std::size_t n = 0;
    if (!(is >> magic >> version) || magic != "atgfn" || version != 1) {
        throw ParseError(1, "expected header 'atgfn 1'");
    }
    if (!(is >> n)) throw ParseError(2, "missing coefficient count");
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(is >> c[i])) throw ParseError(3 + i, "missing or malformed coefficient");
    }
    return c;
}

}  // namespace atg
