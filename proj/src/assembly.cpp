#include "atg/assembly.hpp"

#include <cmath>
#include <string>

namespace atg {

namespace {

void check_finite(const FormCoefficients& c, Index t) {
    if (!is_finite(c.a) || !is_finite(c.b) || !is_finite(c.c) || !std::isfinite(c.d)) {
        throw CoefficientError("non-finite form coefficient on triangle " + std::to_string(t));
    }
}

void check_finite(const LoadCoefficients& c, Index t) {
    if (!is_finite(c.flux) || !std::isfinite(c.s)) {
        throw CoefficientError("non-finite load coefficient on triangle " + std::to_string(t));
    }
}

void require_same_space(const FeSpace& space, const FeFunction& w) {
    if (&w.space() != &space && w.space().mesh_ptr() != space.mesh_ptr()) {
        throw std::invalid_argument("assembly: function lives on a different mesh");
    }
}

}  // namespace

ElementGeometry element_geometry(const Mesh& mesh, Index t) {
    ElementGeometry g;
    g.p = mesh.corners(t);
    g.area = 0.5 * signed_area2(g.p[0], g.p[1], g.p[2]);
    g.grad = barycentric_gradients(g.p);
    return g;
}

LocalMatrix local_matrix(const ElementGeometry& g, Index t, const FormKernel& kernel, int order) {
    const auto& rule = quad_rule(order);
    LocalMatrix m{};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const auto& l = rule.points[q];
        const auto c = kernel(t, {from_barycentric(g.p, l), l});
        check_finite(c, t);
        const double w = rule.weights[q] * g.area;
        for (int j = 0; j < 3; ++j) {
            // Trial function phi_j: value l[j], gradient g.grad[j].
            const Vec2 flux = c.a * g.grad[j] + l[j] * c.b;
            const double lower = dot(c.c, g.grad[j]) + c.d * l[j];
            for (int i = 0; i < 3; ++i) m[i][j] += w * (dot(flux, g.grad[i]) + lower * l[i]);
        }
    }
    return m;
}

SparseMatrix assemble_form(const FeSpace& space, const FormKernel& kernel, int order, Exec exec) {
    const auto& mesh = space.mesh();
    const auto nt = mesh.n_triangles();
    std::vector<LocalMatrix> local(nt);
    kernels::for_each_index_checked(exec, nt, [&](std::size_t t) {
        const auto id = static_cast<Index>(t);
        local[t] = local_matrix(element_geometry(mesh, id), id, kernel, order);
    });
    auto a = fe_pattern(space);
    for (Index t = 0; t < nt; ++t) {
        const auto& v = mesh.triangles()[t].v;
        for (int i = 0; i < 3; ++i) {
            const Index di = space.dof_of_vertex(v[i]);
            if (di == kNone) continue;
            for (int j = 0; j < 3; ++j) {
                const Index dj = space.dof_of_vertex(v[j]);
                if (dj != kNone) a.at(di, dj) += local[t][i][j];
            }
        }
    }
    return a;
}

std::vector<double> assemble_vector(const FeSpace& space, const LoadKernel& kernel, int order, Exec exec) {
    const auto& mesh = space.mesh();
    const auto& rule = quad_rule(order);
    const auto nt = mesh.n_triangles();
    std::vector<std::array<double, 3>> local(nt);
    kernels::for_each_index_checked(exec, nt, [&](std::size_t t) {
        const auto id = static_cast<Index>(t);
        const auto g = element_geometry(mesh, id);
        std::array<double, 3> b{};
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto& l = rule.points[q];
            const auto c = kernel(id, {from_barycentric(g.p, l), l});
            check_finite(c, id);
            const double w = rule.weights[q] * g.area;
            for (int i = 0; i < 3; ++i) b[i] += w * (dot(c.flux, g.grad[i]) + c.s * l[i]);
        }
        local[t] = b;
    });
    std::vector<double> out(space.n_dofs(), 0.0);
    for (Index t = 0; t < nt; ++t) {
        const auto& v = mesh.triangles()[t].v;
        for (int i = 0; i < 3; ++i) {
            const Index d = space.dof_of_vertex(v[i]);
            if (d != kNone) out[d] += local[t][i];
        }
    }
    return out;
}

std::vector<LocalP1> localize(const FeFunction& fn) {
    const auto nt = fn.space().mesh().n_triangles();
    std::vector<LocalP1> out(nt);
    for (Index t = 0; t < nt; ++t) out[t] = fn.local(t);
    return out;
}

SparseMatrix assemble_AS(const FeSpace& space, const MatrixField& alpha, int order, Exec exec) {
    return assemble_form(
        space, [&](Index, const QuadPoint& q) { return FormCoefficients{alpha(q.x), {}, {}, 0.0}; }, order, exec);
}

SparseMatrix assemble_AN_matrix(const FeSpace& space, const VectorField& beta, const ScalarField& gamma, int order,
                                Exec exec) {
    return assemble_form(
        space,
        [&](Index, const QuadPoint& q) {
            return FormCoefficients{{}, {}, beta ? beta(q.x) : Vec2{}, gamma ? gamma(q.x) : 0.0};
        },
        order, exec);
}

SparseMatrix assemble_linear_full(const FeSpace& space, const LinearProblem& p, int order, Exec exec) {
    return assemble_form(
        space,
        [&](Index, const QuadPoint& q) {
            return FormCoefficients{p.alpha(q.x), {}, p.beta ? p.beta(q.x) : Vec2{}, p.gamma ? p.gamma(q.x) : 0.0};
        },
        order, exec);
}

std::vector<double> assemble_load(const FeSpace& space, const ScalarField& source, int order, Exec exec) {
    return assemble_vector(
        space, [&](Index, const QuadPoint& q) { return LoadCoefficients{{}, source(q.x)}; }, order, exec);
}

SparseMatrix assemble_linearized(const FeSpace& space, const FeFunction& w, const GeneralProblem& p, int order,
                                 Exec exec) {
    require_same_space(space, w);
    const auto wl = localize(w);
    return assemble_form(
        space,
        [&](Index t, const QuadPoint& q) {
            const double y = wl[t].at(q.l);
            const Vec2 z = wl[t].gradient;
            return FormCoefficients{p.a(q.x, y, z), p.b(q.x, y, z), p.c(q.x, y, z), p.d(q.x, y, z)};
        },
        order, exec);
}

std::vector<double> nonlinear_residual(const FeSpace& space, const FeFunction& w, const GeneralProblem& p, int order,
                                       Exec exec) {
    require_same_space(space, w);
    const auto wl = localize(w);
    return assemble_vector(
        space,
        [&](Index t, const QuadPoint& q) {
            const double y = wl[t].at(q.l);
            const Vec2 z = wl[t].gradient;
            return LoadCoefficients{p.flux(q.x, y, z), p.g(q.x, y, z) - p.source(q.x)};
        },
        order, exec);
}

AssembledSystem assemble_frozen_mild(const FeSpace& space, const FeFunction& w, const MildProblem& p,
                                     int matrix_order, int load_order, Exec exec) {
    require_same_space(space, w);
    const auto wl = localize(w);
    AssembledSystem sys;
    sys.matrix = assemble_form(
        space,
        [&](Index t, const QuadPoint& q) {
            const double y = wl[t].at(q.l);
            return FormCoefficients{p.alpha(q.x, y), {}, p.beta(q.x, y), 0.0};
        },
        matrix_order, exec);
    sys.rhs = assemble_vector(
        space,
        [&](Index t, const QuadPoint& q) {
            const double y = wl[t].at(q.l);
            return LoadCoefficients{{}, p.source(q.x) - p.gamma(q.x, y)};
        },
        load_order, exec);
    return sys;
}

}  // namespace atg
