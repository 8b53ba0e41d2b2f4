#include "atg/mesh.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace atg;

namespace {

double total_area(const Mesh& m) {
    double s = 0.0;
    for (Index t = 0; t < m.n_triangles(); ++t) s += m.area(t);
    return s;
}

}  // namespace

TEST_CASE("uniform mesh counts") {
    for (int n : {1, 2, 3, 8}) {
        const auto m = build_initial_uniform(n);
        CHECK(m.n_vertices() == std::size_t((n + 1) * (n + 1)));
        CHECK(m.n_triangles() == std::size_t(2 * n * n));
        CHECK(m.n_interior_vertices() == std::size_t((n - 1) * (n - 1)));
    }
    CHECK(build_initial_uniform(1).n_interior_edges() == 1);
    CHECK(build_initial_uniform(2).domain_area() == doctest::Approx(4.0));
    CHECK(total_area(build_initial_uniform(2)) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK_THROWS_AS(build_initial_uniform(0), std::invalid_argument);
}

TEST_CASE("uniform mesh refinement edges are hypotenuses") {
    const auto m = build_initial_uniform(4);
    for (Index t = 0; t < m.n_triangles(); ++t) {
        const auto& tri = m.triangles()[t];
        const auto e = tri.refinement_edge();
        const double len = norm(m.vertices()[e[0]].pos() - m.vertices()[e[1]].pos());
        for (int i = 0; i < 3; ++i) CHECK(m.edge_length(m.triangle_edge(t, i)) <= len + 1e-15);
        CHECK(m.area(t) > 0.0);
    }
    CHECK(conformity_check(m).ok());
}

TEST_CASE("edges: interior iff two neighbours, boundary flags consistent") {
    const auto m = bisect_marked(build_initial_uniform(3), std::vector<Index>{4, 7}).mesh;
    for (const auto& e : m.edges()) {
        CHECK(e.boundary == (e.n_adjacent() == 1));
        if (e.boundary) {
            CHECK(m.vertices()[e.v[0]].boundary);
            CHECK(m.vertices()[e.v[1]].boundary);
        }
    }
    for (Index v = 0; v < m.n_vertices(); ++v) {
        const auto p = m.vertices()[v].pos();
        const bool on_boundary = std::abs(std::abs(p.x) - 1.0) < 1e-15 || std::abs(std::abs(p.y) - 1.0) < 1e-15;
        CHECK(m.vertices()[v].boundary == on_boundary);
    }
}

TEST_CASE("sizes of the unit right triangle") {
    const Mesh m({{0, 0, true}, {1, 0, true}, {0, 1, true}}, {Triangle{{0, 1, 2}, 0}});
    const auto s = sizes(m);
    CHECK(s.triangle[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    const auto hyp = *m.find_edge(1, 2);
    CHECK(s.edge[hyp] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("bisection halves areas and child H_K = parent H_K / sqrt 2") {
    const auto m = build_initial_uniform(2);
    const auto b = bisect_marked(m, std::vector<Index>{0});
    const auto parent_h = sizes(m).triangle[0];
    REQUIRE(!b.records.empty());
    for (const auto& r : b.records) {
        const auto& fv = b.mesh.vertices();
        auto area = [&](const Triangle& t) {
            return 0.5 * signed_area2(fv[t.v[0]].pos(), fv[t.v[1]].pos(), fv[t.v[2]].pos());
        };
        const double pa = area(r.parent);
        for (const auto& c : r.children) {
            CHECK(std::abs(area(c) - 0.5 * pa) <= 1e-14 * pa);
            CHECK(fv[c.v[c.peak]].x == fv[r.new_vertex].x);
            CHECK(fv[c.v[c.peak]].y == fv[r.new_vertex].y);
            CHECK(c.level == r.parent.level + 1);
        }
        const auto a = fv[r.source_endpoints[0]].pos();
        const auto c = fv[r.source_endpoints[1]].pos();
        CHECK(fv[r.new_vertex].x == 0.5 * (a.x + c.x));
        CHECK(fv[r.new_vertex].y == 0.5 * (a.y + c.y));
    }
    const auto& r0 = b.records.front();
    REQUIRE(r0.parent_id == 0);
    for (Index id : r0.child_ids) {
        if (id != kNone) CHECK(sizes(b.mesh).triangle[id] == doctest::Approx(parent_h / std::sqrt(2.0)).epsilon(1e-14));
    }
    CHECK(conformity_check(b.mesh).ok());
}

TEST_CASE("25-vertex mesh: two diagonal midpoints give 27 vertices") {
    const auto m = build_initial_uniform(4);
    REQUIRE(m.n_vertices() == 25);
    // Lower triangles of the squares (1,1) and (2,2): their hypotenuses are the
    // two diagonals meeting at the centre vertex 12.
    const Index t11 = 2 * (1 * 4 + 1);
    const Index t22 = 2 * (2 * 4 + 2);
    const auto one = bisect_marked(m, std::vector<Index>{t11});
    CHECK(one.mesh.n_vertices() == 26);
    const auto two = bisect_marked(m, std::vector<Index>{t11, t22});
    CHECK(two.mesh.n_vertices() == 27);
    std::set<Index> sources;
    for (const auto& r : two.records) {
        sources.insert(r.source_endpoints[0]);
        sources.insert(r.source_endpoints[1]);
    }
    CHECK(sources.count(12) == 1);
    CHECK(conformity_check(two.mesh).ok());
}

TEST_CASE("closure bisects a neighbour whose refinement edge differs") {
    // Unit square split along the anti-diagonal; the refinement edge of the
    // upper triangle is the top edge, not the shared one.
    std::vector<Vertex> v{{0, 0, true}, {1, 0, true}, {1, 1, true}, {0, 1, true}};
    std::vector<Triangle> t{Triangle{{0, 1, 3}, 0}, Triangle{{1, 2, 3}, 0}};
    const Mesh m(v, t);
    const auto b = bisect_marked(m, std::vector<Index>{0});
    bool neighbour_split = false;
    for (const auto& r : b.records) neighbour_split |= r.parent_id == 1;
    CHECK(neighbour_split);
    CHECK(conformity_check(b.mesh).ok());
    // Exhaustive edge audit: every interior edge has two triangles using both endpoints.
    for (const auto& e : b.mesh.edges()) {
        if (e.boundary) continue;
        for (Index k : e.adjacent) {
            const auto& tri = b.mesh.triangles()[k];
            CHECK(std::count(tri.v.begin(), tri.v.end(), e.v[0]) == 1);
            CHECK(std::count(tri.v.begin(), tri.v.end(), e.v[1]) == 1);
        }
    }
}

TEST_CASE("empty marking and invalid ids") {
    const auto m = build_initial_uniform(2);
    const auto b = bisect_marked(m, std::vector<Index>{});
    CHECK(b.mesh.n_triangles() == m.n_triangles());
    CHECK(b.records.empty());
    CHECK_THROWS_AS(bisect_marked(m, std::vector<Index>{99}), MeshError);
}

TEST_CASE("conformity_check finds an injected hanging node") {
    // Left square split into two triangles, right square split at the midpoint
    // of the shared edge: vertex 4 hangs on edge (1,2).
    std::vector<Vertex> v{{0, 0, true}, {1, 0, true}, {1, 1, true}, {0, 1, true}, {1, 0.5, false},
                          {2, 0, true}, {2, 1, true}};
    std::vector<Triangle> t{Triangle{{0, 1, 2}, 0}, Triangle{{0, 2, 3}, 1}, Triangle{{1, 5, 4}, 0},
                            Triangle{{5, 6, 4}, 0}, Triangle{{4, 6, 2}, 0}};
    const Mesh m(v, t, 0, 2.0);
    const auto r = conformity_check(m);
    REQUIRE_FALSE(r.ok());
    bool hanging = false;
    for (const auto& issue : r.issues) hanging |= issue.kind == ConformityIssue::Kind::HangingNode;
    CHECK(hanging);
}

TEST_CASE("mesh constructor rejects clockwise triangles") {
    std::vector<Vertex> v{{0, 0, true}, {1, 0, true}, {0, 1, true}};
    CHECK_THROWS_AS(Mesh(v, {Triangle{{0, 2, 1}, 0}}), MeshError);
}

TEST_CASE("mesh text round trip and parse errors") {
    const auto m = bisect_marked(build_initial_uniform(2), std::vector<Index>{1}).mesh;
    const auto r = read_mesh(write_mesh(m));
    REQUIRE(r.n_vertices() == m.n_vertices());
    REQUIRE(r.n_triangles() == m.n_triangles());
    for (Index i = 0; i < m.n_vertices(); ++i) {
        CHECK(r.vertices()[i].x == m.vertices()[i].x);
        CHECK(r.vertices()[i].y == m.vertices()[i].y);
        CHECK(r.vertices()[i].boundary == m.vertices()[i].boundary);
    }
    for (Index t = 0; t < m.n_triangles(); ++t) {
        CHECK(r.triangles()[t].v == m.triangles()[t].v);
        CHECK(r.triangles()[t].peak == m.triangles()[t].peak);
    }

    const std::string out_of_range = "atgmesh 1\n3 1\n0 0 1\n1 0 1\n0 1 1\n0 1 7 0\n";
    try {
        read_mesh(out_of_range);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 6);
    }
    const std::string clockwise = "atgmesh 1\n3 1\n0 0 1\n1 0 1\n0 1 1\n0 2 1 0\n";
    try {
        read_mesh(clockwise);
        FAIL("expected an orientation error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("orientation") != std::string::npos);
    }
    CHECK_THROWS_AS(read_mesh("atgmesh 2\n0 0\n"), ParseError);
    CHECK_THROWS_AS(read_mesh("# comment only\n"), ParseError);
}

TEST_CASE("random refinement keeps invariants and grows monotonically") {
    std::mt19937_64 rng(7);
    auto m = build_initial_uniform(3);
    const double area0 = total_area(m);
    std::set<std::array<long long, 3>> classes;
    double min_angle_early = 10.0, min_angle_late = 10.0;
    for (int step = 0; step < 40; ++step) {
        for (Index t = 0; t < m.n_triangles(); ++t) {
            const auto p = m.corners(t);
            std::array<double, 3> ang{};
            for (int i = 0; i < 3; ++i) {
                const Vec2 a = p[(i + 1) % 3] - p[i], b = p[(i + 2) % 3] - p[i];
                ang[i] = std::acos(dot(a, b) / (norm(a) * norm(b)));
            }
            std::sort(ang.begin(), ang.end());
            classes.insert({std::llround(ang[0] * 1e9), std::llround(ang[1] * 1e9), std::llround(ang[2] * 1e9)});
            (step <= 3 ? min_angle_early : min_angle_late) = std::min(step <= 3 ? min_angle_early : min_angle_late, ang[0]);
        }
        std::vector<Index> marked;
        std::uniform_int_distribution<Index> pick(0, static_cast<Index>(m.n_triangles() - 1));
        for (int i = 0; i < 3; ++i) marked.push_back(pick(rng));
        const auto b = bisect_marked(m, marked);
        CHECK(b.mesh.n_vertices() > m.n_vertices());
        CHECK(b.mesh.n_triangles() > m.n_triangles());
        CHECK(conformity_check(b.mesh).ok());
        CHECK(std::abs(total_area(b.mesh) - area0) <= 1e-12 * area0);
        m = b.mesh;
    }
    CHECK(classes.size() <= 8);
    CHECK(min_angle_late >= min_angle_early - 1e-9);
}
