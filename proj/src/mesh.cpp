#include "atg/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

namespace atg {

namespace {

std::uint64_t edge_key(Index a, Index b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

Mesh::Mesh(std::vector<Vertex> vertices, std::vector<Triangle> triangles, int level_id,
           std::optional<double> domain_area)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), level_id_(level_id) {
    const auto nv = vertices_.size();
    tri_edges_.resize(3 * triangles_.size());
    edge_lookup_.reserve(2 * triangles_.size() + vertices_.size());
    edges_.reserve(2 * triangles_.size() + vertices_.size());

    double total = 0.0;
    for (Index t = 0; t < triangles_.size(); ++t) {
        const auto& tri = triangles_[t];
        for (auto vi : tri.v) {
            if (vi >= nv) {
                throw MeshError("triangle " + std::to_string(t) + " references vertex " +
                                std::to_string(vi) + " out of range");
            }
        }
        if (tri.v[0] == tri.v[1] || tri.v[1] == tri.v[2] || tri.v[0] == tri.v[2]) {
            throw MeshError("triangle " + std::to_string(t) + " repeats a vertex");
        }
        if (tri.peak < 0 || tri.peak > 2) {
            throw MeshError("triangle " + std::to_string(t) + " has peak outside {0,1,2}");
        }
        const double a2 = signed_area2(vertices_[tri.v[0]].pos(), vertices_[tri.v[1]].pos(),
                                       vertices_[tri.v[2]].pos());
        if (!(a2 > 0.0)) {
            throw MeshError("triangle " + std::to_string(t) +
                            " is not counter-clockwise (signed area " + std::to_string(0.5 * a2) +
                            ")");
        }
        total += 0.5 * a2;

        for (int i = 0; i < 3; ++i) {
            const Index a = tri.v[(i + 1) % 3];
            const Index b = tri.v[(i + 2) % 3];
            const auto key = edge_key(a, b);
            auto [it, inserted] = edge_lookup_.try_emplace(key, static_cast<Index>(edges_.size()));
            if (inserted) {
                Edge e;
                e.v = {std::min(a, b), std::max(a, b)};
                e.adjacent = {t, kNone};
                edges_.push_back(e);
            } else {
                auto& e = edges_[it->second];
                if (e.adjacent[1] != kNone) {
                    throw MeshError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                    ") is shared by more than two triangles");
                }
                e.adjacent[1] = t;
            }
            tri_edges_[3 * t + i] = it->second;
        }
    }
    for (auto& e : edges_) e.boundary = e.adjacent[1] == kNone;
    domain_area_ = domain_area.value_or(total);
}

std::size_t Mesh::n_interior_edges() const {
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return !e.boundary; }));
}

std::size_t Mesh::n_interior_vertices() const {
    return static_cast<std::size_t>(std::count_if(
        vertices_.begin(), vertices_.end(), [](const Vertex& v) { return !v.boundary; }));
}

std::optional<Index> Mesh::find_edge(Index a, Index b) const {
    auto it = edge_lookup_.find(edge_key(a, b));
    if (it == edge_lookup_.end()) return std::nullopt;
    return it->second;
}

std::array<Vec2, 3> Mesh::corners(Index t) const {
    const auto& tri = triangles_[t];
    return {vertices_[tri.v[0]].pos(), vertices_[tri.v[1]].pos(), vertices_[tri.v[2]].pos()};
}

double Mesh::area(Index t) const {
    const auto p = corners(t);
    return 0.5 * signed_area2(p[0], p[1], p[2]);
}

double Mesh::edge_length(Index e) const {
    const auto& ed = edges_[e];
    return norm(vertices_[ed.v[1]].pos() - vertices_[ed.v[0]].pos());
}

Mesh build_initial_uniform(int n) {
    if (n < 1) throw std::invalid_argument("build_initial_uniform: n must be >= 1");
    const auto side = static_cast<Index>(n) + 1;
    std::vector<Vertex> vertices;
    vertices.reserve(side * side);
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            const bool b = i == 0 || j == 0 || i == n || j == n;
            vertices.push_back({-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n, b});
        }
    }
    std::vector<Triangle> triangles;
    triangles.reserve(2 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const Index p00 = j * side + i;
            const Index p10 = p00 + 1;
            const Index p01 = p00 + side;
            const Index p11 = p01 + 1;
            // Hypotenuse p00-p11 is the refinement edge of both halves.
            triangles.push_back({{p00, p10, p11}, 1, kNone, 0});
            triangles.push_back({{p00, p11, p01}, 2, kNone, 0});
        }
    }
    return Mesh(std::move(vertices), std::move(triangles), 0, 4.0);
}

Bisection bisect_marked(const Mesh& mesh, std::span<const Index> marked) {
    const auto& tris = mesh.triangles();
    const auto& edges = mesh.edges();

    auto refinement_edge_id = [&](Index t) { return mesh.triangle_edge(t, tris[t].peak); };

    std::vector<char> edge_marked(edges.size(), 0);
    std::deque<Index> queue;
    for (Index t : marked) {
        if (t >= tris.size()) {
            throw MeshError("bisect_marked: triangle id " + std::to_string(t) + " out of range");
        }
        const Index e = refinement_edge_id(t);
        if (!edge_marked[e]) {
            edge_marked[e] = 1;
            queue.push_back(e);
        }
    }
    // Closure: a triangle with any marked edge must have its refinement edge marked.
    while (!queue.empty()) {
        const Index e = queue.front();
        queue.pop_front();
        for (Index t : edges[e].adjacent) {
            if (t == kNone) continue;
            const Index r = refinement_edge_id(t);
            if (!edge_marked[r]) {
                edge_marked[r] = 1;
                queue.push_back(r);
            }
        }
    }

    std::vector<Vertex> vertices = mesh.vertices();
    std::vector<Index> midpoint(edges.size(), kNone);
    for (Index e = 0; e < edges.size(); ++e) {
        if (!edge_marked[e]) continue;
        const auto& a = vertices[edges[e].v[0]];
        const auto& b = vertices[edges[e].v[1]];
        midpoint[e] = static_cast<Index>(vertices.size());
        vertices.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y), edges[e].boundary});
    }

    std::vector<Triangle> out;
    out.reserve(tris.size() + 2 * queue.size());
    std::vector<RefinementRecord> records;

    auto split_midpoint = [&](const Triangle& tri) -> Index {
        const auto re = tri.refinement_edge();
        const auto e = mesh.find_edge(re[0], re[1]);
        if (!e || !edge_marked[*e]) return kNone;
        return midpoint[*e];
    };

    // Emits `tri` (or its descendants) and returns its output id when it is final.
    auto emit = [&](auto&& self, const Triangle& tri, Index input_id, Index ancestor) -> Index {
        const Index m = split_midpoint(tri);
        if (m == kNone) {
            out.push_back(tri);
            out.back().parent = ancestor;
            return static_cast<Index>(out.size() - 1);
        }
        const Index apex = tri.v[tri.peak];
        const auto re = tri.refinement_edge();
        Triangle c1{{apex, re[0], m}, 2, ancestor, tri.level + 1};
        Triangle c2{{apex, m, re[1]}, 1, ancestor, tri.level + 1};
        const auto slot = records.size();
        records.push_back({});
        const Index id1 = self(self, c1, kNone, ancestor);
        const Index id2 = self(self, c2, kNone, ancestor);
        auto& rec = records[slot];
        rec.parent = tri;
        rec.children = {c1, c2};
        rec.parent_id = input_id;
        rec.child_ids = {id1, id2};
        rec.ancestor = ancestor;
        rec.new_vertex = m;
        rec.source_endpoints = re;
        return kNone;
    };

    for (Index t = 0; t < tris.size(); ++t) emit(emit, tris[t], t, t);

    return {Mesh(std::move(vertices), std::move(out), mesh.level_id() + 1, mesh.domain_area()),
            std::move(records)};
}

MeshSizes sizes(const Mesh& mesh) {
    MeshSizes s;
    s.triangle.resize(mesh.n_triangles());
    s.edge.resize(mesh.n_edges());
    for (Index t = 0; t < mesh.n_triangles(); ++t) s.triangle[t] = std::sqrt(mesh.area(t));
    for (Index e = 0; e < mesh.n_edges(); ++e) s.edge[e] = mesh.edge_length(e);
    return s;
}

ConformityReport conformity_check(const Mesh& mesh) {
    ConformityReport report;
    using Kind = ConformityIssue::Kind;
    const auto& verts = mesh.vertices();

    double total = 0.0;
    for (Index t = 0; t < mesh.n_triangles(); ++t) {
        const double a = mesh.area(t);
        total += a;
        if (!(a > 0.0)) {
            report.issues.push_back({Kind::Orientation, t, "triangle " + std::to_string(t) +
                                                               " has non-positive signed area"});
        }
        const int p = mesh.triangles()[t].peak;
        if (p < 0 || p > 2) {
            report.issues.push_back(
                {Kind::BadPeak, t, "triangle " + std::to_string(t) + " has invalid peak"});
        }
    }

    std::map<std::pair<double, double>, Index> by_position;
    for (Index v = 0; v < verts.size(); ++v) by_position.emplace(std::pair{verts[v].x, verts[v].y}, v);

    std::vector<char> on_boundary_edge(verts.size(), 0);
    for (Index e = 0; e < mesh.n_edges(); ++e) {
        const auto& ed = mesh.edges()[e];
        if (!ed.boundary) continue;
        on_boundary_edge[ed.v[0]] = on_boundary_edge[ed.v[1]] = 1;
        const auto& a = verts[ed.v[0]];
        const auto& b = verts[ed.v[1]];
        const auto mid = by_position.find({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
        if (mid != by_position.end()) {
            report.issues.push_back({Kind::HangingNode, e,
                                     "edge " + std::to_string(e) + " (" + std::to_string(ed.v[0]) +
                                         "," + std::to_string(ed.v[1]) + ") has hanging node " +
                                         std::to_string(mid->second) + " at its midpoint"});
        } else if (!a.boundary || !b.boundary) {
            report.issues.push_back({Kind::HangingNode, e,
                                     "edge " + std::to_string(e) + " (" + std::to_string(ed.v[0]) +
                                         "," + std::to_string(ed.v[1]) +
                                         ") has one neighbour but an interior endpoint"});
        }
    }
    for (Index v = 0; v < verts.size(); ++v) {
        if (verts[v].boundary && !on_boundary_edge[v]) {
            report.issues.push_back({Kind::BoundaryFlag, v,
                                     "vertex " + std::to_string(v) +
                                         " is flagged boundary but lies on no boundary edge"});
        }
    }

    const double expected = mesh.domain_area();
    if (std::abs(total - expected) > 1e-12 * std::abs(expected)) {
        std::ostringstream os;
        os.precision(17);
        os << "triangle areas sum to " << total << ", expected " << expected;
        report.issues.push_back({Kind::AreaMismatch, kNone, os.str()});
    }
    return report;
}

std::string write_mesh(const Mesh& mesh) {
    std::ostringstream os;
    os.precision(17);
    os << "atgmesh 1\n" << mesh.n_vertices() << ' ' << mesh.n_triangles() << '\n';
    for (const auto& v : mesh.vertices()) os << v.x << ' ' << v.y << ' ' << (v.boundary ? 1 : 0) << '\n';
    for (const auto& t : mesh.triangles()) {
        os << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << t.peak << '\n';
    }
    return os.str();
}

namespace {

struct LineReader {
    std::string_view text;
    std::size_t pos = 0;
    std::size_t line_no = 0;

    // Next non-empty line with comments stripped; nullopt at end of input.
    std::optional<std::string_view> next() {
        while (pos < text.size()) {
            auto end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            auto line = text.substr(pos, end - pos);
            pos = end + 1;
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string_view::npos) continue;
            const auto last = line.find_last_not_of(" \t\r");
            return line.substr(first, last - first + 1);
        }
        return std::nullopt;
    }
};

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream is{std::string(line)};
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

template <typename T>
T parse_number(const std::string& tok, std::size_t line, const char* what) {
    T value{};
    if constexpr (std::is_floating_point_v<T>) {
        try {
            std::size_t used = 0;
            value = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ParseError(line, std::string("malformed ") + what + " '" + tok + "'");
        }
    } else {
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
            throw ParseError(line, std::string("malformed ") + what + " '" + tok + "'");
        }
    }
    return value;
}

}  // namespace

Mesh read_mesh(std::string_view text) {
    LineReader reader{text};
    auto header = reader.next();
    if (!header || split_fields(*header) != std::vector<std::string>{"atgmesh", "1"}) {
        throw ParseError(reader.line_no, "expected header 'atgmesh 1'");
    }
    auto counts_line = reader.next();
    if (!counts_line) throw ParseError(reader.line_no, "missing vertex/triangle counts");
    const auto counts = split_fields(*counts_line);
    if (counts.size() != 2) throw ParseError(reader.line_no, "expected '<nv> <nt>'");
    const auto nv = parse_number<std::size_t>(counts[0], reader.line_no, "vertex count");
    const auto nt = parse_number<std::size_t>(counts[1], reader.line_no, "triangle count");

    std::vector<Vertex> vertices;
    vertices.reserve(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        auto line = reader.next();
        if (!line) throw ParseError(reader.line_no, "unexpected end of input in vertex block");
        const auto f = split_fields(*line);
        if (f.size() != 3) throw ParseError(reader.line_no, "expected '<x> <y> <bflag>'");
        const auto flag = parse_number<int>(f[2], reader.line_no, "boundary flag");
        if (flag != 0 && flag != 1) throw ParseError(reader.line_no, "boundary flag must be 0 or 1");
        vertices.push_back({parse_number<double>(f[0], reader.line_no, "coordinate"),
                            parse_number<double>(f[1], reader.line_no, "coordinate"), flag == 1});
    }

    std::vector<Triangle> triangles;
    triangles.reserve(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        auto line = reader.next();
        if (!line) throw ParseError(reader.line_no, "unexpected end of input in triangle block");
        const auto f = split_fields(*line);
        if (f.size() != 4) throw ParseError(reader.line_no, "expected '<v0> <v1> <v2> <peak>'");
        Triangle t;
        for (int k = 0; k < 3; ++k) {
            const auto idx = parse_number<std::uint64_t>(f[k], reader.line_no, "vertex index");
            if (idx >= nv) {
                throw ParseError(reader.line_no, "vertex index " + f[k] + " out of range");
            }
            t.v[k] = static_cast<Index>(idx);
        }
        t.peak = parse_number<int>(f[3], reader.line_no, "peak");
        if (t.peak < 0 || t.peak > 2) throw ParseError(reader.line_no, "peak must be 0, 1 or 2");
        const double a2 = signed_area2(vertices[t.v[0]].pos(), vertices[t.v[1]].pos(),
                                       vertices[t.v[2]].pos());
        if (!(a2 > 0.0)) {
            throw ParseError(reader.line_no, "orientation error: triangle is not counter-clockwise");
        }
        triangles.push_back(t);
    }
    if (reader.next()) throw ParseError(reader.line_no, "trailing data after triangle block");
    try {
        return Mesh(std::move(vertices), std::move(triangles));
    } catch (const MeshError& e) {
        throw ParseError(reader.line_no, e.what());
    }
}

}  // namespace atg
