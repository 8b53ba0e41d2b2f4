#pragma once

#include "atg/geometry.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace atg {

using Index = std::uint32_t;
inline constexpr Index kNone = std::numeric_limits<Index>::max();

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct Vertex {
    double x = 0.0;
    double y = 0.0;
    bool boundary = false;

    Vec2 pos() const { return {x, y}; }
};

/// Triangle with counter-clockwise vertices. The refinement edge is the edge
/// opposite `peak`.
struct Triangle {
    std::array<Index, 3> v{};
    int peak = 0;
    // Ancestor on the previous level (itself when untouched by the last bisection).
    Index parent = kNone;
    // Number of bisections separating this triangle from the initial mesh.
    int level = 0;

    std::array<Index, 2> refinement_edge() const {
        return {v[(peak + 1) % 3], v[(peak + 2) % 3]};
    }
};

/// Edges store endpoints in ascending order. Boundary edges have one adjacent
/// triangle (adjacent[1] == kNone).
struct Edge {
    std::array<Index, 2> v{};
    std::array<Index, 2> adjacent{kNone, kNone};
    bool boundary = false;

    int n_adjacent() const { return adjacent[1] == kNone ? 1 : 2; }
};

/// Immutable conforming triangulation. Construction validates indices and
/// orientation and derives the edge list.
class Mesh {
public:
    Mesh(std::vector<Vertex> vertices, std::vector<Triangle> triangles, int level_id = 0,
         std::optional<double> domain_area = std::nullopt);

    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<Edge>& edges() const { return edges_; }

    std::size_t n_vertices() const { return vertices_.size(); }
    std::size_t n_triangles() const { return triangles_.size(); }
    std::size_t n_edges() const { return edges_.size(); }
    std::size_t n_interior_edges() const;
    std::size_t n_interior_vertices() const;

    int level_id() const { return level_id_; }
    /// Area of the domain this mesh is supposed to cover.
    double domain_area() const { return domain_area_; }

    /// Edge id of local edge i of triangle t (the edge opposite vertex i).
    Index triangle_edge(Index t, int i) const { return tri_edges_[3 * t + i]; }
    std::optional<Index> find_edge(Index a, Index b) const;

    std::array<Vec2, 3> corners(Index t) const;
    double area(Index t) const;
    double edge_length(Index e) const;

private:
    std::vector<Vertex> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Edge> edges_;
    std::vector<Index> tri_edges_;
    std::unordered_map<std::uint64_t, Index> edge_lookup_;
    int level_id_ = 0;
    double domain_area_ = 0.0;
};

/// One bisection: `parent` split across its refinement edge into `children`.
/// Triangles produced and split again within the same call appear as
/// intermediate parents/children; their ids are kNone.
struct RefinementRecord {
    Triangle parent;
    std::array<Triangle, 2> children;
    Index parent_id = kNone;                   // id on the input mesh, if any
    std::array<Index, 2> child_ids{kNone, kNone};  // ids on the output mesh, if final
    Index ancestor = kNone;                    // input-mesh triangle containing parent
    Index new_vertex = kNone;
    std::array<Index, 2> source_endpoints{};
};

struct Bisection {
    Mesh mesh;
    std::vector<RefinementRecord> records;
};

Mesh build_initial_uniform(int n);

/// Newest-vertex bisection of every marked triangle plus the closure needed for
/// conformity. Vertex ids of the input mesh are preserved.
Bisection bisect_marked(const Mesh& mesh, std::span<const Index> marked);

struct MeshSizes {
    std::vector<double> triangle;  // H_K = |K|^{1/2}
    std::vector<double> edge;      // H_E = |E|
};

MeshSizes sizes(const Mesh& mesh);

struct ConformityIssue {
    enum class Kind { HangingNode, Orientation, BadPeak, AreaMismatch, BoundaryFlag };
    Kind kind;
    Index index;  // edge, triangle or vertex id depending on kind
    std::string message;
};

struct ConformityReport {
    std::vector<ConformityIssue> issues;

    bool ok() const { return issues.empty(); }
};

ConformityReport conformity_check(const Mesh& mesh);

std::string write_mesh(const Mesh& mesh);
Mesh read_mesh(std::string_view text);

}  // namespace atg
