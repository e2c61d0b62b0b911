#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace urans
{

struct Point
{
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend bool operator==(const Point&, const Point&) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Euclidean distance from p to the closed segment [a, b].
inline double point_segment_distance(Point p, Point a, Point b)
{
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0)
        return distance(p, a);
    const double s = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + s * ab);
}

using Triangle = std::array<int, 3>;

struct BoundaryEdge
{
    std::array<int, 2> vertices;
    int tag = 0;
};

class MeshError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Conforming triangulation of a planar domain.
///
/// Triangles are stored counterclockwise. Edges are enumerated on
/// construction; local edge e of a triangle joins local vertices e and
/// (e+1)%3, which is the ordering the P2 midpoint nodes follow.
class Mesh
{
public:
    Mesh() = default;

    /// Builds a mesh, reorienting clockwise triangles. Throws MeshError on
    /// degenerate triangles or inconsistent boundary data.
    Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles,
         std::vector<BoundaryEdge> boundary)
        : vertices_(std::move(vertices)), triangles_(std::move(triangles)),
          boundary_(std::move(boundary))
    {
        finalize();
    }

    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
    const std::vector<std::array<int, 2>>& edges() const { return edges_; }

    /// Global edge index of local edge e (joining local vertices e, e+1).
    const std::array<int, 3>& triangle_edges(std::size_t t) const { return tri_edges_[t]; }

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_triangles() const { return triangles_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    double h_max() const { return h_max_; }
    double h_min() const { return h_min_; }
    /// Smallest over largest triangle diameter; recorded, not enforced.
    double quasi_uniformity() const { return h_max_ > 0.0 ? h_min_ / h_max_ : 0.0; }
    double domain_area() const { return area_; }

    std::array<Point, 3> corners(std::size_t t) const
    {
        const auto& tri = triangles_[t];
        return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
    }

    double triangle_area(std::size_t t) const
    {
        const auto c = corners(t);
        return 0.5 * cross(c[1] - c[0], c[2] - c[0]);
    }

    /// Index of the edge joining a and b, or -1.
    int find_edge(int a, int b) const
    {
        auto it = edge_index_.find(edge_key(a, b));
        return it == edge_index_.end() ? -1 : it->second;
    }

    /// Coordinates of P2 node i: vertices first, then edge midpoints.
    Point p2_node(std::size_t i) const
    {
        if (i < vertices_.size())
            return vertices_[i];
        const auto& e = edges_[i - vertices_.size()];
        return 0.5 * (vertices_[e[0]] + vertices_[e[1]]);
    }

    std::size_t num_p2_nodes() const { return vertices_.size() + edges_.size(); }

    std::set<int> boundary_tags() const
    {
        std::set<int> tags;
        for (const auto& be : boundary_)
            tags.insert(be.tag);
        return tags;
    }

private:
    static std::uint64_t edge_key(int a, int b)
    {
        if (a > b)
            std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    }

    void finalize()
    {
        if (triangles_.empty())
            throw MeshError("mesh has no triangles");

        const int nv = static_cast<int>(vertices_.size());
        for (auto& tri : triangles_)
        {
            for (int v : tri)
                if (v < 0 || v >= nv)
                    throw MeshError("triangle references unknown vertex " + std::to_string(v));
            const Point a = vertices_[tri[0]], b = vertices_[tri[1]], c = vertices_[tri[2]];
            const double s = cross(b - a, c - a);
            if (s < 0.0)
                std::swap(tri[1], tri[2]);
            else if (s == 0.0)
                throw MeshError("degenerate triangle");
        }

        std::vector<int> edge_tri_count;
        tri_edges_.resize(triangles_.size());
        area_ = 0.0;
        h_max_ = 0.0;
        h_min_ = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < triangles_.size(); ++t)
        {
            const auto& tri = triangles_[t];
            double diam = 0.0;
            for (int e = 0; e < 3; ++e)
            {
                const int a = tri[e], b = tri[(e + 1) % 3];
                diam = std::max(diam, distance(vertices_[a], vertices_[b]));
                auto [it, fresh] = edge_index_.try_emplace(edge_key(a, b), static_cast<int>(edges_.size()));
                if (fresh)
                {
                    edges_.push_back({std::min(a, b), std::max(a, b)});
                    edge_tri_count.push_back(0);
                }
                tri_edges_[t][e] = it->second;
                ++edge_tri_count[it->second];
            }
            area_ += triangle_area(t);
            h_max_ = std::max(h_max_, diam);
            h_min_ = std::min(h_min_, diam);
        }

        std::map<int, int> degree;
        for (const auto& be : boundary_)
        {
            const int e = find_edge(be.vertices[0], be.vertices[1]);
            if (e < 0)
                throw MeshError("boundary edge (" + std::to_string(be.vertices[0]) + ", "
                                + std::to_string(be.vertices[1]) + ") is not a mesh edge");
            if (edge_tri_count[e] != 1)
                throw MeshError("boundary edge is shared by " + std::to_string(edge_tri_count[e])
                                + " triangles");
            ++degree[be.vertices[0]];
            ++degree[be.vertices[1]];
        }
        for (auto [v, d] : degree)
            if (d % 2 != 0)
                throw MeshError("boundary edges do not form closed loops at vertex " + std::to_string(v));
    }

    std::vector<Point> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<BoundaryEdge> boundary_;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::array<int, 3>> tri_edges_;
    std::map<std::uint64_t, int> edge_index_;
    double h_max_ = 0.0;
    double h_min_ = 0.0;
    double area_ = 0.0;
};

/// Unit square cut into n*n cells, each split along its (0,0)-(1,1)
/// diagonal. Every boundary edge carries tag 1.
inline Mesh build_structured_square(int n)
{
    if (n < 1)
        throw std::invalid_argument("build_structured_square: n must be >= 1");
    const int m = n + 1;
    auto id = [m](int i, int j) { return j * m + i; };

    std::vector<Point> verts;
    verts.reserve(static_cast<std::size_t>(m) * m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i)
            verts.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});

    std::vector<Triangle> tris;
    tris.reserve(2 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
        {
            tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }

    std::vector<BoundaryEdge> bnd;
    for (int i = 0; i < n; ++i)
    {
        bnd.push_back({{id(i, 0), id(i + 1, 0)}, 1});
        bnd.push_back({{id(n, i), id(n, i + 1)}, 1});
        bnd.push_back({{id(i + 1, n), id(i, n)}, 1});
        bnd.push_back({{id(0, i + 1), id(0, i)}, 1});
    }
    return Mesh(std::move(verts), std::move(tris), std::move(bnd));
}

} // namespace urans
