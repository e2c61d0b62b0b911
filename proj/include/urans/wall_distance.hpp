#pragma once

#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "fe_space.hpp"

namespace urans
{

/// Distance to the nearest no-slip wall, stored at the P2 nodes and
/// evaluated elsewhere through the P2 basis.
class WallDistanceField
{
public:
    WallDistanceField() = default;
    explicit WallDistanceField(std::vector<double> nodal) : nodal_(std::move(nodal)) {}

    const std::vector<double>& nodal() const { return nodal_; }
    double at_node(std::size_t n) const { return nodal_[n]; }
    std::size_t size() const { return nodal_.size(); }

    /// Value at quadrature point q of the assembly rule in triangle t.
    double at_quadrature(const FESpace& space, std::size_t t, std::size_t q) const
    {
        const auto& phi = reference::assembly_tables().p2[q];
        const auto nodes = space.p2_nodes(t);
        double y = 0.0;
        for (int i = 0; i < 6; ++i)
            y += phi[i] * nodal_[nodes[i]];
        return y;
    }

private:
    std::vector<double> nodal_;
};

using DistanceFunction = std::function<double(Point)>;

/// Wall distance at every P2 node of the mesh.
///
/// By default this is the exact distance to the union of boundary
/// segments tagged with one of `noslip_tags`. When `analytic` is given it
/// replaces the polygonal distance (e.g. for curved walls). Nodes on a
/// tagged edge are always 0.
inline WallDistanceField compute_wall_distance(const Mesh& mesh, const std::set<int>& noslip_tags,
                                               const std::optional<DistanceFunction>& analytic = std::nullopt)
{
    std::vector<std::array<Point, 2>> walls;
    for (const auto& be : mesh.boundary_edges())
        if (noslip_tags.contains(be.tag))
            walls.push_back({mesh.vertices()[be.vertices[0]], mesh.vertices()[be.vertices[1]]});
    if (walls.empty())
        throw std::invalid_argument("compute_wall_distance: no boundary edge carries a no-slip tag");

    const std::size_t nv = mesh.num_vertices();
    std::vector<bool> on_wall(mesh.num_p2_nodes(), false);
    for (const auto& be : mesh.boundary_edges())
        if (noslip_tags.contains(be.tag))
        {
            on_wall[be.vertices[0]] = on_wall[be.vertices[1]] = true;
            on_wall[nv + mesh.find_edge(be.vertices[0], be.vertices[1])] = true;
        }

    std::vector<double> d(mesh.num_p2_nodes());
    for (std::size_t n = 0; n < d.size(); ++n)
    {
        if (on_wall[n])
        {
            d[n] = 0.0;
            continue;
        }
        const Point p = mesh.p2_node(n);
        if (analytic)
        {
            d[n] = std::max(0.0, (*analytic)(p));
            continue;
        }
        double best = std::numeric_limits<double>::infinity();
        for (const auto& w : walls)
            best = std::min(best, point_segment_distance(p, w[0], w[1]));
        d[n] = best;
    }
    return WallDistanceField(std::move(d));
}

inline WallDistanceField compute_wall_distance(const FESpace& space,
                                               const std::optional<DistanceFunction>& analytic = std::nullopt)
{
    return compute_wall_distance(space.mesh(), space.noslip_tags(), analytic);
}

/// Geometry of the offset-circles domain: unit disk minus a disk of
/// radius 0.1 centred at (0.5, 0).
struct OffsetCircles
{
    double outer_radius = 1.0;
    double inner_radius = 0.1;
    Point inner_centre{0.5, 0.0};

    double area() const
    {
        return std::numbers::pi * (outer_radius * outer_radius - inner_radius * inner_radius);
    }

    /// Distance to the nearer of the two circles.
    double wall_distance(Point p) const
    {
        return std::min(outer_radius - norm(p), distance(p, inner_centre) - inner_radius);
    }

    DistanceFunction distance_function() const
    {
        return [g = *this](Point p) { return g.wall_distance(p); };
    }
};

} // namespace urans
