#pragma once

#include <array>
#include <functional>
#include <memory>
#include <set>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "mesh.hpp"
#include "quadrature.hpp"

namespace urans
{

using Vector = Eigen::VectorXd;

struct Vec2
{
    double x = 0.0;
    double y = 0.0;
};

// ---------------------------------------------------------------------------
// Reference element

/// P1 and P2 Lagrange shape functions on the reference triangle.
/// P2 ordering: vertices 0,1,2 then midpoints of edges (0,1), (1,2), (2,0).
namespace reference
{

inline std::array<double, 3> p1_values(Point r)
{
    return {1.0 - r.x - r.y, r.x, r.y};
}

inline std::array<Point, 3> p1_gradients()
{
    return {Point{-1.0, -1.0}, Point{1.0, 0.0}, Point{0.0, 1.0}};
}

inline std::array<double, 6> p2_values(Point r)
{
    const double l0 = 1.0 - r.x - r.y, l1 = r.x, l2 = r.y;
    return {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
            4.0 * l0 * l1,         4.0 * l1 * l2,         4.0 * l2 * l0};
}

inline std::array<Point, 6> p2_gradients(Point r)
{
    const double x = r.x, y = r.y;
    return {Point{-3.0 + 4.0 * x + 4.0 * y, -3.0 + 4.0 * x + 4.0 * y},
            Point{-1.0 + 4.0 * x, 0.0},
            Point{0.0, -1.0 + 4.0 * y},
            Point{4.0 - 8.0 * x - 4.0 * y, -4.0 * x},
            Point{4.0 * y, 4.0 * x},
            Point{-4.0 * y, 4.0 - 4.0 * x - 8.0 * y}};
}

/// Shape data tabulated at the points of one quadrature rule.
struct Tables
{
    QuadratureRule rule;
    std::vector<std::array<double, 6>> p2;
    std::vector<std::array<Point, 6>> p2_grad;
    std::vector<std::array<double, 3>> p1;

    explicit Tables(int order) : rule(quadrature_rule(order))
    {
        for (const auto& r : rule.points)
        {
            p2.push_back(p2_values(r));
            p2_grad.push_back(p2_gradients(r));
            p1.push_back(p1_values(r));
        }
    }
};

inline const Tables& assembly_tables()
{
    static const Tables tables(assembly_quadrature_order);
    return tables;
}

} // namespace reference

/// Affine map from the reference triangle onto a mesh triangle.
struct AffineMap
{
    Point origin;
    double j00, j01, j10, j11; // columns are the edge vectors v1-v0, v2-v0
    double det;

    explicit AffineMap(const std::array<Point, 3>& c)
        : origin(c[0]), j00(c[1].x - c[0].x), j01(c[2].x - c[0].x), j10(c[1].y - c[0].y),
          j11(c[2].y - c[0].y), det(j00 * j11 - j01 * j10)
    {}

    Point map(Point r) const { return {origin.x + j00 * r.x + j01 * r.y, origin.y + j10 * r.x + j11 * r.y}; }

    /// Physical gradient from a reference gradient (J^{-T} g).
    Point grad(Point g) const
    {
        return {(j11 * g.x - j10 * g.y) / det, (-j01 * g.x + j00 * g.y) / det};
    }

    /// Reference coordinates of a physical point.
    Point inverse(Point p) const
    {
        const Point d = p - origin;
        return {(j11 * d.x - j01 * d.y) / det, (-j10 * d.x + j00 * d.y) / det};
    }
};

// ---------------------------------------------------------------------------
// Taylor-Hood space

/// P2 velocity / P1 pressure degrees of freedom over a mesh.
///
/// Velocity dofs are blocked by component: dof(node, c) = c * n_nodes + node
/// where nodes are the P2 nodes of the mesh (vertices, then edge midpoints).
/// Pressure dofs are the mesh vertices. Velocity dofs on edges carrying a
/// no-slip tag are Dirichlet dofs.
class FESpace
{
public:
    FESpace(std::shared_ptr<const Mesh> mesh, std::set<int> noslip_tags)
        : mesh_(std::move(mesh)), noslip_(std::move(noslip_tags))
    {
        if (!mesh_)
            throw std::invalid_argument("FESpace: null mesh");
        n_nodes_ = mesh_->num_p2_nodes();
        node_on_wall_.assign(n_nodes_, false);
        const std::size_t nv = mesh_->num_vertices();
        for (const auto& be : mesh_->boundary_edges())
        {
            if (!noslip_.contains(be.tag))
                continue;
            node_on_wall_[be.vertices[0]] = true;
            node_on_wall_[be.vertices[1]] = true;
            node_on_wall_[nv + mesh_->find_edge(be.vertices[0], be.vertices[1])] = true;
        }
        is_dirichlet_.assign(num_velocity_dofs(), false);
        for (std::size_t n = 0; n < n_nodes_; ++n)
            if (node_on_wall_[n])
                for (int c = 0; c < 2; ++c)
                {
                    const auto d = velocity_dof(n, c);
                    is_dirichlet_[d] = true;
                    dirichlet_.push_back(static_cast<int>(d));
                }
        std::sort(dirichlet_.begin(), dirichlet_.end());
    }

    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    const std::set<int>& noslip_tags() const { return noslip_; }

    std::size_t num_nodes() const { return n_nodes_; }
    std::size_t num_velocity_dofs() const { return 2 * n_nodes_; }
    std::size_t num_pressure_dofs() const { return mesh_->num_vertices(); }

    std::size_t velocity_dof(std::size_t node, int comp) const { return comp * n_nodes_ + node; }

    std::array<int, 6> p2_nodes(std::size_t t) const
    {
        const auto& tri = mesh_->triangles()[t];
        const auto& e = mesh_->triangle_edges(t);
        const int nv = static_cast<int>(mesh_->num_vertices());
        return {tri[0], tri[1], tri[2], nv + e[0], nv + e[1], nv + e[2]};
    }

    /// Local velocity dof i (0..11) of triangle t: component i/6, node i%6.
    std::array<int, 12> velocity_dofs(std::size_t t) const
    {
        const auto nodes = p2_nodes(t);
        std::array<int, 12> d{};
        for (int i = 0; i < 6; ++i)
        {
            d[i] = nodes[i];
            d[6 + i] = static_cast<int>(n_nodes_) + nodes[i];
        }
        return d;
    }

    Point node_point(std::size_t node) const { return mesh_->p2_node(node); }
    bool node_on_wall(std::size_t node) const { return node_on_wall_[node]; }

    const std::vector<int>& dirichlet_dofs() const { return dirichlet_; }
    bool is_dirichlet(std::size_t dof) const { return is_dirichlet_[dof]; }

    /// Nodal interpolant of a vector field.
    Vector interpolate(const std::function<Vec2(Point)>& f) const
    {
        Vector v(num_velocity_dofs());
        for (std::size_t n = 0; n < n_nodes_; ++n)
        {
            const Vec2 val = f(node_point(n));
            v[velocity_dof(n, 0)] = val.x;
            v[velocity_dof(n, 1)] = val.y;
        }
        return v;
    }

    /// Nodal interpolant of a scalar into the P2 node set.
    std::vector<double> interpolate_p2_scalar(const std::function<double(Point)>& f) const
    {
        std::vector<double> v(n_nodes_);
        for (std::size_t n = 0; n < n_nodes_; ++n)
            v[n] = f(node_point(n));
        return v;
    }

    Vector interpolate_pressure(const std::function<double(Point)>& f) const
    {
        Vector p(num_pressure_dofs());
        for (std::size_t i = 0; i < num_pressure_dofs(); ++i)
            p[i] = f(mesh_->vertices()[i]);
        return p;
    }

    /// Sets every Dirichlet dof of v to zero.
    void zero_dirichlet(Vector& v) const
    {
        for (int d : dirichlet_)
            v[d] = 0.0;
    }

private:
    std::shared_ptr<const Mesh> mesh_;
    std::set<int> noslip_;
    std::size_t n_nodes_ = 0;
    std::vector<bool> node_on_wall_;
    std::vector<bool> is_dirichlet_;
    std::vector<int> dirichlet_;
};

// ---------------------------------------------------------------------------
// Point location and evaluation

/// Bucket grid over triangle bounding boxes for locating points.
class PointLocator
{
public:
    explicit PointLocator(const Mesh& mesh) : mesh_(mesh)
    {
        lo_ = hi_ = mesh.vertices().front();
        for (const auto& p : mesh.vertices())
        {
            lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
            hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y)};
        }
        n_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(mesh.num_triangles()))));
        cells_.assign(n_ * n_, {});
        for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
        {
            const auto c = mesh.corners(t);
            Point blo = c[0], bhi = c[0];
            for (const auto& p : c)
            {
                blo = {std::min(blo.x, p.x), std::min(blo.y, p.y)};
                bhi = {std::max(bhi.x, p.x), std::max(bhi.y, p.y)};
            }
            const auto [i0, j0] = cell(blo);
            const auto [i1, j1] = cell(bhi);
            for (std::size_t j = j0; j <= j1; ++j)
                for (std::size_t i = i0; i <= i1; ++i)
                    cells_[j * n_ + i].push_back(static_cast<int>(t));
        }
    }

    struct Hit
    {
        std::size_t triangle;
        Point reference; // reference coordinates, possibly slightly outside
    };

    /// Triangle containing p; if none does (p outside the polygonal
    /// domain), the candidate with the least barycentric violation.
    Hit locate(Point p) const
    {
        const auto [ci, cj] = cell(p);
        Hit best{0, {}};
        double best_violation = std::numeric_limits<double>::infinity();
        for (int ring = 0; ring <= static_cast<int>(n_); ++ring)
        {
            for (int dj = -ring; dj <= ring; ++dj)
                for (int di = -ring; di <= ring; ++di)
                {
                    if (std::max(std::abs(di), std::abs(dj)) != ring)
                        continue;
                    const long i = static_cast<long>(ci) + di, j = static_cast<long>(cj) + dj;
                    if (i < 0 || j < 0 || i >= static_cast<long>(n_) || j >= static_cast<long>(n_))
                        continue;
                    for (int t : cells_[j * n_ + i])
                    {
                        const AffineMap map(mesh_.corners(t));
                        const Point r = map.inverse(p);
                        const double v = std::max({0.0, -r.x, -r.y, r.x + r.y - 1.0});
                        if (v < best_violation)
                        {
                            best_violation = v;
                            best = {static_cast<std::size_t>(t), r};
                        }
                    }
                }
            if (best_violation <= 1e-12)
                break;
            if (ring >= 1 && best_violation < std::numeric_limits<double>::infinity())
                break;
        }
        return best;
    }

private:
    std::pair<std::size_t, std::size_t> cell(Point p) const
    {
        auto idx = [this](double v, double lo, double hi) {
            const double s = hi > lo ? (v - lo) / (hi - lo) : 0.0;
            const long k = static_cast<long>(s * static_cast<double>(n_));
            return static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(n_) - 1));
        };
        return {idx(p.x, lo_.x, hi_.x), idx(p.y, lo_.y, hi_.y)};
    }

    const Mesh& mesh_;
    Point lo_, hi_;
    std::size_t n_ = 1;
    std::vector<std::vector<int>> cells_;
};

/// Value of a velocity field at an arbitrary point.
inline Vec2 evaluate_velocity(const FESpace& space, const PointLocator& locator, const Vector& v, Point p)
{
    const auto hit = locator.locate(p);
    const auto phi = reference::p2_values(hit.reference);
    const auto nodes = space.p2_nodes(hit.triangle);
    Vec2 out;
    for (int i = 0; i < 6; ++i)
    {
        out.x += phi[i] * v[space.velocity_dof(nodes[i], 0)];
        out.y += phi[i] * v[space.velocity_dof(nodes[i], 1)];
    }
    return out;
}

/// Lagrange interpolation of a velocity field from one space into another
/// (which may live on an unrelated mesh). Dirichlet dofs of the target are
/// set to zero.
inline Vector transfer_velocity(const FESpace& from, const Vector& v, const FESpace& to)
{
    const PointLocator locator(from.mesh());
    Vector out = to.interpolate([&](Point p) { return evaluate_velocity(from, locator, v, p); });
    to.zero_dirichlet(out);
    return out;
}

} // namespace urans
