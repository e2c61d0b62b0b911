#pragma once

#include <array>
#include <functional>
#include <optional>

#include "assembly.hpp"

namespace urans
{

struct NormSet
{
    double l2 = 0.0;          // ||u_h||
    double h1_seminorm = 0.0; // ||grad u_h||
    double dissipation = 0.0; // integral of w |grad u_h|^2
};

namespace norms_detail
{

/// Calls visit(t, q, x, weight, u(x), grad u(x)) at every quadrature point.
/// grad is row-major: {du_x/dx, du_x/dy, du_y/dx, du_y/dy}.
template <class Visit>
void for_each_point(const FESpace& space, const Vector& u, Visit&& visit)
{
    const auto& tab = reference::assembly_tables();
    const auto& mesh = space.mesh();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        const AffineMap map(mesh.corners(t));
        const auto d = space.velocity_dofs(t);
        for (std::size_t q = 0; q < tab.rule.size(); ++q)
        {
            const double w = tab.rule.weights[q] * map.det;
            Vec2 val;
            std::array<double, 4> grad{};
            for (int k = 0; k < 6; ++k)
            {
                const Point g = map.grad(tab.p2_grad[q][k]);
                const double a = u[d[k]], b = u[d[6 + k]];
                val.x += tab.p2[q][k] * a;
                val.y += tab.p2[q][k] * b;
                grad[0] += g.x * a;
                grad[1] += g.y * a;
                grad[2] += g.x * b;
                grad[3] += g.y * b;
            }
            visit(t, q, map.map(tab.rule.points[q]), w, val, grad);
        }
    }
}

} // namespace norms_detail

inline double l2_norm_squared(const FESpace& space, const Vector& u)
{
    double s = 0.0;
    norms_detail::for_each_point(space, u, [&](auto, auto, Point, double w, Vec2 v, const auto&) {
        s += w * (v.x * v.x + v.y * v.y);
    });
    return s;
}

inline double h1_seminorm_squared(const FESpace& space, const Vector& u)
{
    double s = 0.0;
    norms_detail::for_each_point(space, u, [&](auto, auto, Point, double w, Vec2, const auto& g) {
        s += w * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
    });
    return s;
}

/// Integral of weight(x) |grad u_h|^2 (or 2 weight |sym grad u_h|^2).
inline double weighted_dissipation(const FESpace& space, const Vector& u, const CoefficientField& weight,
                                   ViscousForm form = ViscousForm::full_gradient)
{
    double s = 0.0;
    norms_detail::for_each_point(space, u, [&](std::size_t t, std::size_t q, Point x, double w, Vec2, const auto& g) {
        double gg;
        if (form == ViscousForm::full_gradient)
            gg = g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3];
        else
        {
            const double off = 0.5 * (g[1] + g[2]);
            gg = 2.0 * (g[0] * g[0] + g[3] * g[3] + 2.0 * off * off);
        }
        s += w * weight(t, q, x) * gg;
    });
    return s;
}

/// L2 norm, H1 seminorm and (optionally weighted) dissipation of u_h.
inline NormSet norms(const FESpace& space, const Vector& u,
                     const std::optional<CoefficientField>& weight = std::nullopt)
{
    NormSet n;
    n.l2 = std::sqrt(l2_norm_squared(space, u));
    const double h1sq = h1_seminorm_squared(space, u);
    n.h1_seminorm = std::sqrt(h1sq);
    n.dissipation = weight ? weighted_dissipation(space, u, *weight) : h1sq;
    return n;
}

using VelocityFunction = std::function<Vec2(Point)>;
using GradientFunction = std::function<std::array<double, 4>(Point)>;

/// ||u - u_h||^2 against a closed-form field.
inline double l2_error_squared(const FESpace& space, const Vector& u, const VelocityFunction& exact)
{
    double s = 0.0;
    norms_detail::for_each_point(space, u, [&](auto, auto, Point x, double w, Vec2 v, const auto&) {
        const Vec2 e = exact(x);
        s += w * ((v.x - e.x) * (v.x - e.x) + (v.y - e.y) * (v.y - e.y));
    });
    return s;
}

/// ||grad u - grad u_h||^2 against a closed-form gradient (row-major).
inline double h1_error_squared(const FESpace& space, const Vector& u, const GradientFunction& exact_grad)
{
    double s = 0.0;
    norms_detail::for_each_point(space, u, [&](auto, auto, Point x, double w, Vec2, const auto& g) {
        const auto e = exact_grad(x);
        for (int i = 0; i < 4; ++i)
            s += w * (g[i] - e[i]) * (g[i] - e[i]);
    });
    return s;
}

} // namespace urans
