#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mesh.hpp"

namespace urans
{

/// Quadrature on the reference triangle {(x, y): x, y >= 0, x + y <= 1}.
/// Weights sum to the reference area 1/2.
struct QuadratureRule
{
    std::vector<Point> points;
    std::vector<double> weights;
    int degree = 0;

    std::size_t size() const { return points.size(); }
};

namespace quadrature_detail
{

// Symmetric orbits in barycentric coordinates; weights are normalised to
// sum to 1 and halved on output.
struct Builder
{
    QuadratureRule rule;

    void centroid(double w)
    {
        add(1.0 / 3.0, 1.0 / 3.0, w);
    }
    void orbit3(double a, double w)
    {
        const double b = 1.0 - 2.0 * a;
        add(a, a, w);
        add(b, a, w);
        add(a, b, w);
    }
    void orbit6(double a, double b, double w)
    {
        const double c = 1.0 - a - b;
        add(a, b, w);
        add(b, a, w);
        add(b, c, w);
        add(c, b, w);
        add(a, c, w);
        add(c, a, w);
    }
    void add(double x, double y, double w)
    {
        rule.points.push_back({x, y});
        rule.weights.push_back(0.5 * w);
    }
};

} // namespace quadrature_detail

/// Symmetric rule with positive weights, exact for total degree <= order.
/// Orders 1..6 are available (Strang-Fix/Dunavant points).
inline QuadratureRule quadrature_rule(int order)
{
    quadrature_detail::Builder b;
    switch (order)
    {
    case 1:
        b.centroid(1.0);
        b.rule.degree = 1;
        break;
    case 2:
        b.orbit3(1.0 / 6.0, 1.0 / 3.0);
        b.rule.degree = 2;
        break;
    case 3:
    case 4:
        b.orbit3(0.44594849091596488632, 0.22338158967801146570);
        b.orbit3(0.09157621350977074346, 0.10995174365532186764);
        b.rule.degree = 4;
        break;
    case 5:
    {
        const double s = std::sqrt(15.0);
        b.centroid(9.0 / 40.0);
        b.orbit3((6.0 - s) / 21.0, (155.0 - s) / 1200.0);
        b.orbit3((6.0 + s) / 21.0, (155.0 + s) / 1200.0);
        b.rule.degree = 5;
        break;
    }
    case 6:
        b.orbit3(0.24928674517091042129, 0.11678627572637936603);
        b.orbit3(0.06308901449150222834, 0.05084490637020681692);
        b.orbit6(0.31035245103378440542, 0.05314504984481694735, 0.08285107561837357519);
        b.rule.degree = 6;
        break;
    default:
        throw std::invalid_argument("quadrature_rule: unsupported order " + std::to_string(order));
    }
    return b.rule;
}

/// Order used by every assembly routine and norm evaluation.
inline constexpr int assembly_quadrature_order = 5;

} // namespace urans
