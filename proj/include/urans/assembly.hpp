#pragma once

// Global operators of the Taylor-Hood discretisation. Every velocity
// operator is assembled on one shared sparsity pattern (full 12x12 element
// coupling), so operators can be combined value-by-value.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "fe_space.hpp"
#include "wall_distance.hpp"

namespace urans
{

using SparseMatrix = Eigen::SparseMatrix<double>;
using LocalMatrix = Eigen::Matrix<double, 12, 12>;

/// Scalar coefficient a(x) >= 0 sampled at assembly quadrature points.
class CoefficientField
{
public:
    using Rule = std::function<double(std::size_t triangle, std::size_t q, Point x)>;

    static CoefficientField constant(double c)
    {
        CoefficientField f;
        f.constant_ = c;
        f.rule_ = [c](std::size_t, std::size_t, Point) { return c; };
        return f;
    }

    static CoefficientField from_function(std::function<double(Point)> g)
    {
        CoefficientField f;
        f.rule_ = [g = std::move(g)](std::size_t, std::size_t, Point x) { return g(x); };
        return f;
    }

    /// a(x) = transform(y_h(x)) with y_h the P2 interpolant of the wall distance.
    static CoefficientField from_wall_distance(const FESpace& space, WallDistanceField y,
                                               std::function<double(double)> transform)
    {
        CoefficientField f;
        f.rule_ = [space = &space, y = std::move(y), transform = std::move(transform)](std::size_t t, std::size_t q,
                                                                                       Point) {
            return transform(y.at_quadrature(*space, t, q));
        };
        return f;
    }

    double operator()(std::size_t t, std::size_t q, Point x) const { return rule_(t, q, x); }

    /// Set when the field is a known constant.
    std::optional<double> constant_value() const { return constant_; }

private:
    CoefficientField() = default;
    Rule rule_;
    std::optional<double> constant_;
};

enum class ViscousForm
{
    full_gradient,     // (a grad v, grad w)
    symmetric_gradient // 2 (a sym grad v, sym grad w)
};

/// Shared sparsity pattern of all velocity-velocity operators plus the
/// value-array slot of every element matrix entry.
class VelocityPattern
{
public:
    explicit VelocityPattern(const FESpace& space) : space_(space)
    {
        const std::size_t nt = space.mesh().num_triangles();
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(nt * 144);
        for (std::size_t t = 0; t < nt; ++t)
        {
            const auto d = space.velocity_dofs(t);
            for (int i = 0; i < 12; ++i)
                for (int j = 0; j < 12; ++j)
                    trip.emplace_back(d[i], d[j], 1.0);
        }
        const auto n = static_cast<Eigen::Index>(space.num_velocity_dofs());
        pattern_.resize(n, n);
        pattern_.setFromTriplets(trip.begin(), trip.end());
        pattern_.makeCompressed();
        std::fill_n(pattern_.valuePtr(), pattern_.nonZeros(), 0.0);

        slots_.resize(nt);
        const auto* outer = pattern_.outerIndexPtr();
        const auto* inner = pattern_.innerIndexPtr();
        for (std::size_t t = 0; t < nt; ++t)
        {
            const auto d = space.velocity_dofs(t);
            for (int j = 0; j < 12; ++j)
            {
                const auto* b = inner + outer[d[j]];
                const auto* e = inner + outer[d[j] + 1];
                for (int i = 0; i < 12; ++i)
                    slots_[t][12 * j + i] = static_cast<int>(std::lower_bound(b, e, d[i]) - inner);
            }
        }
    }

    const FESpace& space() const { return space_; }
    const SparseMatrix& zero() const { return pattern_; }

    /// Assembles sum over triangles of kernel(t, map, local) into the pattern.
    template <class Kernel>
    SparseMatrix assemble(Kernel&& kernel) const
    {
        SparseMatrix m = pattern_;
        double* values = m.valuePtr();
        LocalMatrix local;
        for (std::size_t t = 0; t < slots_.size(); ++t)
        {
            local.setZero();
            const AffineMap map(space_.mesh().corners(t));
            kernel(t, map, local);
            const auto& s = slots_[t];
            for (int j = 0; j < 12; ++j)
                for (int i = 0; i < 12; ++i)
                    values[s[12 * j + i]] += local(i, j);
        }
        return m;
    }

private:
    const FESpace& space_;
    SparseMatrix pattern_;
    std::vector<std::array<int, 144>> slots_;
};

namespace assembly_detail
{

inline std::array<Point, 6> physical_gradients(const AffineMap& map, std::size_t q)
{
    const auto& ref = reference::assembly_tables().p2_grad[q];
    std::array<Point, 6> g;
    for (int i = 0; i < 6; ++i)
        g[i] = map.grad(ref[i]);
    return g;
}

} // namespace assembly_detail

/// Velocity mass matrix: w^T M v = (v_h, w_h).
inline SparseMatrix assemble_mass(const VelocityPattern& pattern)
{
    const auto& tab = reference::assembly_tables();
    return pattern.assemble([&](std::size_t, const AffineMap& map, LocalMatrix& local) {
        for (std::size_t q = 0; q < tab.rule.size(); ++q)
        {
            const double w = tab.rule.weights[q] * map.det;
            const auto& phi = tab.p2[q];
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j)
                {
                    const double v = w * phi[i] * phi[j];
                    local(i, j) += v;
                    local(6 + i, 6 + j) += v;
                }
        }
    });
}

inline SparseMatrix assemble_mass(const FESpace& space) { return assemble_mass(VelocityPattern(space)); }

/// Viscous operator w^T A v = (a grad v, grad w), or 2 (a sym grad v, sym grad w).
/// Throws if a is negative at any quadrature point.
inline SparseMatrix assemble_diffusion(const VelocityPattern& pattern, const CoefficientField& a,
                                       ViscousForm form = ViscousForm::full_gradient)
{
    const auto& tab = reference::assembly_tables();
    return pattern.assemble([&](std::size_t t, const AffineMap& map, LocalMatrix& local) {
        for (std::size_t q = 0; q < tab.rule.size(); ++q)
        {
            const Point x = map.map(tab.rule.points[q]);
            const double coef = a(t, q, x);
            if (!(coef >= 0.0))
                throw std::domain_error("assemble_diffusion: negative coefficient " + std::to_string(coef));
            const double w = tab.rule.weights[q] * map.det * coef;
            const auto g = assembly_detail::physical_gradients(map, q);
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j)
                {
                    const double gg = w * dot(g[i], g[j]);
                    local(i, j) += gg;
                    local(6 + i, 6 + j) += gg;
                    if (form == ViscousForm::symmetric_gradient)
                    {
                        // row (i, d), column (j, c): g_i[c] g_j[d]
                        local(i, j) += w * g[i].x * g[j].x;
                        local(i, 6 + j) += w * g[i].y * g[j].x;
                        local(6 + i, j) += w * g[i].x * g[j].y;
                        local(6 + i, 6 + j) += w * g[i].y * g[j].y;
                    }
                }
        }
    });
}

inline SparseMatrix assemble_diffusion(const FESpace& space, const CoefficientField& a,
                                       ViscousForm form = ViscousForm::full_gradient)
{
    return assemble_diffusion(VelocityPattern(space), a, form);
}

/// Convection operator N(u) with w^T N(u) v = b(u, v, w) where
/// b(u, v, w) = ((u . grad) v, w) + 1/2 ((div u) v, w).
inline SparseMatrix assemble_trilinear(const VelocityPattern& pattern, const Vector& u)
{
    const auto& space = pattern.space();
    if (static_cast<std::size_t>(u.size()) != space.num_velocity_dofs())
        throw std::invalid_argument("assemble_trilinear: dimension mismatch");
    const auto& tab = reference::assembly_tables();
    return pattern.assemble([&](std::size_t t, const AffineMap& map, LocalMatrix& local) {
        const auto d = space.velocity_dofs(t);
        for (std::size_t q = 0; q < tab.rule.size(); ++q)
        {
            const double w = tab.rule.weights[q] * map.det;
            const auto& phi = tab.p2[q];
            const auto g = assembly_detail::physical_gradients(map, q);
            double ux = 0.0, uy = 0.0, div = 0.0;
            for (int k = 0; k < 6; ++k)
            {
                const double a = u[d[k]], b = u[d[6 + k]];
                ux += phi[k] * a;
                uy += phi[k] * b;
                div += g[k].x * a + g[k].y * b;
            }
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j)
                {
                    const double v = w * phi[i] * (ux * g[j].x + uy * g[j].y + 0.5 * div * phi[j]);
                    local(i, j) += v;
                    local(6 + i, 6 + j) += v;
                }
        }
    });
}

inline SparseMatrix assemble_trilinear(const FESpace& space, const Vector& u)
{
    return assemble_trilinear(VelocityPattern(space), u);
}

/// Divergence operator (n_p x n_v): q^T B v = (div v_h, q_h).
inline SparseMatrix assemble_divergence(const FESpace& space)
{
    const auto& tab = reference::assembly_tables();
    const auto& mesh = space.mesh();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.num_triangles() * 36);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        const AffineMap map(mesh.corners(t));
        const auto& tri = mesh.triangles()[t];
        const auto d = space.velocity_dofs(t);
        double loc[3][12] = {};
        for (std::size_t q = 0; q < tab.rule.size(); ++q)
        {
            const double w = tab.rule.weights[q] * map.det;
            const auto g = assembly_detail::physical_gradients(map, q);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 6; ++j)
                {
                    loc[i][j] += w * tab.p1[q][i] * g[j].x;
                    loc[i][6 + j] += w * tab.p1[q][i] * g[j].y;
                }
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 12; ++j)
                trip.emplace_back(tri[i], d[j], loc[i][j]);
    }
    SparseMatrix b(static_cast<Eigen::Index>(space.num_pressure_dofs()),
                   static_cast<Eigen::Index>(space.num_velocity_dofs()));
    b.setFromTriplets(trip.begin(), trip.end());
    return b;
}

/// P1 pressure mass matrix.
inline SparseMatrix assemble_pressure_mass(const FESpace& space)
{
    const auto& tab = reference::assembly_tables();
    const auto& mesh = space.mesh();
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        const AffineMap map(mesh.corners(t));
        const auto& tri = mesh.triangles()[t];
        for (std::size_t q = 0; q < tab.rule.size(); ++q)
        {
            const double w = tab.rule.weights[q] * map.det;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    trip.emplace_back(tri[i], tri[j], w * tab.p1[q][i] * tab.p1[q][j]);
        }
    }
    const auto n = static_cast<Eigen::Index>(space.num_pressure_dofs());
    SparseMatrix m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

/// Integrals of the P1 basis functions; m^T p is the integral of p_h.
inline Vector pressure_mean_weights(const FESpace& space)
{
    const auto& mesh = space.mesh();
    Vector m = Vector::Zero(static_cast<Eigen::Index>(space.num_pressure_dofs()));
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
        for (int v : mesh.triangles()[t])
            m[v] += mesh.triangle_area(t) / 3.0;
    return m;
}

using ForceFunction = std::function<Vec2(Point, double)>;

/// Load vector F with F_i = (f(., t), phi_i).
inline Vector assemble_load(const FESpace& space, const ForceFunction& f, double t)
{
    const auto& tab = reference::assembly_tables();
    const auto& mesh = space.mesh();
    Vector rhs = Vector::Zero(static_cast<Eigen::Index>(space.num_velocity_dofs()));
    for (std::size_t e = 0; e < mesh.num_triangles(); ++e)
    {
        const AffineMap map(mesh.corners(e));
        const auto d = space.velocity_dofs(e);
        for (std::size_t q = 0; q < tab.rule.size(); ++q)
        {
            const double w = tab.rule.weights[q] * map.det;
            const Vec2 fq = f(map.map(tab.rule.points[q]), t);
            for (int i = 0; i < 6; ++i)
            {
                rhs[d[i]] += w * fq.x * tab.p2[q][i];
                rhs[d[6 + i]] += w * fq.y * tab.p2[q][i];
            }
        }
    }
    return rhs;
}

/// Squared L2 norm of a force field at time t, by the assembly quadrature.
inline double force_l2_squared(const Mesh& mesh, const ForceFunction& f, double t)
{
    const auto& tab = reference::assembly_tables();
    double s = 0.0;
    for (std::size_t e = 0; e < mesh.num_triangles(); ++e)
    {
        const AffineMap map(mesh.corners(e));
        for (std::size_t q = 0; q < tab.rule.size(); ++q)
        {
            const Vec2 fq = f(map.map(tab.rule.points[q]), t);
            s += tab.rule.weights[q] * map.det * (fq.x * fq.x + fq.y * fq.y);
        }
    }
    return s;
}

} // namespace urans
