#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <string>

#include <Eigen/Dense>

#include <urans/diagnostics.hpp>
#include <urans/fe_space.hpp>
#include <urans/mesh.hpp>

#ifndef URANS_DATA_DIR
#error "URANS_DATA_DIR must be defined by the build"
#endif

namespace urans::test
{

inline std::string mesh_path(const std::string& name) { return std::string(URANS_DATA_DIR) + "/meshes/" + name; }

inline std::shared_ptr<const FESpace> square_space(int n)
{
    return std::make_shared<const FESpace>(std::make_shared<const Mesh>(build_structured_square(n)),
                                           std::set<int>{1});
}

/// Random velocity vector with homogeneous Dirichlet dofs.
inline Vector random_velocity(const FESpace& space, std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(static_cast<Eigen::Index>(space.num_velocity_dofs()));
    for (auto& x : v)
        x = u(rng);
    space.zero_dirichlet(v);
    return v;
}

/// Least-squares slope of log(e) against log(h).
inline double loglog_slope(const std::vector<double>& h, const std::vector<double>& e)
{
    const std::size_t n = h.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double x = std::log(h[i]), y = std::log(e[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Inf-sup estimate of the equal-order P1-P1 pair on the n x n square:
/// velocity restricted to vertex values, prolongated into the P2 space.
inline InfSupEstimate p1p1_infsup(int n)
{
    const auto space = square_space(n);
    const auto nv = space->mesh().num_vertices();
    const VelocityPattern pattern(*space);
    const Eigen::MatrixXd Hf = Eigen::MatrixXd(assemble_mass(pattern))
                               + Eigen::MatrixXd(assemble_diffusion(pattern, CoefficientField::constant(1.0)));
    const Eigen::MatrixXd Bf(assemble_divergence(*space));
    // Edge nodes get the average of their end vertices.
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(space->num_velocity_dofs(), 2 * nv);
    for (std::size_t t = 0; t < space->mesh().num_triangles(); ++t)
    {
        const auto nodes = space->p2_nodes(t);
        const auto& tri = space->mesh().triangles()[t];
        for (int c = 0; c < 2; ++c)
            for (int k = 0; k < 3; ++k)
            {
                P(space->velocity_dof(nodes[k], c), c * nv + tri[k]) = 1.0;
                P(space->velocity_dof(nodes[3 + k], c), c * nv + tri[k]) = 0.5;
                P(space->velocity_dof(nodes[3 + k], c), c * nv + tri[(k + 1) % 3]) = 0.5;
            }
    }
    std::vector<int> free;
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t v = 0; v < nv; ++v)
        {
            const auto dof = space->velocity_dof(v, static_cast<int>(c));
            if (!space->is_dirichlet(dof))
                free.push_back(static_cast<int>(c * nv + v));
        }
    Eigen::MatrixXd Pf(P.rows(), static_cast<Eigen::Index>(free.size()));
    for (std::size_t j = 0; j < free.size(); ++j)
        Pf.col(static_cast<Eigen::Index>(j)) = P.col(free[j]);
    return infsup_estimate_dense(Pf.transpose() * Hf * Pf, Bf * Pf, Eigen::MatrixXd(assemble_pressure_mass(*space)),
                                 pressure_mean_weights(*space));
}

} // namespace urans::test
