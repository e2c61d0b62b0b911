#pragma once

// The 1/2-equation closure: eddy viscosity nu_T = k tau g(y) driven by a
// single space-averaged turbulent kinetic energy k(t) obeying
//
//     dk/dt + (sqrt(2)/2) k / tau = eps(v) k,
//     eps(v) = (tau / |Omega|) * integral of g(y) |grad v|^2.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "norms.hpp"
#include "wall_distance.hpp"

namespace urans
{

/// Wall-damping profile g(y) in nu_T = k tau g(y).
enum class Damping
{
    constant,        // mu
    model_quadratic, // mu (y/L)^2
    test_variant     // sqrt(2) mu (kappa y / L)^2
};

inline std::string to_string(Damping d)
{
    switch (d)
    {
    case Damping::constant: return "constant";
    case Damping::model_quadratic: return "model_quadratic";
    case Damping::test_variant: return "test_variant";
    }
    return "?";
}

inline Damping damping_from_string(const std::string& s)
{
    if (s == "constant")
        return Damping::constant;
    if (s == "model_quadratic")
        return Damping::model_quadratic;
    if (s == "test_variant")
        return Damping::test_variant;
    throw std::invalid_argument("unknown damping '" + s + "'");
}

struct ModelParams
{
    double nu = 1e-4;       // kinematic viscosity
    double tau = 0.1;       // model time scale
    double mu = 0.55;       // calibration constant
    double kappa = 0.41;    // von Karman constant
    double length = 1.0;    // L
    double velocity = 1.0;  // U
    double t_star = 1.0;    // model switched on at this time
    Damping damping = Damping::test_variant;

    double reynolds() const { return velocity * length / nu; }

    /// sqrt(2)/2 / tau, the decay rate of the homogeneous k equation.
    double decay_rate() const { return std::numbers::sqrt2 / (2.0 * tau); }

    void validate() const
    {
        auto require = [](bool ok, const char* what) {
            if (!ok)
                throw std::invalid_argument(std::string("ModelParams: ") + what);
        };
        require(nu > 0.0, "nu must be > 0");
        require(tau > 0.0, "tau must be > 0");
        require(mu > 0.0, "mu must be > 0");
        require(length > 0.0, "L must be > 0");
        require(velocity > 0.0, "U must be > 0");
        require(t_star >= 0.0, "t_star must be >= 0");
    }

    /// g(y) for the selected damping.
    double damping_profile(double y) const
    {
        switch (damping)
        {
        case Damping::constant: return mu;
        case Damping::model_quadratic: return mu * (y / length) * (y / length);
        case Damping::test_variant:
        {
            const double s = kappa * y / length;
            return std::numbers::sqrt2 * mu * s * s;
        }
        }
        return 0.0;
    }
};

/// Space-averaged turbulent kinetic energy at a time level.
struct KState
{
    double k = 0.0;
    double time = 0.0;
};

/// g(y) as a quadrature-point coefficient.
inline CoefficientField damping_weight(const FESpace& space, const ModelParams& params, const WallDistanceField& y)
{
    if (params.damping == Damping::constant)
        return CoefficientField::constant(params.mu);
    return CoefficientField::from_wall_distance(space, y, [params](double yq) {
        return params.damping_profile(std::max(0.0, yq));
    });
}

/// a(x) = nu + nu_T(x) with nu_T = k tau g(y); nu_T vanishes before t_star.
inline CoefficientField viscosity_field(const FESpace& space, const ModelParams& params, const KState& k,
                                        const WallDistanceField& y)
{
    if (k.k < 0.0)
        throw std::domain_error("viscosity_field: negative k");
    const double nu = params.nu;
    if (k.k == 0.0 || k.time < params.t_star)
        return CoefficientField::constant(nu);
    const double scale = k.k * params.tau;
    if (params.damping == Damping::constant)
        return CoefficientField::constant(nu + scale * params.mu);
    return CoefficientField::from_wall_distance(space, y, [params, nu, scale](double yq) {
        return nu + scale * params.damping_profile(std::max(0.0, yq));
    });
}

/// eps = (tau / |Omega|) * integral of g(y) |grad v|^2, the factor
/// multiplying k^n on the right of the discrete k equation.
inline double dissipation_coefficient(const FESpace& space, const Vector& v, const ModelParams& params,
                                      const WallDistanceField& y, ViscousForm form = ViscousForm::full_gradient)
{
    const double integral = weighted_dissipation(space, v, damping_weight(space, params, y), form);
    return params.tau / space.mesh().domain_area() * integral;
}

namespace model_detail
{

inline void check_step(double k_n, double dt, double eps)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("k update: dt must be > 0");
    if (k_n < 0.0)
        throw std::domain_error("k update: negative k");
    if (eps < 0.0)
        throw std::domain_error("k update: negative eps");
}

} // namespace model_detail

/// Backward Euler step of the k equation with the production lagged:
/// (k1 - k0)/dt + (sqrt2/2) k1 / tau = eps k0.
inline double k_update_be(double k_n, double dt, double tau, double eps)
{
    model_detail::check_step(k_n, dt, eps);
    return k_n * (1.0 + dt * eps) / (1.0 + std::numbers::sqrt2 / 2.0 * dt / tau);
}

/// Exact solution of the k equation over one step with eps frozen.
inline double k_update_exact(double k_n, double dt, double tau, double eps)
{
    model_detail::check_step(k_n, dt, eps);
    return k_n * std::exp((eps - std::numbers::sqrt2 / (2.0 * tau)) * dt);
}

enum class KUpdateMode
{
    backward_euler,
    exact
};

inline double k_update(KUpdateMode mode, double k_n, double dt, double tau, double eps)
{
    return mode == KUpdateMode::backward_euler ? k_update_be(k_n, dt, tau, eps) : k_update_exact(k_n, dt, tau, eps);
}

/// k(t_star) = 1/|Omega| * 1/(2 tau^2) * integral of l(x)^2 with the
/// mixing length l = min(kappa y, 0.082 Re^{-1/2}).
inline KState k_initialize(const FESpace& space, const WallDistanceField& y, const ModelParams& params)
{
    const double re = params.reynolds();
    if (!(re > 0.0))
        throw std::invalid_argument("k_initialize: Re must be > 0");
    const double cap = 0.082 / std::sqrt(re);
    const auto& tab = reference::assembly_tables();
    const auto& mesh = space.mesh();
    double integral = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        const double det = 2.0 * mesh.triangle_area(t);
        for (std::size_t q = 0; q < tab.rule.size(); ++q)
        {
            const double l = std::min(params.kappa * std::max(0.0, y.at_quadrature(space, t, q)), cap);
            integral += tab.rule.weights[q] * det * l * l;
        }
    }
    return {integral / (2.0 * params.tau * params.tau * mesh.domain_area()), params.t_star};
}

} // namespace urans
