#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <urans/gmsh_io.hpp>
#include <urans/model.hpp>

#include "test_support.hpp"

using namespace urans;

namespace
{

ModelParams section6()
{
    ModelParams p;
    p.nu = 1e-4;
    p.tau = 0.1;
    p.mu = 0.55;
    p.kappa = 0.41;
    p.length = 1.0;
    p.velocity = 1.0;
    p.t_star = 1.0;
    return p;
}

} // namespace

TEST(ModelParams, Validation)
{
    ModelParams p;
    EXPECT_NO_THROW(p.validate());
    for (auto bad : {&ModelParams::nu, &ModelParams::tau, &ModelParams::mu, &ModelParams::length})
    {
        ModelParams q;
        q.*bad = 0.0;
        EXPECT_THROW(q.validate(), std::invalid_argument);
    }
    ModelParams q;
    q.t_star = -1.0;
    EXPECT_THROW(q.validate(), std::invalid_argument);
    EXPECT_NEAR(section6().reynolds(), 1e4, 1e-9);
}

TEST(ModelParams, DampingNamesRoundTrip)
{
    for (auto d : {Damping::constant, Damping::model_quadratic, Damping::test_variant})
        EXPECT_EQ(damping_from_string(to_string(d)), d);
    EXPECT_THROW(damping_from_string("cubic"), std::invalid_argument);
}

TEST(EddyViscosity, TestVariantPointValue)
{
    auto p = section6();
    p.damping = Damping::test_variant;
    // nu_T = sqrt2 mu k (kappa y / L)^2 tau at y = 1, k = 1.
    EXPECT_NEAR(1.0 * p.tau * p.damping_profile(1.0), 1.3075111e-2, 1e-9);
    EXPECT_NEAR(1.0 * p.tau * p.damping_profile(1.0), std::sqrt(2.0) * 0.55 * 0.1681 * 0.1, 1e-16);
}

TEST(EddyViscosity, ModelQuadraticPointValue)
{
    auto p = section6();
    p.damping = Damping::model_quadratic;
    EXPECT_NEAR(2.0 * p.tau * p.damping_profile(0.5), 2.75e-2, 1e-16);
}

TEST(EddyViscosity, FieldAtQuadraturePoints)
{
    const auto space = test::square_space(3);
    const auto y = compute_wall_distance(*space);
    const auto& tab = reference::assembly_tables();
    for (auto d : {Damping::constant, Damping::model_quadratic, Damping::test_variant})
    {
        auto p = section6();
        p.damping = d;
        const auto a = viscosity_field(*space, p, {2.0, 1.5}, y);
        for (std::size_t t = 0; t < space->mesh().num_triangles(); ++t)
            for (std::size_t q = 0; q < tab.rule.size(); ++q)
            {
                const double yq = y.at_quadrature(*space, t, q);
                double g = 0.0;
                switch (d)
                {
                case Damping::constant: g = 0.55; break;
                case Damping::model_quadratic: g = 0.55 * yq * yq; break;
                case Damping::test_variant: g = std::sqrt(2.0) * 0.55 * std::pow(0.41 * yq, 2); break;
                }
                EXPECT_NEAR(a(t, q, {}), 1e-4 + 2.0 * 0.1 * g, 1e-15);
            }
    }
}

TEST(EddyViscosity, ZeroTurbulenceAndBeforeActivation)
{
    const auto space = test::square_space(2);
    const auto y = compute_wall_distance(*space);
    const auto p = section6();
    EXPECT_EQ(viscosity_field(*space, p, {0.0, 2.0}, y).constant_value(), std::optional<double>(1e-4));
    EXPECT_EQ(viscosity_field(*space, p, {5.0, 0.5}, y).constant_value(), std::optional<double>(1e-4));
    EXPECT_THROW(viscosity_field(*space, p, {-1.0, 2.0}, y), std::domain_error);
}

TEST(DissipationCoefficient, Examples)
{
    const auto space = test::square_space(4);
    const WallDistanceField y(space->interpolate_p2_scalar([](Point p) { return p.y; }));
    const Vector shear = space->interpolate([](Point p) { return Vec2{p.y, 0.0}; });
    auto p = section6();
    p.damping = Damping::constant;
    EXPECT_NEAR(dissipation_coefficient(*space, shear, p, y), 0.055, 1e-14);
    EXPECT_EQ(dissipation_coefficient(*space, Vector::Zero(shear.size()), p, y), 0.0);
    // y^2 is reproduced exactly by the P2 interpolant of the distance y.
    p.damping = Damping::model_quadratic;
    EXPECT_NEAR(dissipation_coefficient(*space, shear, p, y), 0.1 * 0.55 / 3.0, 1e-14);
}

TEST(KUpdate, BackwardEulerExamples)
{
    EXPECT_EQ(k_update_be(0.0, 0.1, 0.1, 3.0), 0.0);
    EXPECT_NEAR(k_update_be(1.0, 0.1, 0.1, 0.0), 0.5857864, 1e-7);
    EXPECT_NEAR(k_update_be(1.0, 0.1, 0.1, 0.0), 1.0 / (1.0 + std::sqrt(2.0) / 2.0), 1e-16);
    const double eq = std::sqrt(2.0) / (2.0 * 0.1);
    for (double dt : {1e-3, 0.1, 10.0})
        EXPECT_NEAR(k_update_be(0.7, dt, 0.1, eq), 0.7, 1e-15);
}

TEST(KUpdate, ExactExamples)
{
    EXPECT_EQ(k_update_exact(0.0, 0.1, 0.1, 2.0), 0.0);
    EXPECT_NEAR(k_update_exact(1.0, 0.1, 0.1, 0.0), 0.4930687, 1e-7);
    EXPECT_NEAR(k_update_exact(1.0, 0.1, 0.1, 0.0), std::exp(-std::sqrt(2.0) / 2.0), 1e-16);
    EXPECT_EQ(k_update_exact(0.3, 0.05, 0.1, std::sqrt(2.0) / (2.0 * 0.1)), 0.3);
}

TEST(KUpdate, Errors)
{
    EXPECT_THROW(k_update_be(1.0, 0.0, 0.1, 0.0), std::invalid_argument);
    EXPECT_THROW(k_update_exact(1.0, -1.0, 0.1, 0.0), std::invalid_argument);
    EXPECT_THROW(k_update_be(-1.0, 0.1, 0.1, 0.0), std::domain_error);
}

TEST(KUpdate, NonnegativeAndMonotoneInEps)
{
    for (double k : {0.0, 1e-8, 1.0, 50.0})
        for (double dt : {1e-4, 1e-2, 1.0})
        {
            double prev_be = -1.0, prev_ex = -1.0;
            for (double eps : {0.0, 0.1, 1.0, 7.07, 100.0})
            {
                const double be = k_update_be(k, dt, 0.1, eps), ex = k_update_exact(k, dt, 0.1, eps);
                EXPECT_GE(be, 0.0);
                EXPECT_GE(ex, 0.0);
                EXPECT_GE(be, prev_be);
                EXPECT_GE(ex, prev_ex);
                prev_be = be;
                prev_ex = ex;
            }
        }
}

TEST(KUpdate, LocalDifferenceIsSecondOrder)
{
    std::vector<double> h, e;
    for (double dt = 0.02; dt > 0.02 / 64; dt /= 2)
    {
        h.push_back(dt);
        e.push_back(std::abs(k_update_be(1.0, dt, 0.1, 3.0) - k_update_exact(1.0, dt, 0.1, 3.0)));
    }
    EXPECT_GE(test::loglog_slope(h, e), 1.9);
}

TEST(KUpdate, HomogeneousDecayOverManySteps)
{
    double k = 2.0;
    const double dt = 1e-3, tau = 0.1;
    for (int n = 1; n <= 1000; ++n)
    {
        k = k_update_exact(k, dt, tau, 0.0);
        ASSERT_NEAR(k, 2.0 * std::exp(-std::sqrt(2.0) / 2.0 * n * dt / tau), 1e-12);
    }
}

TEST(KInitialize, CapActiveEverywhere)
{
    // Wall distance far above the cap: l = cap everywhere.
    const auto space = test::square_space(3);
    const WallDistanceField far(std::vector<double>(space->num_nodes(), 10.0));
    auto p = section6();
    const double cap = 0.082 / std::sqrt(p.reynolds());
    const auto k = k_initialize(*space, far, p);
    EXPECT_NEAR(k.k, cap * cap / (2.0 * p.tau * p.tau), 1e-18);
    EXPECT_EQ(k.time, p.t_star);
}

TEST(KInitialize, SmallReynoldsLimitIsPureMixingLength)
{
    // The cap 0.082 Re^{-1/2} grows as Re -> 0, leaving l = 0.41 y.
    const auto space = test::square_space(6);
    const WallDistanceField y(space->interpolate_p2_scalar([](Point p) { return p.y; }));
    auto p = section6();
    p.nu = 1e6;
    // integral over the unit square of (0.41 y)^2 is 0.41^2 / 3.
    EXPECT_NEAR(k_initialize(*space, y, p).k, 0.41 * 0.41 / 3.0 / (2.0 * p.tau * p.tau), 1e-13);
}

TEST(KInitialize, OffsetCirclesBound)
{
    const auto mesh = std::make_shared<const Mesh>(parse_gmsh_file(test::mesh_path("offset_circles_lc0.062500.msh")));
    const FESpace space(mesh, {1, 2});
    const auto y = compute_wall_distance(space, OffsetCircles{}.distance_function());
    const double k = k_initialize(space, y, section6()).k;
    EXPECT_GE(k, 3.2e-5);
    EXPECT_LE(k, 3.362e-5);
}
