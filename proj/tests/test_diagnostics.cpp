#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <urans/solver.hpp>

#include "test_support.hpp"

using namespace urans;

TEST(EnergyResidual, ZeroStates)
{
    const auto space = test::square_space(2);
    const SparseMatrix M = assemble_mass(*space);
    const Vector z = Vector::Zero(M.rows());
    EXPECT_EQ(energy_residual(M, M, z, z, z, 0.1), 0.0);
}

TEST(KResidual, BackwardEulerSatisfiesDefiningEquation)
{
    for (double k0 : {1e-6, 0.3, 4.0})
        for (double dt : {1e-4, 5e-3, 0.1})
            for (double eps : {0.0, 0.5, 7.0, 40.0})
            {
                const double k1 = k_update_be(k0, dt, 0.1, eps);
                EXPECT_LE(k_residual(k0, k1, dt, 0.1, eps), 1e-14);
            }
    EXPECT_EQ(k_residual(0.0, 0.0, 0.1, 0.1, 2.0), 0.0);
}

TEST(KResidual, ExactUpdateLeavesFirstOrderDefect)
{
    // The residual is measured on the equation multiplied by dt, so the
    // per-unit-time defect residual/dt shrinks linearly with dt.
    std::vector<double> h, e;
    for (double dt = 0.02; dt > 0.02 / 40; dt /= 2)
    {
        const double k1 = k_update_exact(1.0, dt, 0.1, 3.0);
        h.push_back(dt);
        e.push_back(k_residual(1.0, k1, dt, 0.1, 3.0) / dt);
    }
    EXPECT_GT(e.back(), 0.0);
    EXPECT_NEAR(test::loglog_slope(h, e), 1.0, 0.05);
}

TEST(Poincare, ApproachesContinuousConstantFromAbove)
{
    const double exact = 2.0 * M_PI * M_PI;
    double prev = 1e300;
    for (int n : {2, 4, 8})
    {
        const auto space = test::square_space(n);
        const double lam = poincare_constant(*space, assemble_mass(*space),
                                             assemble_diffusion(*space, CoefficientField::constant(1.0)));
        EXPECT_GE(lam, exact * (1.0 - 1e-10)); // Rayleigh-Ritz upper bound
        EXPECT_LE(lam, prev);
        prev = lam;
    }
    EXPECT_NEAR(prev, exact, 1e-3 * exact);
}

TEST(StabilityLedger, UnforcedDecayHolds)
{
    auto space = test::square_space(4);
    StepperOptions o;
    o.params.nu = 1e-2;
    o.params.t_star = 0.0;
    o.params.damping = Damping::constant;
    Stepper stepper(space, compute_wall_distance(*space), o);
    State s = stepper.initial_state(space->interpolate([](Point p) {
        return Vec2{std::sin(M_PI * p.x) * std::sin(M_PI * p.y), p.x * (1 - p.x) * p.y * (1 - p.y)};
    }));
    stepper.activate_model(s);
    std::vector<BudgetRecord> rows{stepper.describe(s)};
    for (int n = 0; n < 30; ++n)
    {
        auto [next, rep] = stepper.step(s, 0.05);
        rows.push_back(rep.budget);
        s = next;
    }
    const LedgerConstants c{1.0, o.params.nu, o.params.tau,
                            poincare_constant(*space, stepper.mass(), stepper.stiffness())};
    const auto ledger = stability_ledger(rows, c);
    ASSERT_EQ(ledger.entries.size(), 30u);
    EXPECT_TRUE(ledger.holds());
    EXPECT_FALSE(ledger.flagged());
    for (std::size_t n = 1; n < rows.size(); ++n)
        EXPECT_LE(rows[n].kinetic_energy, rows[n - 1].kinetic_energy);
}

TEST(StabilityLedger, SyntheticViolationFlagged)
{
    std::vector<BudgetRecord> rows(3);
    rows[0].kinetic_energy = 0.5;
    rows[1].t = 0.1;
    rows[1].step = 1;
    rows[1].kinetic_energy = 0.5;
    rows[2].t = 0.2;
    rows[2].step = 2;
    rows[2].kinetic_energy = 2.0; // energy appears from nowhere
    const auto ledger = stability_ledger(rows, {1.0, 1.0, 0.1, 10.0});
    EXPECT_LE(ledger.entries[0].margin, 0.0);
    EXPECT_EQ(ledger.entries[1].status, LedgerStatus::violation);
    EXPECT_FALSE(ledger.holds());
    EXPECT_TRUE(ledger.flagged());
}

TEST(StabilityLedger, SmallExcursionIsOnlyAWarning)
{
    std::vector<BudgetRecord> rows(2);
    rows[0].kinetic_energy = 0.5;
    rows[1].t = 0.1;
    rows[1].step = 1;
    rows[1].kinetic_energy = 0.51;
    const auto ledger = stability_ledger(rows, {1.0, 1.0, 0.1, 10.0});
    EXPECT_EQ(ledger.entries[0].status, LedgerStatus::warning);
    EXPECT_FALSE(ledger.holds());
    EXPECT_FALSE(ledger.flagged());
}

TEST(StabilityLedger, ActivationAddsInitialK)
{
    std::vector<BudgetRecord> rows(2);
    rows[1].t = 0.1;
    rows[1].step = 1;
    rows[1].k = 3.0;
    rows[1].model_on = true;
    const auto ledger = stability_ledger(rows, {2.0, 1.0, 0.1, 10.0});
    EXPECT_NEAR(ledger.entries[0].margin, 0.0, 1e-15);
}

TEST(InfSup, SingleTriangleIsDeficient)
{
    auto mesh = std::make_shared<const Mesh>(std::vector<Point>{{0, 0}, {1, 0}, {0, 1}}, std::vector<Triangle>{{0, 1, 2}},
                                             std::vector<BoundaryEdge>{{{0, 1}, 1}, {{1, 2}, 1}, {{2, 0}, 1}});
    const auto est = infsup_estimate(FESpace(mesh, {1}));
    EXPECT_TRUE(est.deficient);
    EXPECT_FALSE(est.warning.empty());
    EXPECT_EQ(est.beta, 0.0);
}
