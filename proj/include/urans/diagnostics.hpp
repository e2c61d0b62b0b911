#pragma once

// Runtime checks of the discrete stability structure of the scheme: the
// per-step kinetic energy identity obtained by testing with 2 dt v^{n+1},
// the k-equation identity, the cumulative stability bound, and small-mesh
// estimates of the discrete Poincare and inf-sup constants.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "assembly.hpp"

namespace urans
{

/// One row of the statistics stream (state after step n).
struct BudgetRecord
{
    std::int64_t step = 0;
    double t = 0.0;
    double kinetic_energy = 0.0;   // 1/2 ||v||^2
    double nu_dissipation = 0.0;   // nu ||grad v||^2
    double nut_dissipation = 0.0;  // integral of nu_T |grad v|^2
    double k = 0.0;
    double forcing_power = 0.0;    // (f, v)
    double energy_residual = 0.0;
    double k_residual = 0.0;
    double increment_sq = 0.0;     // ||v^{n+1} - v^n||^2
    double force_sq = 0.0;         // ||f^{n+1}||^2
    double eps = 0.0;              // production factor of the k equation
    bool model_on = false;
    double solve_residual = 0.0;

    bool finite() const
    {
        for (double x : {t, kinetic_energy, nu_dissipation, nut_dissipation, k, forcing_power, energy_residual,
                         k_residual, increment_sq, force_sq, eps, solve_residual})
            if (!std::isfinite(x))
                return false;
        return true;
    }
};

/// Terms of ||v1||^2 - ||v0||^2 + ||v1 - v0||^2 + 2 dt (a grad v1, grad v1) - 2 dt (f, v1).
struct EnergyTerms
{
    double new_sq = 0.0;
    double old_sq = 0.0;
    double increment_sq = 0.0;
    double viscous = 0.0; // 2 dt (a grad v1, grad v1)
    double forcing = 0.0; // 2 dt (f, v1)

    double raw() const { return new_sq - old_sq + increment_sq + viscous - forcing; }

    /// Residual relative to the largest term; 0 when all terms vanish.
    double relative() const
    {
        const double scale = std::max({new_sq, old_sq, increment_sq, std::abs(viscous), std::abs(forcing)});
        return scale > 0.0 ? std::abs(raw()) / scale : 0.0;
    }
};

/// Evaluates the energy identity of one step from assembled operators:
/// M the velocity mass matrix, A the viscous operator used in the step,
/// load the vector (f^{n+1}, phi_i).
inline EnergyTerms energy_terms(const SparseMatrix& M, const SparseMatrix& A, const Vector& load, const Vector& v0,
                                const Vector& v1, double dt)
{
    EnergyTerms e;
    const Vector dv = v1 - v0;
    e.new_sq = v1.dot(M * v1);
    e.old_sq = v0.dot(M * v0);
    e.increment_sq = dv.dot(M * dv);
    e.viscous = 2.0 * dt * v1.dot(A * v1);
    e.forcing = 2.0 * dt * load.dot(v1);
    return e;
}

inline double energy_residual(const SparseMatrix& M, const SparseMatrix& A, const Vector& load, const Vector& v0,
                              const Vector& v1, double dt)
{
    return energy_terms(M, A, load, v0, v1, dt).relative();
}

/// Residual of the backward Euler k equation multiplied through by dt,
///   k1 - k0 + dt (sqrt2/2) k1 / tau - dt eps k0,
/// relative to max(k0, k1, dt eps k0).
inline double k_residual(double k0, double k1, double dt, double tau, double eps)
{
    const double decay = dt * std::numbers::sqrt2 / (2.0 * tau) * k1;
    const double production = dt * eps * k0;
    const double r = (k1 - k0) + decay - production;
    const double scale = std::max({std::abs(k0), std::abs(k1), std::abs(production)});
    return scale > 0.0 ? std::abs(r) / scale : 0.0;
}

// ---------------------------------------------------------------------------
// Cumulative stability bound

struct LedgerConstants
{
    double area = 1.0;     // |Omega|
    double nu = 1.0;
    double tau = 1.0;
    double poincare = 1.0; // lambda with ||v||^2 <= ||grad v||^2 / lambda on the discrete space

    double young_constant() const { return 1.0 / (nu * poincare); }
};

enum class LedgerStatus
{
    ok,        // margin <= 0
    warning,   // 0 < margin <= 5% of the right side
    violation  // margin above 5% of the right side
};

struct LedgerEntry
{
    std::int64_t step = 0;
    double t = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0; // lhs - rhs
    LedgerStatus status = LedgerStatus::ok;
};

struct StabilityLedger
{
    std::vector<LedgerEntry> entries;

    double max_margin() const
    {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& e : entries)
            m = std::max(m, e.margin);
        return m;
    }
    bool holds() const { return entries.empty() || max_margin() <= 0.0; }
    bool flagged() const
    {
        return std::any_of(entries.begin(), entries.end(),
                           [](const auto& e) { return e.status == LedgerStatus::violation; });
    }
};

/// Left minus right side of
///   ||v^N||^2 + 2|O| k^N + dt sum (nu ||grad v^{n+1}||^2 + sqrt2/tau |O| k^{n+1})
///     + sum ||v^{n+1} - v^n||^2  <=  C dt sum ||f^{n+1}||^2 + ||v^0||^2 + 2|O| k^0
/// for every N, with C = 1/(nu lambda). records[0] is the initial state.
/// When the model is switched on mid-run the initial k is added to the
/// initial-data term at that step.
inline StabilityLedger stability_ledger(const std::vector<BudgetRecord>& records, const LedgerConstants& c)
{
    StabilityLedger ledger;
    if (records.empty())
        return ledger;
    const double area = c.area;
    const double C = c.young_constant();
    const double sqrt2_tau = std::numbers::sqrt2 / c.tau;

    double initial = 2.0 * records[0].kinetic_energy + 2.0 * area * records[0].k;
    double forcing = 0.0, dissipation = 0.0, increments = 0.0;
    for (std::size_t n = 1; n < records.size(); ++n)
    {
        const auto& prev = records[n - 1];
        const auto& cur = records[n];
        const double dt = cur.t - prev.t;
        const double k_decayed = prev.model_on ? cur.k : 0.0;
        if (!prev.model_on && cur.model_on)
            initial += 2.0 * area * cur.k;
        forcing += C * dt * cur.force_sq;
        dissipation += dt * (cur.nu_dissipation + sqrt2_tau * area * k_decayed);
        increments += cur.increment_sq;

        LedgerEntry e;
        e.step = cur.step;
        e.t = cur.t;
        e.lhs = 2.0 * cur.kinetic_energy + 2.0 * area * cur.k + dissipation + increments;
        e.rhs = forcing + initial;
        e.margin = e.lhs - e.rhs;
        if (e.margin > 0.05 * std::abs(e.rhs))
            e.status = LedgerStatus::violation;
        else if (e.margin > 0.0)
            e.status = LedgerStatus::warning;
        ledger.entries.push_back(e);
    }
    return ledger;
}

// ---------------------------------------------------------------------------
// Poincare and inf-sup constants

/// Smallest eigenvalue of K x = lambda M x for one velocity component on
/// the interior dofs (the discrete Poincare constant), by inverse iteration.
inline double poincare_constant(const FESpace& space, const SparseMatrix& mass, const SparseMatrix& stiffness,
                                double tol = 1e-12, int max_iter = 500)
{
    std::vector<int> idx;
    for (std::size_t n = 0; n < space.num_nodes(); ++n)
        if (!space.is_dirichlet(space.velocity_dof(n, 0)))
            idx.push_back(static_cast<int>(space.velocity_dof(n, 0)));
    if (idx.empty())
        throw std::invalid_argument("poincare_constant: no interior dofs");
    std::vector<int> map(space.num_velocity_dofs(), -1);
    for (std::size_t i = 0; i < idx.size(); ++i)
        map[idx[i]] = static_cast<int>(i);

    auto restrict = [&](const SparseMatrix& A) {
        std::vector<Eigen::Triplet<double>> trip;
        for (Eigen::Index c = 0; c < A.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(A, c); it; ++it)
                if (map[it.row()] >= 0 && map[it.col()] >= 0)
                    trip.emplace_back(map[it.row()], map[it.col()], it.value());
        const auto n = static_cast<Eigen::Index>(idx.size());
        SparseMatrix r(n, n);
        r.setFromTriplets(trip.begin(), trip.end());
        return r;
    };
    const SparseMatrix K = restrict(stiffness), M = restrict(mass);
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(K);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("poincare_constant: stiffness factorisation failed");

    Vector x = Vector::Ones(K.rows());
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it)
    {
        x = ldlt.solve(M * x);
        x /= std::sqrt(x.dot(M * x));
        const double next = x.dot(K * x);
        if (it > 0 && std::abs(next - lambda) <= tol * next)
        {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return lambda;
}

struct InfSupEstimate
{
    double beta = 0.0;
    bool deficient = false; // no free velocity dofs or no pressure modes
    std::string warning;
};

/// beta^2 = smallest eigenvalue of (B H^{-1} B^T) p = beta^2 Mp p over
/// mean-zero pressures, where H is the velocity norm matrix on free dofs,
/// B the divergence block restricted to free dofs, Mp the pressure mass
/// and m the pressure mean weights. Dense; small problems only.
inline InfSupEstimate infsup_estimate_dense(const Eigen::MatrixXd& H, const Eigen::MatrixXd& B,
                                            const Eigen::MatrixXd& Mp, const Vector& m)
{
    InfSupEstimate est;
    const auto np = B.rows();
    if (H.rows() == 0 || np < 2)
    {
        est.deficient = true;
        est.warning = "no free velocity dofs or too few pressure dofs; beta reported as 0";
        return est;
    }
    // Orthonormal basis of the complement of m.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    const Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::MatrixXd Z = Q.rightCols(np - 1);

    const Eigen::MatrixXd BZ = B.transpose() * Z; // nv x (np-1)
    const Eigen::MatrixXd S = BZ.transpose() * Eigen::LLT<Eigen::MatrixXd>(H).solve(BZ);
    const Eigen::MatrixXd P = Z.transpose() * Mp * Z;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, P);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("infsup_estimate: eigensolver failed");
    const double lmin = eig.eigenvalues().minCoeff();
    est.beta = std::sqrt(std::max(0.0, lmin));
    if (H.rows() < np - 1)
    {
        est.deficient = true;
        est.warning = "fewer free velocity dofs than pressure modes";
    }
    return est;
}

/// Discrete inf-sup constant of the Taylor-Hood pair on `space`, with the
/// full H1 norm on the velocity. Throws if the space exceeds `max_dofs`.
inline InfSupEstimate infsup_estimate(const FESpace& space, std::size_t max_dofs = 1500)
{
    const auto total = space.num_velocity_dofs() + space.num_pressure_dofs();
    if (total > max_dofs)
        throw std::length_error("infsup_estimate: " + std::to_string(total) + " dofs exceed the dense cap of "
                                + std::to_string(max_dofs));
    const VelocityPattern pattern(space);
    const Eigen::MatrixXd H_full = Eigen::MatrixXd(assemble_mass(pattern))
                                   + Eigen::MatrixXd(assemble_diffusion(pattern, CoefficientField::constant(1.0)));
    const Eigen::MatrixXd B_full(assemble_divergence(space));

    std::vector<int> free;
    for (std::size_t d = 0; d < space.num_velocity_dofs(); ++d)
        if (!space.is_dirichlet(d))
            free.push_back(static_cast<int>(d));
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd H(nf, nf), B(B_full.rows(), nf);
    for (Eigen::Index j = 0; j < nf; ++j)
    {
        B.col(j) = B_full.col(free[j]);
        for (Eigen::Index i = 0; i < nf; ++i)
            H(i, j) = H_full(free[i], free[j]);
    }
    return infsup_estimate_dense(H, B, Eigen::MatrixXd(assemble_pressure_mass(space)), pressure_mean_weights(space));
}

} // namespace urans
