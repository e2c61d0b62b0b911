#pragma once

// Fully discrete backward Euler stepping of the coupled velocity-pressure
// system and the scalar k equation. Each step is one linear saddle-point
// solve: the advecting velocity in the convection term and the k in the
// eddy viscosity are taken from the previous time level.

#include <chrono>
#include <memory>
#include <optional>

#include "diagnostics.hpp"
#include "model.hpp"
#include "saddle.hpp"

namespace urans
{

struct State
{
    Vector v;             // velocity coefficients, Dirichlet dofs hold the boundary data
    Vector p;             // pressure coefficients, zero mean
    double k = 0.0;       // turbulent kinetic energy (0 while the model is off)
    bool model_on = false;
    double t = 0.0;
    std::int64_t step = 0;

    KState k_state() const { return {k, t}; }
};

struct StepReport
{
    double solve_residual = 0.0;
    double energy_residual = 0.0; // only meaningful with homogeneous boundary data
    double k_residual = 0.0;
    double seconds = 0.0;
    BudgetRecord budget;
};

using BoundaryFunction = std::function<Vec2(Point, double)>;

struct StepperOptions
{
    ModelParams params;
    KUpdateMode k_mode = KUpdateMode::backward_euler;
    ViscousForm form = ViscousForm::full_gradient;
    ForceFunction force = [](Point, double) { return Vec2{}; };
    /// Time-dependent Dirichlet data; homogeneous (no-slip) when empty.
    std::optional<BoundaryFunction> boundary;
    /// Drop the convection term (Stokes limit).
    bool stokes = false;
};

class Stepper
{
public:
    Stepper(std::shared_ptr<const FESpace> space, WallDistanceField wall, StepperOptions options)
        : space_(std::move(space)), wall_(std::move(wall)), opt_(std::move(options)), pattern_(*space_)
    {
        opt_.params.validate();
        mass_ = assemble_mass(pattern_);
        stiffness_ = assemble_diffusion(pattern_, CoefficientField::constant(1.0), opt_.form);
        damped_ = assemble_diffusion(pattern_, damping_weight(*space_, opt_.params, wall_), opt_.form);
        divergence_ = assemble_divergence(*space_);
        mean_weights_ = pressure_mean_weights(*space_);
    }

    const FESpace& space() const { return *space_; }
    std::shared_ptr<const FESpace> space_ptr() const { return space_; }
    const WallDistanceField& wall_distance() const { return wall_; }
    const StepperOptions& options() const { return opt_; }
    const SparseMatrix& mass() const { return mass_; }
    /// (grad v, grad w), or 2 (sym grad v, sym grad w).
    const SparseMatrix& stiffness() const { return stiffness_; }
    /// Same form weighted by the damping profile g(y).
    const SparseMatrix& damped_stiffness() const { return damped_; }
    const SparseMatrix& divergence() const { return divergence_; }
    const Vector& mean_weights() const { return mean_weights_; }

    /// Viscous operator nu K + k tau K_g for a given turbulence state.
    SparseMatrix viscous_operator(double k, bool model_on) const
    {
        const double s = model_on ? k * opt_.params.tau : 0.0;
        return opt_.params.nu * stiffness_ + s * damped_;
    }

    /// State at time t from an initial velocity; boundary data applied.
    State initial_state(Vector v0, double t0 = 0.0) const
    {
        State s;
        s.v = std::move(v0);
        apply_boundary(s.v, t0);
        s.p = Vector::Zero(static_cast<Eigen::Index>(space_->num_pressure_dofs()));
        s.t = t0;
        return s;
    }

    State zero_state(double t0 = 0.0) const
    {
        return initial_state(Vector::Zero(static_cast<Eigen::Index>(space_->num_velocity_dofs())), t0);
    }

    /// Switches the turbulence model on with k from the mixing-length initialisation.
    void activate_model(State& s) const
    {
        s.k = k_initialize(*space_, wall_, opt_.params).k;
        s.model_on = true;
    }

    /// Budget row describing a state on its own (used for the initial state).
    BudgetRecord describe(const State& s) const
    {
        BudgetRecord r;
        r.step = s.step;
        r.t = s.t;
        r.kinetic_energy = 0.5 * s.v.dot(mass_ * s.v);
        r.nu_dissipation = opt_.params.nu * s.v.dot(stiffness_ * s.v);
        r.nut_dissipation = s.model_on ? s.k * opt_.params.tau * s.v.dot(damped_ * s.v) : 0.0;
        r.k = s.k;
        const Vector load = assemble_load(*space_, opt_.force, s.t);
        r.forcing_power = load.dot(s.v);
        r.force_sq = force_l2_squared(space_->mesh(), opt_.force, s.t);
        r.model_on = s.model_on;
        return r;
    }

    /// Advances one step of size dt.
    std::pair<State, StepReport> step(const State& s, double dt)
    {
        if (!(dt > 0.0))
            throw std::invalid_argument("step: dt must be > 0");
        const auto start = std::chrono::steady_clock::now();
        const double t1 = s.t + dt;
        const auto& par = opt_.params;

        const SparseMatrix viscous = viscous_operator(s.k, s.model_on);
        SaddleSystem sys;
        sys.A = (1.0 / dt) * mass_ + viscous;
        if (!opt_.stokes)
            sys.A += assemble_trilinear(pattern_, s.v);
        const Vector load = assemble_load(*space_, opt_.force, t1);
        sys.f = load + (1.0 / dt) * (mass_ * s.v);
        sys.B = divergence_;
        sys.g = Vector::Zero(static_cast<Eigen::Index>(space_->num_pressure_dofs()));

        const ReducedSaddle reduced = apply_dirichlet(sys, *space_, boundary_values(t1));
        const SaddleSolution sol = solver_.solve(reduced.A, reduced.B, mean_weights_, reduced.f, reduced.g);

        State next;
        next.v = reduced.extend(sol.v);
        // The block system carries +B^T p; the momentum equation has -(div w, q).
        next.p = -sol.p;
        next.t = t1;
        next.step = s.step + 1;
        next.model_on = s.model_on;

        StepReport rep;
        rep.solve_residual = sol.residual;
        const EnergyTerms energy = energy_terms(mass_, viscous, load, s.v, next.v, dt);
        rep.energy_residual = energy.relative();

        const double damped_norm = next.v.dot(damped_ * next.v);
        double eps = 0.0;
        if (s.model_on)
        {
            eps = par.tau / space_->mesh().domain_area() * damped_norm;
            next.k = k_update(opt_.k_mode, s.k, dt, par.tau, eps);
            rep.k_residual = k_residual(s.k, next.k, dt, par.tau, eps);
        }

        auto& b = rep.budget;
        b.step = next.step;
        b.t = t1;
        b.kinetic_energy = 0.5 * energy.new_sq;
        b.nu_dissipation = par.nu * next.v.dot(stiffness_ * next.v);
        b.nut_dissipation = s.model_on ? s.k * par.tau * damped_norm : 0.0;
        b.k = next.k;
        b.forcing_power = load.dot(next.v);
        b.energy_residual = rep.energy_residual;
        b.k_residual = rep.k_residual;
        b.increment_sq = energy.increment_sq;
        b.force_sq = force_l2_squared(space_->mesh(), opt_.force, t1);
        b.eps = eps;
        b.model_on = next.model_on;
        b.solve_residual = sol.residual;

        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return {std::move(next), rep};
    }

private:
    DirichletValues boundary_values(double t) const
    {
        DirichletValues values;
        if (!opt_.boundary)
            return values;
        const auto& dofs = space_->dirichlet_dofs();
        const auto nn = space_->num_nodes();
        for (int d : dofs)
        {
            const auto node = static_cast<std::size_t>(d) % nn;
            const int comp = static_cast<std::size_t>(d) < nn ? 0 : 1;
            const Vec2 g = (*opt_.boundary)(space_->node_point(node), t);
            values[d] = comp == 0 ? g.x : g.y;
        }
        return values;
    }

    void apply_boundary(Vector& v, double t) const
    {
        if (!opt_.boundary)
        {
            space_->zero_dirichlet(v);
            return;
        }
        for (const auto& [d, val] : boundary_values(t))
            v[d] = val;
    }

    std::shared_ptr<const FESpace> space_;
    WallDistanceField wall_;
    StepperOptions opt_;
    VelocityPattern pattern_;
    SparseMatrix mass_, stiffness_, damped_, divergence_;
    Vector mean_weights_;
    SaddleSolver solver_;
};

} // namespace urans
