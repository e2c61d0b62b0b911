#pragma once

// Verification: error norms between solution streams, the time and space
// self-convergence studies, manufactured solutions and k-equation oracles.

#include <cmath>
#include <functional>
#include <numbers>

#include "config.hpp"
#include "norms.hpp"
#include "rates.hpp"
#include "run.hpp"

namespace urans
{

// ---------------------------------------------------------------------------
// Stream norms

struct SolutionStream
{
    std::shared_ptr<const FESpace> space;
    std::vector<Snapshot> snapshots; // increasing t
};

struct StreamNorms
{
    double max_l2 = 0.0;        // max over steps of ||u - u_ref||
    double h1_integral = 0.0;   // rectangle rule of ||grad (u - u_ref)||^2 over the window
    std::size_t points = 0;     // coincident steps used
};

/// Norms of u_h - u_ref over the steps of `coarse` with t in (t0, t1]
/// that coincide with a step of `fine`. The rectangle rule takes the value
/// at the right end of each interval between used points (as backward
/// Euler does), starting from t0. If the streams
/// live on different spaces, the coarse field is interpolated into the fine
/// space and the difference integrated there.
inline StreamNorms stream_norms(const SolutionStream& coarse, const SolutionStream& fine, double t0, double t1)
{
    if (coarse.snapshots.empty() || fine.snapshots.empty())
        throw std::invalid_argument("stream_norms: empty stream");
    const bool same_space = coarse.space == fine.space;
    StreamNorms out;
    double t_prev = t0;
    std::size_t j = 0;
    for (const auto& c : coarse.snapshots)
    {
        const double tol = 1e-9 * std::max(1.0, std::abs(c.t));
        if (c.t <= t0 + tol)
            continue;
        if (c.t > t1 + tol)
            break;
        while (j < fine.snapshots.size() && fine.snapshots[j].t < c.t - tol)
            ++j;
        if (j == fine.snapshots.size() || std::abs(fine.snapshots[j].t - c.t) > tol)
            continue;
        const double width = c.t - t_prev;
        t_prev = c.t;
        const FESpace& sp = *fine.space;
        const Vector diff = same_space ? Vector(c.v - fine.snapshots[j].v)
                                       : Vector(transfer_velocity(*coarse.space, c.v, sp) - fine.snapshots[j].v);
        out.max_l2 = std::max(out.max_l2, std::sqrt(l2_norm_squared(sp, diff)));
        out.h1_integral += width * h1_seminorm_squared(sp, diff);
        ++out.points;
    }
    if (out.points == 0)
        throw std::invalid_argument("stream_norms: no coincident time points in the window");
    return out;
}

// ---------------------------------------------------------------------------
// Self-convergence studies

struct StudyRun
{
    double resolution = 0.0;
    SolutionStream stream;
    RunResult result;
};

using StudyProgress = std::function<void(const std::string&)>;

/// One transient run of the configured problem, keeping the window. With a
/// non-empty artifact directory the run's statistics file is written there.
inline StudyRun run_for_study(const RunConfig& cfg, double t0, double t1, const std::filesystem::path& artifacts = {},
                              const StudyProgress& progress = {})
{
    validate(cfg, false);
    ProblemSetup setup = make_problem(cfg);
    Stepper stepper(setup.space, setup.wall, setup.options);
    RunControl ctl = make_control(cfg);
    ctl.t_end = t1;
    ctl.window = std::make_pair(t0, t1);
    ctl.diagnostics_stride = 0;
    const LedgerConstants constants = ledger_constants(cfg, stepper);
    RunObserver obs;
    std::optional<StatsWriter> stats;
    if (!artifacts.empty())
    {
        std::filesystem::create_directories(artifacts);
        std::ofstream(artifacts / "config.yaml") << serialize(cfg);
        stats.emplace(artifacts / "stats.csv", stats_metadata(cfg, *setup.space, constants));
        obs.on_record = [&](const BudgetRecord& r) { stats->write(r); };
    }
    if (progress)
        progress(fmt::format("run: {} vertices, dt = {}, t in [0, {}]", setup.space->mesh().num_vertices(), cfg.dt,
                             t1));
    TransientRun run(stepper, ctl, constants);
    StudyRun out;
    out.result = run.run(stepper.zero_state(), obs);
    out.stream.space = setup.space;
    out.stream.snapshots = std::move(out.result.window);
    return out;
}

inline std::vector<RateColumn> study_columns(bool space)
{
    return space ? std::vector<RateColumn>{{"max ||u_h - u_ah||", ColumnKind::norm},
                                           {"int ||grad(u_h - u_ah)||^2", ColumnKind::squared_norm}}
                 : std::vector<RateColumn>{{"max ||u - u_h||", ColumnKind::norm},
                                           {"int ||grad(u - u_h)||^2", ColumnKind::squared_norm}};
}

/// Errors of runs at each dt against a reference run at dt_ref (fixed mesh).
inline std::filesystem::path study_subdir(const std::filesystem::path& root, const std::string& name, double value)
{
    return root.empty() ? root : root / fmt::format("{}_{:.6g}", name, value);
}

inline RateTable time_rate_study(const StudyConfig& study, const std::filesystem::path& artifacts = {},
                                 const StudyProgress& progress = {})
{
    validate(study, false);
    RunConfig ref_cfg = study.run;
    ref_cfg.dt = study.dt_ref;
    const StudyRun ref = run_for_study(ref_cfg, study.window_t0, study.window_t1,
                                       study_subdir(artifacts, "ref_dt", study.dt_ref), progress);
    std::vector<double> res;
    std::vector<std::vector<double>> errs;
    for (double dt : study.dts)
    {
        RunConfig cfg = study.run;
        cfg.dt = dt;
        StudyRun r = run_for_study(cfg, study.window_t0, study.window_t1, study_subdir(artifacts, "dt", dt), progress);
        r.stream.space = ref.stream.space; // same mesh
        const auto n = stream_norms(r.stream, ref.stream, study.window_t0, study.window_t1);
        res.push_back(dt);
        errs.push_back({n.max_l2, n.h1_integral});
    }
    RateTable t = error_rate_table("dt", study_columns(false), res, errs);
    t.title = fmt::format("Errors and rates in time (reference dt = {}, window [{}, {}])", study.dt_ref,
                          study.window_t0, study.window_t1);
    return t;
}

/// Differences between consecutive mesh levels h0 alpha^i (fixed dt); rows
/// labelled by the coarser h, rate from the ratio of successive differences.
inline RateTable space_rate_study(const StudyConfig& study, const std::filesystem::path& artifacts = {},
                                  const StudyProgress& progress = {})
{
    validate(study, false);
    if (study.run.mesh != MeshSource::offset_circles)
        throw ConfigError("mesh", "space study needs mesh = offset_circles (target size per level)");
    std::vector<std::vector<double>> diffs;
    std::optional<StudyRun> prev;
    double h = study.h0;
    for (int level = 0; level < study.levels; ++level, h *= study.alpha)
    {
        RunConfig cfg = study.run;
        cfg.lc = h;
        StudyRun cur = run_for_study(cfg, study.window_t0, study.window_t1, study_subdir(artifacts, "h", h), progress);
        if (prev)
        {
            const auto n = stream_norms(prev->stream, cur.stream, study.window_t0, study.window_t1);
            diffs.push_back({n.max_l2, n.h1_integral});
        }
        prev = std::move(cur);
    }
    RateTable t = ratio_rate_table("h", study_columns(true), study.h0, study.alpha, diffs);
    t.title = fmt::format("Differences and rates in space (alpha = {}, dt = {}, window [{}, {}])", study.alpha,
                          study.run.dt, study.window_t0, study.window_t1);
    return t;
}

// ---------------------------------------------------------------------------
// Manufactured solutions

struct ManufacturedSolution
{
    std::function<Vec2(Point, double)> u;
    std::function<std::array<double, 4>(Point, double)> grad;   // row-major d u_i / d x_j
    std::function<Vec2(Point, double)> laplacian;
    std::function<Vec2(Point, double)> dudt;
    std::function<double(Point, double)> p;
    std::function<Vec2(Point, double)> grad_p;
};

/// Throws unless div u vanishes (to 1e-10) on a grid of sample points and times.
inline void check_divergence_free(const ManufacturedSolution& ms, double t_end = 1.0)
{
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j)
            for (double t : {0.0, 0.5 * t_end, t_end})
            {
                const Point x{i / 10.0, j / 10.0};
                const auto g = ms.grad(x, t);
                if (std::abs(g[0] + g[3]) > 1e-10)
                    throw std::invalid_argument(
                        fmt::format("manufactured velocity is not divergence free at ({}, {}), t = {}", x.x, x.y, t));
            }
}

/// f = u_t + (u . grad) u - nu lap u + grad p.
inline ForceFunction mms_forcing(const ManufacturedSolution& ms, double nu, bool stokes = false)
{
    return [ms, nu, stokes](Point x, double t) {
        const Vec2 u = ms.u(x, t), dt = ms.dudt(x, t), lap = ms.laplacian(x, t), gp = ms.grad_p(x, t);
        const auto g = ms.grad(x, t);
        Vec2 conv;
        if (!stokes)
            conv = {u.x * g[0] + u.y * g[1], u.x * g[2] + u.y * g[3]};
        return Vec2{dt.x + conv.x - nu * lap.x + gp.x, dt.y + conv.y - nu * lap.y + gp.y};
    };
}

/// Smooth steady field vanishing on the unit square boundary, from the
/// stream function sin^2(pi x) sin^2(pi y); p = cos(pi x) cos(pi y).
inline ManufacturedSolution mms_smooth_steady()
{
    using std::cos;
    using std::sin;
    constexpr double pi = std::numbers::pi;
    ManufacturedSolution m;
    m.u = [](Point x, double) {
        return Vec2{pi * sin(pi * x.x) * sin(pi * x.x) * sin(2 * pi * x.y),
                    -pi * sin(2 * pi * x.x) * sin(pi * x.y) * sin(pi * x.y)};
    };
    m.grad = [](Point x, double) {
        const double sx = sin(pi * x.x), sy = sin(pi * x.y);
        return std::array<double, 4>{pi * pi * sin(2 * pi * x.x) * sin(2 * pi * x.y),
                                     2 * pi * pi * sx * sx * cos(2 * pi * x.y),
                                     -2 * pi * pi * cos(2 * pi * x.x) * sy * sy,
                                     -pi * pi * sin(2 * pi * x.x) * sin(2 * pi * x.y)};
    };
    m.laplacian = [](Point x, double) {
        // u_x = pi sin^2(pi x) sin(2 pi y) = (pi/2)(1 - cos 2 pi x) sin 2 pi y
        const double c2x = cos(2 * pi * x.x), s2x = sin(2 * pi * x.x), c2y = cos(2 * pi * x.y),
                     s2y = sin(2 * pi * x.y);
        const double lx = (pi / 2) * (4 * pi * pi * c2x * s2y - 4 * pi * pi * (1 - c2x) * s2y);
        const double ly = -(pi / 2) * (-4 * pi * pi * s2x * (1 - c2y) + 4 * pi * pi * s2x * c2y);
        return Vec2{lx, ly};
    };
    m.dudt = [](Point, double) { return Vec2{}; };
    m.p = [](Point x, double) { return cos(pi * x.x) * cos(pi * x.y); };
    m.grad_p = [](Point x, double) {
        return Vec2{-pi * sin(pi * x.x) * cos(pi * x.y), -pi * cos(pi * x.x) * sin(pi * x.y)};
    };
    return m;
}

/// Quadratic-in-space, time-dependent field with p linear in space: the
/// exact solution lies in the discrete space, so the error is dominated by
/// the time discretisation.
inline ManufacturedSolution mms_quadratic_unsteady()
{
    using std::cos;
    using std::sin;
    ManufacturedSolution m;
    // u = a(t) (x^2, -2xy) + b(t) (y^2, 0),  a = cos(2t), b = sin(3t)
    m.u = [](Point x, double t) {
        const double a = cos(2 * t), b = sin(3 * t);
        return Vec2{a * x.x * x.x + b * x.y * x.y, -2 * a * x.x * x.y};
    };
    m.grad = [](Point x, double t) {
        const double a = cos(2 * t), b = sin(3 * t);
        return std::array<double, 4>{2 * a * x.x, 2 * b * x.y, -2 * a * x.y, -2 * a * x.x};
    };
    m.laplacian = [](Point, double t) { return Vec2{2 * cos(2 * t) + 2 * sin(3 * t), 0.0}; };
    m.dudt = [](Point x, double t) {
        const double da = -2 * sin(2 * t), db = 3 * cos(3 * t);
        return Vec2{da * x.x * x.x + db * x.y * x.y, -2 * da * x.x * x.y};
    };
    m.p = [](Point x, double t) { return cos(t) * (x.x + x.y - 1.0); };
    m.grad_p = [](Point, double t) { return Vec2{cos(t), cos(t)}; };
    return m;
}

struct MmsError
{
    double h = 0.0;
    double dt = 0.0;
    double l2 = 0.0;   // ||u - u_h|| (final time, or max over steps for unsteady runs)
    double h1 = 0.0;   // ||grad(u - u_h)|| at the same time
    int steps = 0;
};

/// Steady problem on the n x n square: backward Euler marched with a large
/// step until the increment stalls (the lagged convection makes this a
/// Picard iteration for the steady equations).
inline MmsError mms_steady(const ManufacturedSolution& ms, int n, double nu, bool stokes = false,
                           int max_steps = 200, double tol = 1e-13)
{
    check_divergence_free(ms);
    auto space = std::make_shared<const FESpace>(std::make_shared<const Mesh>(build_structured_square(n)),
                                                 std::set<int>{1});
    StepperOptions o;
    o.params.nu = nu;
    o.params.t_star = std::numeric_limits<double>::infinity();
    o.force = mms_forcing(ms, nu, stokes);
    o.boundary = [ms](Point x, double t) { return ms.u(x, t); };
    o.stokes = stokes;
    Stepper stepper(space, compute_wall_distance(*space), o);
    State s = stepper.zero_state();
    const double dt = 1e3;
    MmsError err;
    err.h = space->mesh().h_max();
    err.dt = dt;
    for (; err.steps < max_steps; ++err.steps)
    {
        auto [next, rep] = stepper.step(s, dt);
        const double inc = (next.v - s.v).norm();
        s = std::move(next);
        if (inc <= tol * s.v.norm())
            break;
    }
    err.l2 = std::sqrt(l2_error_squared(*space, s.v, [&](Point x) { return ms.u(x, 0.0); }));
    err.h1 = std::sqrt(h1_error_squared(*space, s.v, [&](Point x) { return ms.grad(x, 0.0); }));
    return err;
}

/// Unsteady problem on the n x n square from the exact initial value;
/// errors are maxima over the steps in (0, t_end].
inline MmsError mms_unsteady(const ManufacturedSolution& ms, int n, double nu, double dt, double t_end)
{
    check_divergence_free(ms, t_end);
    auto space = std::make_shared<const FESpace>(std::make_shared<const Mesh>(build_structured_square(n)),
                                                 std::set<int>{1});
    StepperOptions o;
    o.params.nu = nu;
    o.params.t_star = std::numeric_limits<double>::infinity();
    o.force = mms_forcing(ms, nu);
    o.boundary = [ms](Point x, double t) { return ms.u(x, t); };
    Stepper stepper(space, compute_wall_distance(*space), o);
    State s = stepper.initial_state(space->interpolate([&](Point x) { return ms.u(x, 0.0); }), 0.0);
    MmsError err;
    err.h = space->mesh().h_max();
    err.dt = dt;
    const auto steps = static_cast<int>(std::llround(t_end / dt));
    for (int i = 0; i < steps; ++i)
    {
        s = stepper.step(s, dt).first;
        const double t = s.t;
        err.l2 = std::max(err.l2, std::sqrt(l2_error_squared(*space, s.v, [&](Point x) { return ms.u(x, t); })));
        err.h1 = std::max(err.h1, std::sqrt(h1_error_squared(*space, s.v, [&](Point x) { return ms.grad(x, t); })));
        ++err.steps;
    }
    return err;
}

struct MmsStudy
{
    RateTable table;
    std::vector<MmsError> runs;
};

/// Spatial rates on n x n squares for the smooth steady solution.
inline MmsStudy mms_space_study(const std::vector<int>& ns = {8, 16, 32}, double nu = 0.5)
{
    MmsStudy out;
    const auto ms = mms_smooth_steady();
    std::vector<double> h;
    std::vector<std::vector<double>> e;
    for (int n : ns)
    {
        out.runs.push_back(mms_steady(ms, n, nu));
        h.push_back(out.runs.back().h);
        e.push_back({out.runs.back().l2, out.runs.back().h1});
    }
    out.table = error_rate_table("h", {{"||u - u_h||", ColumnKind::norm}, {"||grad(u - u_h)||", ColumnKind::norm}},
                                 h, e);
    out.table.title = "Manufactured solution, spatial convergence";
    return out;
}

/// Temporal rate under dt halving for the quadratic unsteady solution.
inline MmsStudy mms_time_study(const std::vector<double>& dts = {0.1, 0.05, 0.025, 0.0125}, int n = 4,
                               double nu = 0.1, double t_end = 1.0)
{
    MmsStudy out;
    const auto ms = mms_quadratic_unsteady();
    std::vector<std::vector<double>> e;
    for (double dt : dts)
    {
        out.runs.push_back(mms_unsteady(ms, n, nu, dt, t_end));
        e.push_back({out.runs.back().l2, out.runs.back().h1});
    }
    out.table = error_rate_table("dt",
                                 {{"max ||u - u_h||", ColumnKind::norm}, {"max ||grad(u - u_h)||", ColumnKind::norm}},
                                 dts, e);
    out.table.title = "Manufactured solution, temporal convergence";
    return out;
}

// ---------------------------------------------------------------------------
// k-equation oracles

struct OdeOracleReport
{
    double homogeneous_max_rel_error = 0.0;  // exact update vs k0 exp(-(sqrt2/2) t / tau)
    std::vector<double> be_dts;
    std::vector<double> be_errors;           // BE global error at T for constant eps
    std::vector<double> be_orders;
    double piecewise_max_rel_error = 0.0;    // exact update vs product of exponentials

    bool passed() const
    {
        if (homogeneous_max_rel_error > 1e-12 || piecewise_max_rel_error > 1e-12 || be_orders.empty())
            return false;
        for (double p : be_orders)
            if (p < 0.9 || p > 1.1)
                return false;
        return true;
    }
};

inline OdeOracleReport ode_oracle_suite(double tau = 0.1)
{
    OdeOracleReport rep;
    const double decay = std::numbers::sqrt2 / (2.0 * tau);

    {
        const double k0 = 1.7, dt = 1e-3;
        double k = k0;
        for (int n = 1; n <= 2000; ++n)
        {
            k = k_update_exact(k, dt, tau, 0.0);
            const double exact = k0 * std::exp(-decay * n * dt);
            rep.homogeneous_max_rel_error = std::max(rep.homogeneous_max_rel_error, std::abs(k - exact) / exact);
        }
    }
    {
        const double k0 = 0.8, eps = 3.0, T = 1.0;
        const double exact = k0 * std::exp((eps - decay) * T);
        for (int steps = 50; steps <= 1600; steps *= 2)
        {
            const double dt = T / steps;
            double k = k0;
            for (int n = 0; n < steps; ++n)
                k = k_update_be(k, dt, tau, eps);
            rep.be_dts.push_back(dt);
            rep.be_errors.push_back(std::abs(k - exact));
        }
        for (std::size_t i = 1; i < rep.be_dts.size(); ++i)
            rep.be_orders.push_back(
                observed_order(rep.be_errors[i - 1], rep.be_errors[i], rep.be_dts[i - 1], rep.be_dts[i]));
    }
    {
        // eps piecewise constant on [0, 2] with breaks on the step grid.
        const double dt = 0.01, k0 = 2.0;
        auto eps_at = [](int n) {
            const int piece = n / 37;
            return 1.5 + 4.0 * std::sin(1.0 + piece) * std::sin(1.0 + piece);
        };
        double k = k0, log_exact = std::log(k0);
        for (int n = 0; n < 200; ++n)
        {
            const double e = eps_at(n);
            k = k_update_exact(k, dt, tau, e);
            log_exact += (e - decay) * dt;
            const double exact = std::exp(log_exact);
            rep.piecewise_max_rel_error = std::max(rep.piecewise_max_rel_error, std::abs(k - exact) / exact);
        }
    }
    return rep;
}

} // namespace urans
