#pragma once

// Subcommands of the command-line front end. Each returns the process exit
// status: 0 success, 1 a failed check or step, 2 bad input.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "config.hpp"
#include "output.hpp"
#include "verify.hpp"

namespace urans
{

enum ExitCode
{
    exit_ok = 0,
    exit_failed = 1,
    exit_bad_input = 2
};

struct CommandIO
{
    std::ostream& out = std::cout;
    std::ostream& err = std::cerr;
};

// ---------------------------------------------------------------------------
// run

struct RunOptions
{
    std::filesystem::path config;
    bool dry_run = false;
    std::optional<std::filesystem::path> output; // overrides output_dir
};

inline std::filesystem::path output_dir_of(const RunConfig& c, const std::optional<std::filesystem::path>& override_dir)
{
    return override_dir ? *override_dir : c.resolve(c.output_dir);
}

/// Runs one configured simulation. Artifacts in the output directory:
/// config.yaml, stats.csv, snapshots/step_NNNNNNN.vtk, final.state,
/// summary.json; last_good.state if a step fails.
inline int cmd_run(const RunOptions& opt, CommandIO io = {})
{
    RunConfig cfg;
    try
    {
        cfg = load_run_config(opt.config);
        validate(cfg, true);
    }
    catch (const ConfigError& e)
    {
        io.err << "error: " << e.what() << '\n';
        return exit_bad_input;
    }
    const auto dir = output_dir_of(cfg, opt.output);
    if (opt.dry_run)
    {
        io.out << "configuration valid\n" << serialize(cfg);
        if (cfg.mesh == MeshSource::offset_circles)
        {
            const auto mesh = offset_circles_mesh_path(cfg.lc, mesh_dir_of(cfg));
            io.out << "# mesh " << mesh.string()
                   << (std::filesystem::exists(mesh) ? " (present)" : " (will be generated with gmsh)") << '\n';
        }
        io.out << "# output directory " << dir.string() << " (nothing written)\n";
        return exit_ok;
    }

    std::optional<ProblemSetup> setup;
    try
    {
        setup = make_problem(cfg);
    }
    catch (const ConfigError& e)
    {
        io.err << "error: " << e.what() << '\n';
        return exit_bad_input;
    }
    catch (const std::exception& e)
    {
        io.err << "error: mesh: " << e.what() << '\n';
        return exit_bad_input;
    }
    Stepper stepper(setup->space, setup->wall, setup->options);

    State initial = stepper.zero_state();
    if (!cfg.restart.empty())
    {
        try
        {
            initial = read_state_file(cfg.resolve(cfg.restart));
        }
        catch (const FormatError& e)
        {
            io.err << "error: restart: " << e.what() << '\n';
            return exit_bad_input;
        }
        if (initial.v.size() != static_cast<Eigen::Index>(setup->space->num_velocity_dofs()) ||
            initial.p.size() != static_cast<Eigen::Index>(setup->space->num_pressure_dofs()))
        {
            io.err << "error: restart: state does not match the mesh\n";
            return exit_bad_input;
        }
        if (initial.t >= cfg.t_end)
        {
            io.err << "error: t_end: restart state is already at t = " << initial.t << '\n';
            return exit_bad_input;
        }
    }

    std::filesystem::create_directories(dir);
    std::ofstream(dir / "config.yaml") << serialize(cfg);
    const LedgerConstants constants = ledger_constants(cfg, stepper);
    StatsWriter stats(dir / "stats.csv", stats_metadata(cfg, *setup->space, constants));
    if (cfg.snapshot_every > 0)
        std::filesystem::create_directories(dir / "snapshots");

    RunControl ctl = make_control(cfg);
    StabilityLedger last_ledger;
    RunObserver obs;
    obs.on_record = [&](const BudgetRecord& r) { stats.write(r); };
    obs.on_snapshot = [&](const State& s) {
        write_vtk_file(dir / "snapshots" / fmt::format("step_{:07d}.vtk", s.step), *setup->space, s, &setup->wall);
    };
    obs.on_ledger = [&](const StabilityLedger& l) { last_ledger = l; };
    obs.on_failure = [&](const State& s) { write_state_file(dir / "last_good.state", s); };

    TransientRun run(stepper, ctl, constants);
    RunResult res;
    try
    {
        res = run.run(std::move(initial), obs);
    }
    catch (const std::exception& e)
    {
        io.err << "error: step failed: " << e.what() << " (last good state in " << (dir / "last_good.state").string()
               << ")\n";
        return exit_failed;
    }
    write_state_file(dir / "final.state", res.final);

    double max_er = 0.0, max_kr = 0.0, min_k = std::numeric_limits<double>::infinity();
    for (const auto& r : res.records)
    {
        max_er = std::max(max_er, r.energy_residual);
        max_kr = std::max(max_kr, r.k_residual);
        min_k = std::min(min_k, r.k);
    }
    nlohmann::json summary{{"steps", res.records.size() - 1},
                           {"t_final", res.final.t},
                           {"seconds", res.seconds},
                           {"max_energy_residual", max_er},
                           {"max_k_residual", max_kr},
                           {"min_k", min_k},
                           {"ledger_max_margin", last_ledger.entries.empty() ? 0.0 : last_ledger.max_margin()},
                           {"ledger_flagged", last_ledger.flagged()}};
    if (res.k_init)
    {
        summary["k_init"] = *res.k_init;
        summary["activation_time"] = *res.activation_time;
    }
    std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
    io.out << fmt::format("{} steps to t = {:.6g} in {:.1f} s; max energy residual {:.3g}, max k residual {:.3g}",
                          res.records.size() - 1, res.final.t, res.seconds, max_er, max_kr);
    if (res.k_init)
        io.out << fmt::format("; k_init = {:.10g} at t = {:.6g}", *res.k_init, *res.activation_time);
    io.out << "\nartifacts in " << dir.string() << '\n';
    return exit_ok;
}

// ---------------------------------------------------------------------------
// rates

enum class StudyKind
{
    time,
    space
};

struct RatesOptions
{
    std::filesystem::path config;
    std::optional<StudyKind> kind;
    bool paper_scale = false;
    bool self_test = false;
    std::optional<std::filesystem::path> output;
};

/// Meshes finer than this size make a study paper-scale (hours of runtime).
inline constexpr double paper_scale_lc = 0.05;

inline double finest_mesh_size(const StudyConfig& s, StudyKind kind)
{
    if (s.run.mesh != MeshSource::offset_circles)
        return std::numeric_limits<double>::infinity();
    return kind == StudyKind::space ? s.h0 * std::pow(s.alpha, s.levels - 1) : s.run.lc;
}

inline void write_rate_table(const RateTable& t, const std::filesystem::path& dir, const std::string& stem)
{
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / (stem + ".csv"));
    t.write_csv(csv);
    std::ofstream txt(dir / (stem + ".txt"));
    t.write_text(txt);
}

/// Synthetic pure-power data through both estimators; exact rates expected.
inline int rates_self_test(CommandIO io)
{
    bool ok = true;
    for (int p : {1, 2, 3})
    {
        const std::vector<double> dts{8e-3, 6e-3, 4e-3, 2e-3};
        std::vector<std::vector<double>> e;
        for (double dt : dts)
            e.push_back({std::pow(dt, p), std::pow(dt, 2 * p)});
        const auto te = error_rate_table("dt", study_columns(false), dts, e);
        std::vector<std::vector<double>> d;
        const double alpha = 0.75, h0 = 1.0 / 60.0;
        for (int i = 0; i < 4; ++i)
        {
            const double h = h0 * std::pow(alpha, i);
            const double diff = std::pow(h, p) * (1.0 - std::pow(alpha, p));
            d.push_back({diff, diff * diff});
        }
        const auto tr = ratio_rate_table("h", study_columns(true), h0, alpha, d);
        double worst = 0.0;
        for (const auto* t : {&te, &tr})
            for (std::size_t c = 0; c < t->columns.size(); ++c)
                for (const auto& r : t->rates(c))
                    worst = std::max(worst, std::abs(r - p));
        io.out << fmt::format("p = {}: max |rate - p| = {:.3g} over both estimators\n", p, worst);
        ok = ok && worst <= 1e-10;
    }
    io.out << (ok ? "self-test passed\n" : "self-test FAILED\n");
    return ok ? exit_ok : exit_failed;
}

inline int cmd_rates(const RatesOptions& opt, CommandIO io = {})
{
    if (opt.self_test)
        return rates_self_test(io);
    if (!opt.kind)
    {
        io.err << "error: choose --time or --space\n";
        return exit_bad_input;
    }
    StudyConfig study;
    try
    {
        study = load_study_config(opt.config);
        validate(study, true);
    }
    catch (const ConfigError& e)
    {
        io.err << "error: " << e.what() << '\n';
        return exit_bad_input;
    }
    const StudyKind kind = *opt.kind;
    const double finest = finest_mesh_size(study, kind);
    if (finest < paper_scale_lc && !opt.paper_scale)
    {
        io.err << fmt::format("error: refusing a paper-scale study (finest mesh size {:.4g} < {}); this takes hours. "
                              "Pass --paper-scale to run it.\n",
                              finest, paper_scale_lc);
        return exit_bad_input;
    }
    const auto dir = output_dir_of(study.run, opt.output);
    const std::string stem = kind == StudyKind::time ? "rates_time" : "rates_space";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / (stem + "_config.yaml")) << serialize(study);
    auto progress = [&](const std::string& msg) { io.err << msg << std::endl; };
    RateTable table;
    try
    {
        table = kind == StudyKind::time ? time_rate_study(study, dir / "time_runs", progress)
                                        : space_rate_study(study, dir / "space_runs", progress);
    }
    catch (const ConfigError& e)
    {
        io.err << "error: " << e.what() << '\n';
        return exit_bad_input;
    }
    catch (const std::exception& e)
    {
        io.err << "error: study failed: " << e.what() << '\n';
        return exit_failed;
    }
    write_rate_table(table, dir, stem);
    table.write_text(io.out);
    io.out << "tables in " << (dir / (stem + ".csv")).string() << " and .txt\n";
    return exit_ok;
}

// ---------------------------------------------------------------------------
// check

struct CheckResult
{
    std::string name;
    bool passed = true;
    std::string detail;
};

struct CheckReport
{
    std::vector<CheckResult> checks;
    bool passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
    }
    nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["passed"] = passed();
        for (const auto& c : checks)
            j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        return j;
    }
};

inline constexpr double energy_tolerance = 1e-9;
inline constexpr double k_tolerance = 1e-14;
inline constexpr double k_exact_tolerance = 1e-12;

/// Recomputes the energy and k identities from the statistics columns,
/// and checks the recorded residuals, k >= 0 and the stability ledger.
inline CheckReport check_statistics(const StatsFile& f)
{
    CheckReport rep;
    const auto& rs = f.records;
    const double tau = f.number("tau");
    const bool be = f.meta.count("k_update") ? f.meta.at("k_update") == "be" : true;
    const double decay = std::numbers::sqrt2 / (2.0 * tau);

    CheckResult rec{"energy_residual", true, ""};
    CheckResult ide{"energy_identity", true, ""};
    CheckResult kr{"k_residual", true, ""};
    CheckResult pos{"k_positivity", true, ""};
    double worst_rec = 0.0, worst_id = 0.0, worst_k = 0.0;
    std::int64_t bad_rec = -1, bad_id = -1, bad_k = -1, bad_pos = -1;
    for (std::size_t n = 0; n < rs.size(); ++n)
    {
        const auto& r = rs[n];
        if (!(r.k >= 0.0) && bad_pos < 0)
            bad_pos = r.step;
        if (n == 0)
            continue;
        const auto& q = rs[n - 1];
        const double dt = r.t - q.t;
        if (r.energy_residual > worst_rec)
            worst_rec = r.energy_residual;
        if (!(r.energy_residual <= energy_tolerance) && bad_rec < 0)
            bad_rec = r.step;

        EnergyTerms e;
        e.new_sq = 2.0 * r.kinetic_energy;
        e.old_sq = 2.0 * q.kinetic_energy;
        e.increment_sq = r.increment_sq;
        e.viscous = 2.0 * dt * (r.nu_dissipation + r.nut_dissipation);
        e.forcing = 2.0 * dt * r.forcing_power;
        const double id = e.relative();
        worst_id = std::max(worst_id, id);
        if (!(id <= energy_tolerance) && bad_id < 0)
            bad_id = r.step;

        if (q.model_on)
        {
            double res = 0.0;
            if (be)
                res = k_residual(q.k, r.k, dt, tau, r.eps);
            else
            {
                const double expected = q.k * std::exp((r.eps - decay) * dt);
                res = expected > 0.0 ? std::abs(r.k - expected) / expected : std::abs(r.k);
            }
            worst_k = std::max(worst_k, res);
            if (!(res <= (be ? k_tolerance : k_exact_tolerance)) && bad_k < 0)
                bad_k = r.step;
        }
    }
    auto finish = [](CheckResult& c, double worst, std::int64_t bad, double tol) {
        c.passed = bad < 0;
        c.detail = fmt::format("max {:.3g} (tolerance {:.0e})", worst, tol);
        if (bad >= 0)
            c.detail += fmt::format("; first failure at step {}", bad);
    };
    finish(rec, worst_rec, bad_rec, energy_tolerance);
    finish(ide, worst_id, bad_id, energy_tolerance);
    finish(kr, worst_k, bad_k, be ? k_tolerance : k_exact_tolerance);
    kr.detail = std::string(be ? "backward Euler identity: " : "exact exponential update: ") + kr.detail;
    pos.passed = bad_pos < 0;
    pos.detail = bad_pos < 0 ? "k >= 0 in every row" : fmt::format("k < 0 at step {}", bad_pos);

    CheckResult led{"stability_ledger", true, ""};
    const LedgerConstants c{f.number("area"), f.number("nu"), tau, f.number("poincare")};
    const auto ledger = stability_ledger(rs, c);
    const std::size_t warnings = static_cast<std::size_t>(
        std::count_if(ledger.entries.begin(), ledger.entries.end(),
                      [](const auto& e) { return e.status == LedgerStatus::warning; }));
    led.passed = ledger.holds();
    led.detail = fmt::format("max margin {:.3g}; {} warning(s), {}", ledger.entries.empty() ? 0.0 : ledger.max_margin(),
                             warnings, ledger.flagged() ? "violation flagged" : "no violation");

    rep.checks = {rec, ide, kr, pos, led};
    return rep;
}

class MissingArtifact : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

inline CheckReport check_run_directory(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir))
        throw MissingArtifact("no such run directory: " + dir.string());
    const auto stats = dir / "stats.csv";
    if (!std::filesystem::exists(stats))
        throw MissingArtifact("missing artifact: " + stats.string());
    const StatsFile f = read_stats_file(stats);
    if (f.records.empty())
        throw MissingArtifact("statistics file has no rows: " + stats.string());
    CheckReport rep = check_statistics(f);
    CheckResult fin{"final_state", true, ""};
    const auto state = dir / "final.state";
    if (!std::filesystem::exists(state))
    {
        fin.passed = false;
        fin.detail = "missing final.state (run incomplete?)";
    }
    else
    {
        const State s = read_state_file(state);
        fin.passed = s.step == f.records.back().step && s.t == f.records.back().t && s.k == f.records.back().k;
        fin.detail = fin.passed ? "matches the last statistics row" : "does not match the last statistics row";
    }
    rep.checks.push_back(fin);
    return rep;
}

struct CheckOptions
{
    std::filesystem::path run_dir;
    std::optional<std::filesystem::path> output; // JSON summary; default <run_dir>/check.json
};

inline int cmd_check(const CheckOptions& opt, CommandIO io = {})
{
    CheckReport rep;
    try
    {
        rep = check_run_directory(opt.run_dir);
    }
    catch (const MissingArtifact& e)
    {
        io.err << "error: " << e.what() << '\n';
        return exit_bad_input;
    }
    catch (const FormatError& e)
    {
        io.err << "error: " << e.what() << '\n';
        return exit_bad_input;
    }
    for (const auto& c : rep.checks)
        io.out << fmt::format("{} {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
    const auto json_path = opt.output ? *opt.output : opt.run_dir / "check.json";
    std::ofstream(json_path) << rep.to_json().dump(2) << '\n';
    return rep.passed() ? exit_ok : exit_failed;
}

// ---------------------------------------------------------------------------
// mms, ode-oracle

struct MmsOptions
{
    std::optional<std::filesystem::path> output;
};

inline int cmd_mms(const MmsOptions& opt, CommandIO io = {})
{
    const auto space = mms_space_study();
    const auto time = mms_time_study();
    space.table.write_text(io.out);
    io.out << '\n';
    time.table.write_text(io.out);
    if (opt.output)
    {
        write_rate_table(space.table, *opt.output, "mms_space");
        write_rate_table(time.table, *opt.output, "mms_time");
    }
    bool ok = true;
    for (const auto& r : space.table.rates(0))
        ok = ok && std::abs(r - 3.0) <= 0.2;
    for (const auto& r : space.table.rates(1))
        ok = ok && std::abs(r - 2.0) <= 0.2;
    for (const auto& r : time.table.rates(0))
        ok = ok && std::abs(r - 1.0) <= 0.2;
    io.out << (ok ? "manufactured-solution rates within tolerance\n" : "manufactured-solution rates OUT of tolerance\n");
    return ok ? exit_ok : exit_failed;
}

inline int cmd_ode_oracle(CommandIO io = {})
{
    const auto r = ode_oracle_suite();
    io.out << fmt::format("exact update, eps = 0: max relative error {:.3g}\n", r.homogeneous_max_rel_error);
    io.out << "backward Euler, constant eps:\n";
    for (std::size_t i = 0; i < r.be_dts.size(); ++i)
        io.out << fmt::format("  dt = {:<10.6g} error = {:.6e}{}\n", r.be_dts[i], r.be_errors[i],
                              i ? fmt::format("  order {:.3f}", r.be_orders[i - 1]) : std::string());
    io.out << fmt::format("exact update, piecewise-constant eps: max relative error {:.3g}\n",
                          r.piecewise_max_rel_error);
    io.out << (r.passed() ? "oracles passed\n" : "oracles FAILED\n");
    return r.passed() ? exit_ok : exit_failed;
}

} // namespace urans
