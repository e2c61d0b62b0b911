#pragma once

// Time loop around the stepper: spin-up without the model, activation at
// t_star, statistics rows every step, optional snapshots.

#include <cmath>
#include <functional>
#include <optional>

#include "solver.hpp"

namespace urans
{

struct RunControl
{
    double dt = 5e-3;
    double t_end = 1.0;
    /// Number of steps between invocations of the snapshot callback (0 = never).
    int snapshot_every = 0;
    /// Steps between evaluations of the running stability ledger (0 = only at the end).
    int diagnostics_stride = 1;
    /// Keep copies of the velocity at every step with t in [window.first, window.second].
    std::optional<std::pair<double, double>> window;
};

struct Snapshot
{
    double t = 0.0;
    std::int64_t step = 0;
    Vector v;
};

struct RunResult
{
    std::vector<BudgetRecord> records; // records[0] describes the initial state
    std::vector<Snapshot> window;
    State final;
    std::optional<double> k_init;      // value from the initialisation, if the model was switched on
    std::optional<double> activation_time;
    double seconds = 0.0;
};

/// Per-step hooks; any may be empty.
struct RunObserver
{
    std::function<void(const BudgetRecord&)> on_record;
    std::function<void(const State&)> on_snapshot;
    std::function<void(const StabilityLedger&)> on_ledger;
    /// Called with the last good state when a step throws.
    std::function<void(const State&)> on_failure;
};

class TransientRun
{
public:
    TransientRun(Stepper& stepper, RunControl control, LedgerConstants constants)
        : stepper_(stepper), ctl_(control), constants_(constants)
    {
        if (!(ctl_.dt > 0.0))
            throw std::invalid_argument("dt must be > 0");
        if (!(ctl_.t_end > 0.0))
            throw std::invalid_argument("t_end must be > 0");
    }

    RunResult run(State state, const RunObserver& obs = {})
    {
        const auto start = std::chrono::steady_clock::now();
        RunResult res;
        const double t_star = stepper_.options().params.t_star;
        maybe_activate(state, t_star, res);
        res.records.push_back(stepper_.describe(state));
        emit(res.records.back(), obs);
        keep(state, res);
        if (obs.on_snapshot && ctl_.snapshot_every > 0)
            obs.on_snapshot(state);

        const double tol = 1e-9 * ctl_.dt;
        while (state.t < ctl_.t_end - tol)
        {
            std::pair<State, StepReport> out;
            try
            {
                out = stepper_.step(state, ctl_.dt);
                if (!out.second.budget.finite())
                    throw SolveError("non-finite statistics at t = " + std::to_string(out.first.t));
            }
            catch (...)
            {
                if (obs.on_failure)
                    obs.on_failure(state);
                throw;
            }
            state = std::move(out.first);
            BudgetRecord row = out.second.budget;
            if (maybe_activate(state, t_star, res))
            {
                row.k = state.k;
                row.model_on = true;
            }
            res.records.push_back(row);
            emit(row, obs);
            keep(state, res);
            if (obs.on_snapshot && ctl_.snapshot_every > 0 && state.step % ctl_.snapshot_every == 0)
                obs.on_snapshot(state);
            if (obs.on_ledger && ctl_.diagnostics_stride > 0 && state.step % ctl_.diagnostics_stride == 0)
                obs.on_ledger(stability_ledger(res.records, constants_));
        }
        if (obs.on_ledger)
            obs.on_ledger(stability_ledger(res.records, constants_));
        res.final = std::move(state);
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return res;
    }

private:
    bool maybe_activate(State& s, double t_star, RunResult& res) const
    {
        if (s.model_on || s.t < t_star - 1e-9 * ctl_.dt)
            return false;
        stepper_.activate_model(s);
        res.k_init = s.k;
        res.activation_time = s.t;
        return true;
    }

    void emit(const BudgetRecord& r, const RunObserver& obs) const
    {
        if (obs.on_record)
            obs.on_record(r);
    }

    void keep(const State& s, RunResult& res) const
    {
        if (ctl_.window && s.t >= ctl_.window->first - 1e-9 * ctl_.dt && s.t <= ctl_.window->second + 1e-9 * ctl_.dt)
            res.window.push_back({s.t, s.step, s.v});
    }

    Stepper& stepper_;
    RunControl ctl_;
    LedgerConstants constants_;
};

} // namespace urans
