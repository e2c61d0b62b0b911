#include <CLI11.hpp>

#include <urans/commands.hpp>

int main(int argc, char** argv)
{
    using namespace urans;
    CLI::App app{"2D Taylor-Hood solver for the 1/2-equation URANS model"};
    app.require_subcommand(1);

    RunOptions run;
    std::string run_output;
    auto* run_cmd = app.add_subcommand("run", "Run one configured simulation");
    run_cmd->add_option("--config,config", run.config, "Run configuration (YAML)")->required();
    run_cmd->add_flag("--dry-run", run.dry_run, "Validate the configuration only; write nothing");
    run_cmd->add_option("--output", run_output, "Output directory (overrides output_dir)");

    RatesOptions rates;
    std::string rates_output;
    bool time = false, space = false;
    auto* rates_cmd = app.add_subcommand("rates", "Self-convergence study and rate table");
    rates_cmd->add_option("--config,config", rates.config, "Study configuration (YAML)");
    auto* time_flag = rates_cmd->add_flag("--time", time, "Convergence in time (fixed mesh, reference dt)");
    rates_cmd->add_flag("--space", space, "Convergence in space (ratios of differences)")->excludes(time_flag);
    rates_cmd->add_flag("--paper-scale", rates.paper_scale, "Allow studies on meshes finer than lc = 0.05");
    rates_cmd->add_flag("--self-test", rates.self_test, "Run synthetic power-law data through the estimators");
    rates_cmd->add_option("--output", rates_output, "Output directory (overrides output_dir)");

    CheckOptions check;
    std::string check_output;
    auto* check_cmd = app.add_subcommand("check", "Re-verify the invariants of a completed run");
    check_cmd->add_option("run_dir", check.run_dir, "Run directory")->required();
    check_cmd->add_option("--output", check_output, "Path of the JSON summary (default <run_dir>/check.json)");

    MmsOptions mms;
    std::string mms_output;
    auto* mms_cmd = app.add_subcommand("mms", "Manufactured-solution convergence suite");
    mms_cmd->add_option("--output", mms_output, "Directory for the rate tables");

    auto* ode_cmd = app.add_subcommand("ode-oracle", "k-equation updates against closed-form solutions");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run_cmd)
        {
            if (!run_output.empty())
                run.output = run_output;
            return cmd_run(run);
        }
        if (*rates_cmd)
        {
            if (!rates_output.empty())
                rates.output = rates_output;
            if (time)
                rates.kind = StudyKind::time;
            if (space)
                rates.kind = StudyKind::space;
            if (!rates.self_test && rates.config.empty())
            {
                std::cerr << "error: --config is required\n";
                return exit_bad_input;
            }
            return cmd_rates(rates);
        }
        if (*check_cmd)
        {
            if (!check_output.empty())
                check.output = check_output;
            return cmd_check(check);
        }
        if (*mms_cmd)
        {
            if (!mms_output.empty())
                mms.output = mms_output;
            return cmd_mms(mms);
        }
        if (*ode_cmd)
            return cmd_ode_oracle();
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failed;
    }
    return exit_ok;
}
