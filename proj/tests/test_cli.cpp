#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <unistd.h>

#include <urans/commands.hpp>

#include "test_support.hpp"

using namespace urans;
namespace fs = std::filesystem;

namespace
{

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / fmt::format("urans_{}_{}", name, ::getpid());
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const fs::path& path, const std::string& text)
{
    std::ofstream(path) << text;
    return path;
}

const char* square_config = R"(mesh: square
square_n: 6
noslip_tags: [1]
wall_distance: polygonal
forcing: offset_circles
dt: 0.02
t_end: 0.4
t_star: 0.2
nu: 0.01
tau: 0.1
output_dir: out
)";

struct Captured
{
    std::ostringstream out, err;
    CommandIO io() { return {out, err}; }
};

std::vector<std::string> read_lines(const fs::path& p)
{
    std::ifstream is(p);
    std::vector<std::string> lines;
    for (std::string l; std::getline(is, l);)
        lines.push_back(l);
    return lines;
}

void write_lines(const fs::path& p, const std::vector<std::string>& lines)
{
    std::ofstream os(p);
    for (const auto& l : lines)
        os << l << '\n';
}

/// Replaces column `col` of the data row for step `step` in a statistics file.
void tamper(const fs::path& stats, int step, int col, const std::string& value)
{
    auto lines = read_lines(stats);
    for (auto& l : lines)
    {
        if (l.empty() || l[0] == '#' || l.rfind(std::to_string(step) + ",", 0) != 0)
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(l);
        for (std::string c; std::getline(ss, c, ',');)
            cells.push_back(c);
        cells[static_cast<std::size_t>(col)] = value;
        l.clear();
        for (std::size_t i = 0; i < cells.size(); ++i)
            l += (i ? "," : "") + cells[i];
    }
    write_lines(stats, lines);
}

const CheckResult& find_check(const CheckReport& r, const std::string& name)
{
    for (const auto& c : r.checks)
        if (c.name == name)
            return c;
    throw std::runtime_error("no check " + name);
}

} // namespace

// ---------------------------------------------------------------------------
// Configuration

TEST(Config, RoundTripIsIdentity)
{
    RunConfig c;
    c.mesh = MeshSource::file;
    c.mesh_file = "some/mesh.msh";
    c.square_n = 7;
    c.lc = 0.1234567890123;
    c.noslip_tags = {3, 5};
    c.analytic_wall_distance = false;
    c.forcing = "none";
    c.dt = 1.0 / 3.0;
    c.t_end = 2.75;
    c.params.t_star = 0.3;
    c.params.nu = 1.0 / 7.0;
    c.params.tau = 0.2;
    c.params.mu = 0.6;
    c.params.kappa = 0.4;
    c.params.length = 2.0;
    c.params.velocity = 3.0;
    c.params.damping = Damping::model_quadratic;
    c.k_update = KUpdateMode::exact;
    c.form = ViscousForm::symmetric_gradient;
    c.output_dir = "o";
    c.snapshot_every = 4;
    c.diagnostics_stride = 9;
    c.seed = 42;
    c.restart = "r.state";
    const std::string once = serialize(c);
    const RunConfig back = parse_run_config(YAML::Load(once));
    EXPECT_EQ(serialize(back), once);
    EXPECT_EQ(back.mesh, c.mesh);
    EXPECT_EQ(back.mesh_file, c.mesh_file);
    EXPECT_EQ(back.square_n, c.square_n);
    EXPECT_EQ(back.lc, c.lc);
    EXPECT_EQ(back.noslip_tags, c.noslip_tags);
    EXPECT_EQ(back.analytic_wall_distance, c.analytic_wall_distance);
    EXPECT_EQ(back.forcing, c.forcing);
    EXPECT_EQ(back.dt, c.dt);
    EXPECT_EQ(back.t_end, c.t_end);
    EXPECT_EQ(back.params.t_star, c.params.t_star);
    EXPECT_EQ(back.params.nu, c.params.nu);
    EXPECT_EQ(back.params.tau, c.params.tau);
    EXPECT_EQ(back.params.mu, c.params.mu);
    EXPECT_EQ(back.params.kappa, c.params.kappa);
    EXPECT_EQ(back.params.length, c.params.length);
    EXPECT_EQ(back.params.velocity, c.params.velocity);
    EXPECT_EQ(back.params.damping, c.params.damping);
    EXPECT_EQ(back.k_update, c.k_update);
    EXPECT_EQ(back.form, c.form);
    EXPECT_EQ(back.output_dir, c.output_dir);
    EXPECT_EQ(back.snapshot_every, c.snapshot_every);
    EXPECT_EQ(back.diagnostics_stride, c.diagnostics_stride);
    EXPECT_EQ(back.seed, c.seed);
    EXPECT_EQ(back.restart, c.restart);
}

TEST(Config, StudyRoundTripIsIdentity)
{
    StudyConfig s;
    s.dts = {0.008, 0.006};
    s.dt_ref = 0.002;
    s.h0 = 0.1;
    s.alpha = 0.8;
    s.levels = 4;
    s.window_t0 = 0.5;
    s.window_t1 = 0.75;
    const std::string once = serialize(s);
    const StudyConfig back = parse_study_config(YAML::Load(once));
    EXPECT_EQ(serialize(back), once);
    EXPECT_EQ(back.dts, s.dts);
    EXPECT_EQ(back.window_t1, s.window_t1);
}

TEST(Config, UnknownKeyIsRejectedByName)
{
    try
    {
        parse_run_config(YAML::Load("dt: 0.1\nviscosity: 3\n"));
        FAIL();
    }
    catch (const ConfigError& e)
    {
        EXPECT_EQ(e.field(), "viscosity");
    }
}

TEST(Config, WrongTypeNamesField)
{
    try
    {
        parse_run_config(YAML::Load("dt: fast\n"));
        FAIL();
    }
    catch (const ConfigError& e)
    {
        EXPECT_EQ(e.field(), "dt");
    }
}

TEST(Config, NonPositiveStepNamesDt)
{
    for (double dt : {0.0, -1e-3})
    {
        RunConfig c;
        c.dt = dt;
        try
        {
            validate(c, false);
            FAIL();
        }
        catch (const ConfigError& e)
        {
            EXPECT_EQ(e.field(), "dt");
            EXPECT_NE(std::string(e.what()).find("dt"), std::string::npos);
        }
    }
    RunConfig c;
    c.t_end = 0.0;
    EXPECT_THROW(validate(c, false), ConfigError);
}

TEST(Config, MissingMeshFileNamesField)
{
    RunConfig c;
    c.mesh = MeshSource::file;
    c.mesh_file = "/nonexistent/mesh.msh";
    try
    {
        validate(c, true);
        FAIL();
    }
    catch (const ConfigError& e)
    {
        EXPECT_EQ(e.field(), "mesh_file");
    }
}

TEST(Config, StudyStepsMustBeMultiplesOfReference)
{
    StudyConfig s;
    s.run.t_end = 1.3;
    s.dts = {0.008, 0.0025};
    s.dt_ref = 0.001;
    try
    {
        validate(s, false);
        FAIL();
    }
    catch (const ConfigError& e)
    {
        EXPECT_EQ(e.field(), "dts");
    }
}

TEST(Config, ShippedConfigsValidate)
{
    const fs::path dir = fs::path(URANS_DATA_DIR).parent_path() / "configs";
    for (const char* name : {"offset_circles.yaml", "offset_circles_fine.yaml", "square.yaml"})
        EXPECT_NO_THROW(validate(load_run_config(dir / name), true)) << name;
    for (const char* name : {"time_study_small.yaml", "time_study_full.yaml", "space_study_small.yaml",
                             "space_study_full.yaml"})
        EXPECT_NO_THROW(validate(load_study_config(dir / name), true)) << name;
}

TEST(Config, MeshNamingMatchesShippedFiles)
{
    EXPECT_TRUE(fs::exists(offset_circles_mesh_path(1.0 / 16.0, default_mesh_dir())));
    EXPECT_TRUE(fs::exists(offset_circles_mesh_path(1.0 / 36.0, default_mesh_dir())));
}

// ---------------------------------------------------------------------------
// File formats

TEST(Stats, RoundTripIsLossless)
{
    const auto dir = scratch("stats");
    BudgetRecord r;
    r.step = 17;
    r.t = 0.1 + 0.2;
    r.kinetic_energy = 1.0 / 3.0;
    r.nu_dissipation = std::nextafter(1.0, 2.0);
    r.k = 3.361980472e-05;
    r.eps = 1e-300;
    r.model_on = true;
    {
        StatsWriter w(dir / "s.csv", {{"tau", "0.1"}});
        w.write(r);
    }
    const auto f = read_stats_file(dir / "s.csv");
    ASSERT_EQ(f.records.size(), 1u);
    EXPECT_EQ(f.records[0].step, 17);
    EXPECT_EQ(f.records[0].t, r.t);
    EXPECT_EQ(f.records[0].kinetic_energy, r.kinetic_energy);
    EXPECT_EQ(f.records[0].nu_dissipation, r.nu_dissipation);
    EXPECT_EQ(f.records[0].k, r.k);
    EXPECT_EQ(f.records[0].eps, r.eps);
    EXPECT_TRUE(f.records[0].model_on);
    EXPECT_EQ(f.number("tau"), 0.1);
    fs::remove_all(dir);
}

TEST(Stats, UnknownVersionIsRejected)
{
    std::istringstream v2("# urans-stats v2\nn,t\n");
    EXPECT_THROW(read_stats(v2), FormatError);
    std::istringstream none("n,t,kinetic_energy\n");
    EXPECT_THROW(read_stats(none), FormatError);
}

TEST(Stats, WrongColumnCountIsRejected)
{
    std::ostringstream os;
    os << stats_magic << '\n';
    for (std::size_t i = 0; i < stats_columns().size(); ++i)
        os << (i ? "," : "") << stats_columns()[i];
    os << "\n1,2,3\n";
    std::istringstream is(os.str());
    EXPECT_THROW(read_stats(is), FormatError);
}

TEST(State, RoundTripIsBitExact)
{
    State s;
    s.t = 0.30000000000000004;
    s.step = 60;
    s.k = 1.0 / 3.0;
    s.model_on = true;
    s.v = Vector::LinSpaced(7, -1.0 / 3.0, 2.0 / 7.0);
    s.p = Vector::Constant(3, std::nextafter(0.0, 1.0));
    std::stringstream ss;
    write_state(ss, s);
    const State b = read_state(ss);
    EXPECT_EQ(b.t, s.t);
    EXPECT_EQ(b.step, s.step);
    EXPECT_EQ(b.k, s.k);
    EXPECT_TRUE(b.model_on);
    EXPECT_EQ(b.v, s.v);
    EXPECT_EQ(b.p, s.p);
}

TEST(State, UnknownFormatIsRejected)
{
    std::istringstream is("urans-state v9\n");
    EXPECT_THROW(read_state(is), FormatError);
}

TEST(Vtk, LayoutAndTitle)
{
    auto space = test::square_space(2);
    State s;
    s.v = space->interpolate([](Point p) { return Vec2{p.y, p.x}; });
    s.p = space->interpolate_pressure([](Point p) { return p.x; });
    s.t = 0.5;
    std::ostringstream a;
    write_vtk(a, *space, s);
    const std::string off = a.str();
    EXPECT_NE(off.find("urans t=0.5\n"), std::string::npos);
    EXPECT_EQ(off.find(" k="), std::string::npos);
    EXPECT_NE(off.find(fmt::format("POINTS {} double", space->num_nodes())), std::string::npos);
    EXPECT_NE(off.find(fmt::format("CELLS {} {}", 4 * 8, 16 * 8)), std::string::npos);
    EXPECT_NE(off.find("VECTORS velocity double"), std::string::npos);
    EXPECT_NE(off.find("SCALARS pressure double 1"), std::string::npos);
    s.model_on = true;
    s.k = 0.25;
    std::ostringstream b;
    write_vtk(b, *space, s);
    EXPECT_NE(b.str().find("k=0.25"), std::string::npos);
}

// ---------------------------------------------------------------------------
// run

TEST(CmdRun, NonPositiveStepIsAValidationErrorNamingDt)
{
    const auto dir = scratch("run_dt");
    std::string cfg = square_config;
    cfg.replace(cfg.find("dt: 0.02"), 8, "dt: -0.02");
    Captured c;
    EXPECT_EQ(cmd_run({write_file(dir / "c.yaml", cfg)}, c.io()), exit_bad_input);
    EXPECT_NE(c.err.str().find("dt"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "out"));
    fs::remove_all(dir);
}

TEST(CmdRun, DryRunWritesNothing)
{
    const auto dir = scratch("dry");
    write_file(dir / "c.yaml", square_config);
    Captured c;
    RunOptions o{dir / "c.yaml", true, {}};
    EXPECT_EQ(cmd_run(o, c.io()), exit_ok);
    EXPECT_NE(c.out.str().find("configuration valid"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "out"));
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir))
        ++files;
    EXPECT_EQ(files, 1u);
    fs::remove_all(dir);
}

TEST(CmdRun, KColumnSwitchesOnAtActivationWithInitialValue)
{
    const auto dir = scratch("activation");
    write_file(dir / "c.yaml", square_config);
    Captured c;
    ASSERT_EQ(cmd_run({dir / "c.yaml"}, c.io()), exit_ok) << c.err.str();
    const auto f = read_stats_file(dir / "out" / "stats.csv");
    // Oracle: the initialisation evaluated on the same problem.
    RunConfig cfg = load_run_config(dir / "c.yaml");
    const ProblemSetup setup = make_problem(cfg);
    const double k_init = k_initialize(*setup.space, setup.wall, cfg.params).k;
    const BudgetRecord* first = nullptr;
    for (const auto& r : f.records)
        if (r.k != 0.0)
        {
            first = &r;
            break;
        }
    ASSERT_NE(first, nullptr);
    EXPECT_NEAR(first->t, 0.2, 1e-12);
    EXPECT_EQ(first->k, k_init);
    EXPECT_TRUE(first->model_on);
    fs::remove_all(dir);
}

TEST(CmdRun, EndBeforeActivationNeverInitialisesK)
{
    const auto dir = scratch("no_model");
    std::string cfg = square_config;
    cfg.replace(cfg.find("t_end: 0.4"), 10, "t_end: 0.1");
    write_file(dir / "c.yaml", cfg);
    Captured c;
    ASSERT_EQ(cmd_run({dir / "c.yaml"}, c.io()), exit_ok) << c.err.str();
    const auto f = read_stats_file(dir / "out" / "stats.csv");
    for (const auto& r : f.records)
    {
        EXPECT_EQ(r.k, 0.0);
        EXPECT_FALSE(r.model_on);
    }
    fs::remove_all(dir);
}

TEST(CmdRun, SnapshotsAtCadence)
{
    const auto dir = scratch("snapshots");
    write_file(dir / "c.yaml", std::string(square_config) + "snapshot_every: 5\n");
    Captured c;
    ASSERT_EQ(cmd_run({dir / "c.yaml"}, c.io()), exit_ok) << c.err.str();
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "out" / "snapshots"))
        ++n;
    EXPECT_EQ(n, 5u); // steps 0, 5, 10, 15, 20
    EXPECT_TRUE(fs::exists(dir / "out" / "snapshots" / "step_0000010.vtk"));
    fs::remove_all(dir);
}

TEST(CmdRun, RestartContinuesBitForBit)
{
    const auto dir = scratch("restart");
    write_file(dir / "full.yaml", std::string(square_config));
    std::string half = square_config;
    half.replace(half.find("t_end: 0.4"), 10, "t_end: 0.3");
    half.replace(half.find("output_dir: out"), 15, "output_dir: half");
    write_file(dir / "half.yaml", half);
    std::string cont = square_config;
    cont.replace(cont.find("output_dir: out"), 15, "output_dir: cont");
    write_file(dir / "cont.yaml", cont + "restart: half/final.state\n");
    Captured c;
    ASSERT_EQ(cmd_run({dir / "full.yaml"}, c.io()), exit_ok) << c.err.str();
    ASSERT_EQ(cmd_run({dir / "half.yaml"}, c.io()), exit_ok) << c.err.str();
    ASSERT_EQ(cmd_run({dir / "cont.yaml"}, c.io()), exit_ok) << c.err.str();
    const State a = read_state_file(dir / "out" / "final.state");
    const State b = read_state_file(dir / "cont" / "final.state");
    EXPECT_EQ(a.step, b.step);
    EXPECT_EQ(a.t, b.t);
    EXPECT_EQ(a.k, b.k);
    EXPECT_EQ(a.v, b.v);
    EXPECT_EQ(a.p, b.p);
    fs::remove_all(dir);
}

TEST(CmdRun, RestartFromMismatchedMeshIsRejected)
{
    const auto dir = scratch("restart_bad");
    State s;
    s.v = Vector::Zero(5);
    s.p = Vector::Zero(2);
    write_state_file(dir / "bad.state", s);
    write_file(dir / "c.yaml", std::string(square_config) + "restart: bad.state\n");
    Captured c;
    EXPECT_EQ(cmd_run({dir / "c.yaml"}, c.io()), exit_bad_input);
    EXPECT_NE(c.err.str().find("restart"), std::string::npos);
    fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// check

class CmdCheck : public ::testing::Test
{
protected:
    static void SetUpTestSuite()
    {
        dir_ = scratch("check");
        write_file(dir_ / "c.yaml", square_config);
        Captured c;
        ASSERT_EQ(cmd_run({dir_ / "c.yaml"}, c.io()), exit_ok) << c.err.str();
    }
    static void TearDownTestSuite() { fs::remove_all(dir_); }

    fs::path copy_run(const std::string& name) const
    {
        const auto d = dir_ / name;
        fs::remove_all(d);
        fs::copy(dir_ / "out", d, fs::copy_options::recursive);
        fs::remove(d / "check.json");
        return d;
    }

    static fs::path dir_;
};

fs::path CmdCheck::dir_;

TEST_F(CmdCheck, CleanRunPassesAndWritesSummary)
{
    const auto d = copy_run("clean");
    Captured c;
    EXPECT_EQ(cmd_check({d}, c.io()), exit_ok) << c.out.str();
    const auto j = nlohmann::json::parse(std::ifstream(d / "check.json"));
    EXPECT_TRUE(j["passed"].get<bool>());
    EXPECT_EQ(j["checks"].size(), 6u);
}

TEST_F(CmdCheck, TamperedEnergyRowFails)
{
    const auto d = copy_run("energy");
    const auto f = read_stats_file(d / "stats.csv");
    tamper(d / "stats.csv", 7, 2, fmt::format("{:.17g}", f.records[7].kinetic_energy * (1.0 + 1e-6)));
    const auto rep = check_run_directory(d);
    EXPECT_FALSE(rep.passed());
    EXPECT_FALSE(find_check(rep, "energy_identity").passed);
    EXPECT_TRUE(find_check(rep, "energy_residual").passed);
    Captured c;
    EXPECT_EQ(cmd_check({d}, c.io()), exit_failed);
    EXPECT_NE(c.out.str().find("FAIL energy_identity"), std::string::npos);
}

TEST_F(CmdCheck, TamperedKRowFails)
{
    const auto d = copy_run("k");
    const auto f = read_stats_file(d / "stats.csv");
    tamper(d / "stats.csv", 15, 5, fmt::format("{:.17g}", f.records[15].k * (1.0 + 1e-9)));
    const auto rep = check_run_directory(d);
    EXPECT_FALSE(find_check(rep, "k_residual").passed);
    EXPECT_TRUE(find_check(rep, "k_positivity").passed);
}

TEST_F(CmdCheck, NegativeKFailsPositivity)
{
    const auto d = copy_run("negative");
    tamper(d / "stats.csv", 20, 5, "-1e-30");
    EXPECT_FALSE(find_check(check_run_directory(d), "k_positivity").passed);
}

TEST_F(CmdCheck, InflatedEnergyFailsLedger)
{
    const auto d = copy_run("ledger");
    const auto f = read_stats_file(d / "stats.csv");
    const auto ledger = stability_ledger(f.records, {f.number("area"), f.number("nu"), f.number("tau"),
                                                     f.number("poincare")});
    const auto& e = ledger.entries[19];
    ASSERT_EQ(e.step, 20);
    // Half the energy gap plus twice the right side pushes the margin well above 5%.
    const double ke = f.records[20].kinetic_energy + 0.5 * (e.rhs - e.lhs) + e.rhs;
    tamper(d / "stats.csv", 20, 2, fmt::format("{:.17g}", ke));
    EXPECT_FALSE(find_check(check_run_directory(d), "stability_ledger").passed);
}

TEST_F(CmdCheck, RecordedResidualAboveToleranceFails)
{
    const auto d = copy_run("residual");
    tamper(d / "stats.csv", 3, 7, "2e-9");
    EXPECT_FALSE(find_check(check_run_directory(d), "energy_residual").passed);
}

TEST(CmdCheckErrors, EmptyDirectoryIsMissingArtifact)
{
    const auto dir = scratch("empty");
    Captured c;
    EXPECT_EQ(cmd_check({dir}, c.io()), exit_bad_input);
    EXPECT_NE(c.err.str().find("missing artifact"), std::string::npos);
    EXPECT_EQ(cmd_check({dir / "nope"}, c.io()), exit_bad_input);
    fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// rates, mms, ode-oracle

TEST(CmdRates, SelfTestIsExact)
{
    Captured c;
    RatesOptions o;
    o.self_test = true;
    EXPECT_EQ(cmd_rates(o, c.io()), exit_ok);
    EXPECT_NE(c.out.str().find("self-test passed"), std::string::npos);
}

TEST(CmdRates, PaperScaleStudyNeedsFlag)
{
    const fs::path cfg = fs::path(URANS_DATA_DIR).parent_path() / "configs" / "time_study_full.yaml";
    Captured c;
    RatesOptions o;
    o.config = cfg;
    o.kind = StudyKind::time;
    EXPECT_EQ(cmd_rates(o, c.io()), exit_bad_input);
    EXPECT_NE(c.err.str().find("--paper-scale"), std::string::npos);
    o.config = fs::path(URANS_DATA_DIR).parent_path() / "configs" / "space_study_full.yaml";
    o.kind = StudyKind::space;
    EXPECT_EQ(cmd_rates(o, c.io()), exit_bad_input);
}

TEST(CmdRates, KindIsRequired)
{
    Captured c;
    RatesOptions o;
    o.config = "x.yaml";
    EXPECT_EQ(cmd_rates(o, c.io()), exit_bad_input);
}

TEST(CmdRates, SmallSpaceStudyOnSquaresIsRefused)
{
    const auto dir = scratch("space_square");
    write_file(dir / "s.yaml", std::string(square_config) + "levels: 3\nwindow: [0.2, 0.4]\n");
    Captured c;
    RatesOptions o;
    o.config = dir / "s.yaml";
    o.kind = StudyKind::space;
    EXPECT_EQ(cmd_rates(o, c.io()), exit_bad_input);
    EXPECT_NE(c.err.str().find("mesh"), std::string::npos);
    fs::remove_all(dir);
}

TEST(CmdRates, SquareTimeStudyEmitsTables)
{
    const auto dir = scratch("time_square");
    write_file(dir / "s.yaml", std::string(square_config) + "dts: [0.02, 0.01]\ndt_ref: 0.005\nwindow: [0.2, 0.4]\n");
    Captured c;
    RatesOptions o;
    o.config = dir / "s.yaml";
    o.kind = StudyKind::time;
    ASSERT_EQ(cmd_rates(o, c.io()), exit_ok) << c.err.str();
    EXPECT_TRUE(fs::exists(dir / "out" / "rates_time.csv"));
    EXPECT_TRUE(fs::exists(dir / "out" / "rates_time.txt"));
    EXPECT_TRUE(fs::exists(dir / "out" / "time_runs" / "dt_0.01" / "stats.csv"));
    EXPECT_TRUE(fs::exists(dir / "out" / "time_runs" / "ref_dt_0.005" / "stats.csv"));
    fs::remove_all(dir);
}

TEST(CmdOdeOracle, Passes)
{
    Captured c;
    EXPECT_EQ(cmd_ode_oracle(c.io()), exit_ok);
    EXPECT_NE(c.out.str().find("oracles passed"), std::string::npos);
}

TEST(CmdRates, ScaledDownTimeStudyEmitsTwoRateRows)
{
    const auto dir = scratch("time_small");
    const fs::path cfg = fs::path(URANS_DATA_DIR).parent_path() / "configs" / "time_study_small.yaml";
    Captured c;
    RatesOptions o;
    o.config = cfg;
    o.kind = StudyKind::time;
    o.output = dir;
    ASSERT_EQ(cmd_rates(o, c.io()), exit_ok) << c.err.str();
    const auto lines = read_lines(dir / "rates_time.csv");
    std::size_t rows = 0, rated = 0;
    for (const auto& l : lines)
    {
        if (l.empty() || l[0] == '#' || l.rfind("dt", 0) == 0)
            continue;
        ++rows;
        if (l.find(",--") == std::string::npos && l.back() != ',')
            ++rated;
    }
    EXPECT_EQ(rows, 3u);
    EXPECT_EQ(rated, 2u);
    std::cout << c.out.str();
    fs::remove_all(dir);
}
