#pragma once

// Run and study configuration: flat YAML key-value files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "diagnostics.hpp"
#include "gmsh_io.hpp"
#include "model.hpp"
#include "output.hpp"
#include "problem.hpp"
#include "run.hpp"

namespace urans
{

/// Validation or parse failure attributed to one configuration field.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field))
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

enum class MeshSource
{
    file,
    square,
    offset_circles
};

struct RunConfig
{
    MeshSource mesh = MeshSource::offset_circles;
    std::string mesh_file;     // mesh = file
    int square_n = 8;          // mesh = square
    double lc = 1.0 / 16.0;    // mesh = offset_circles
    std::string mesh_dir;      // where offset-circles meshes live; default: shipped data
    std::vector<int> noslip_tags{1, 2};
    bool analytic_wall_distance = true; // offset circles only
    std::string forcing = "offset_circles"; // offset_circles | none

    double dt = 5e-3;
    double t_end = 1.5;
    ModelParams params;
    KUpdateMode k_update = KUpdateMode::backward_euler;
    ViscousForm form = ViscousForm::full_gradient;

    std::string output_dir = "run";
    int snapshot_every = 0;
    int diagnostics_stride = 1;
    std::uint64_t seed = 0;
    std::string restart; // optional state file to continue from

    /// Directory that relative paths are resolved against.
    std::filesystem::path base_dir = ".";

    std::filesystem::path resolve(const std::string& p) const
    {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    }
};

struct StudyConfig
{
    RunConfig run;
    // time study
    std::vector<double> dts{8e-3, 6e-3, 4e-3, 2e-3};
    double dt_ref = 1e-3;
    // space study
    double h0 = 1.0 / 60.0;
    double alpha = 0.75;
    int levels = 5;
    // both
    double window_t0 = 1.0;
    double window_t1 = 1.3;
};

inline std::string to_string(MeshSource m)
{
    switch (m)
    {
    case MeshSource::file: return "file";
    case MeshSource::square: return "square";
    case MeshSource::offset_circles: return "offset_circles";
    }
    return "?";
}

inline std::string to_string(KUpdateMode m) { return m == KUpdateMode::backward_euler ? "be" : "exact"; }
inline std::string to_string(ViscousForm f) { return f == ViscousForm::full_gradient ? "full" : "symmetric"; }

namespace config_detail
{

inline const std::set<std::string>& run_keys()
{
    static const std::set<std::string> keys{
        "mesh",  "mesh_file", "square_n", "lc",      "mesh_dir",  "noslip_tags",  "wall_distance",
        "forcing", "dt",      "t_end",    "t_star",  "nu",        "tau",          "mu",
        "kappa", "L",         "U",        "damping", "k_update",  "viscous_form", "output_dir",
        "snapshot_every", "diagnostics_stride", "seed", "restart"};
    return keys;
}

inline const std::set<std::string>& study_keys()
{
    static const std::set<std::string> keys{"dts", "dt_ref", "h0", "alpha", "levels", "window"};
    return keys;
}

template <class T>
T get(const YAML::Node& node, const std::string& key, T fallback)
{
    const auto v = node[key];
    if (!v)
        return fallback;
    try
    {
        return v.as<T>();
    }
    catch (const YAML::Exception&)
    {
        throw ConfigError(key, "wrong type");
    }
}

} // namespace config_detail

/// Parses a run configuration; unknown keys are rejected. No semantic
/// validation beyond types and enumerations (see validate()).
inline RunConfig parse_run_config(const YAML::Node& node, const std::set<std::string>& extra_keys = {})
{
    using namespace config_detail;
    if (!node.IsMap())
        throw ConfigError("<root>", "configuration must be a key-value map");
    for (const auto& kv : node)
    {
        const auto key = kv.first.as<std::string>();
        if (!run_keys().count(key) && !extra_keys.count(key))
            throw ConfigError(key, "unknown key");
    }
    RunConfig c;
    const auto mesh = get<std::string>(node, "mesh", to_string(c.mesh));
    if (mesh == "file")
        c.mesh = MeshSource::file;
    else if (mesh == "square")
        c.mesh = MeshSource::square;
    else if (mesh == "offset_circles")
        c.mesh = MeshSource::offset_circles;
    else
        throw ConfigError("mesh", "expected file, square or offset_circles, got '" + mesh + "'");
    c.mesh_file = get<std::string>(node, "mesh_file", c.mesh_file);
    c.square_n = get<int>(node, "square_n", c.square_n);
    c.lc = get<double>(node, "lc", c.lc);
    c.mesh_dir = get<std::string>(node, "mesh_dir", c.mesh_dir);
    if (c.mesh == MeshSource::square)
        c.noslip_tags = {1};
    c.noslip_tags = get<std::vector<int>>(node, "noslip_tags", c.noslip_tags);
    const auto wd = get<std::string>(node, "wall_distance", c.analytic_wall_distance ? "analytic" : "polygonal");
    if (wd != "analytic" && wd != "polygonal")
        throw ConfigError("wall_distance", "expected analytic or polygonal");
    c.analytic_wall_distance = wd == "analytic";
    c.forcing = get<std::string>(node, "forcing", c.forcing);

    c.dt = get<double>(node, "dt", c.dt);
    c.t_end = get<double>(node, "t_end", c.t_end);
    auto& p = c.params;
    p.t_star = get<double>(node, "t_star", p.t_star);
    p.nu = get<double>(node, "nu", p.nu);
    p.tau = get<double>(node, "tau", p.tau);
    p.mu = get<double>(node, "mu", p.mu);
    p.kappa = get<double>(node, "kappa", p.kappa);
    p.length = get<double>(node, "L", p.length);
    p.velocity = get<double>(node, "U", p.velocity);
    try
    {
        p.damping = damping_from_string(get<std::string>(node, "damping", to_string(p.damping)));
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError("damping", e.what());
    }
    const auto ku = get<std::string>(node, "k_update", to_string(c.k_update));
    if (ku != "be" && ku != "exact")
        throw ConfigError("k_update", "expected be or exact");
    c.k_update = ku == "be" ? KUpdateMode::backward_euler : KUpdateMode::exact;
    const auto vf = get<std::string>(node, "viscous_form", to_string(c.form));
    if (vf != "full" && vf != "symmetric")
        throw ConfigError("viscous_form", "expected full or symmetric");
    c.form = vf == "full" ? ViscousForm::full_gradient : ViscousForm::symmetric_gradient;

    c.output_dir = get<std::string>(node, "output_dir", c.output_dir);
    c.snapshot_every = get<int>(node, "snapshot_every", c.snapshot_every);
    c.diagnostics_stride = get<int>(node, "diagnostics_stride", c.diagnostics_stride);
    c.seed = get<std::uint64_t>(node, "seed", c.seed);
    c.restart = get<std::string>(node, "restart", c.restart);
    return c;
}

inline YAML::Node to_yaml(const RunConfig& c)
{
    YAML::Node n;
    n["mesh"] = to_string(c.mesh);
    if (!c.mesh_file.empty())
        n["mesh_file"] = c.mesh_file;
    n["square_n"] = c.square_n;
    n["lc"] = c.lc;
    if (!c.mesh_dir.empty())
        n["mesh_dir"] = c.mesh_dir;
    n["noslip_tags"] = c.noslip_tags;
    n["wall_distance"] = c.analytic_wall_distance ? "analytic" : "polygonal";
    n["forcing"] = c.forcing;
    n["dt"] = c.dt;
    n["t_end"] = c.t_end;
    n["t_star"] = c.params.t_star;
    n["nu"] = c.params.nu;
    n["tau"] = c.params.tau;
    n["mu"] = c.params.mu;
    n["kappa"] = c.params.kappa;
    n["L"] = c.params.length;
    n["U"] = c.params.velocity;
    n["damping"] = to_string(c.params.damping);
    n["k_update"] = to_string(c.k_update);
    n["viscous_form"] = to_string(c.form);
    n["output_dir"] = c.output_dir;
    n["snapshot_every"] = c.snapshot_every;
    n["diagnostics_stride"] = c.diagnostics_stride;
    n["seed"] = c.seed;
    if (!c.restart.empty())
        n["restart"] = c.restart;
    return n;
}

inline std::string serialize(const RunConfig& c)
{
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << to_yaml(c);
    return std::string(out.c_str()) + "\n";
}

inline std::filesystem::path default_mesh_dir()
{
    if (const char* env = std::getenv("URANS_DATA_DIR"))
        return std::filesystem::path(env) / "meshes";
#ifdef URANS_DATA_DIR
    return std::filesystem::path(URANS_DATA_DIR) / "meshes";
#else
    return "data/meshes";
#endif
}

inline std::filesystem::path offset_circles_mesh_path(double lc, const std::filesystem::path& dir)
{
    return dir / fmt::format("offset_circles_lc{:.6f}.msh", lc);
}

inline std::filesystem::path mesh_dir_of(const RunConfig& c)
{
    return c.mesh_dir.empty() ? default_mesh_dir() : c.resolve(c.mesh_dir);
}

/// Semantic validation; throws ConfigError naming the offending field.
inline void validate(const RunConfig& c, bool require_files = true)
{
    auto require = [](bool ok, const char* field, const std::string& what) {
        if (!ok)
            throw ConfigError(field, what);
    };
    require(c.dt > 0.0, "dt", "must be > 0");
    require(c.t_end > 0.0, "t_end", "must be > 0");
    require(c.params.t_star >= 0.0, "t_star", "must be >= 0");
    require(c.params.nu > 0.0, "nu", "must be > 0");
    require(c.params.tau > 0.0, "tau", "must be > 0");
    require(c.params.mu > 0.0, "mu", "must be > 0");
    require(c.params.kappa > 0.0, "kappa", "must be > 0");
    require(c.params.length > 0.0, "L", "must be > 0");
    require(c.params.velocity > 0.0, "U", "must be > 0");
    require(c.snapshot_every >= 0, "snapshot_every", "must be >= 0");
    require(c.diagnostics_stride >= 0, "diagnostics_stride", "must be >= 0");
    require(!c.noslip_tags.empty(), "noslip_tags", "at least one no-slip tag is required");
    require(c.forcing == "offset_circles" || c.forcing == "none", "forcing", "expected offset_circles or none");
    require(!c.output_dir.empty(), "output_dir", "must not be empty");
    switch (c.mesh)
    {
    case MeshSource::square: require(c.square_n >= 1, "square_n", "must be >= 1"); break;
    case MeshSource::file:
        require(!c.mesh_file.empty(), "mesh_file", "required when mesh = file");
        if (require_files)
            require(std::filesystem::exists(c.resolve(c.mesh_file)), "mesh_file",
                    "no such file: " + c.resolve(c.mesh_file).string());
        break;
    case MeshSource::offset_circles: require(c.lc > 0.0, "lc", "must be > 0"); break;
    }
    if (require_files && !c.restart.empty())
        require(std::filesystem::exists(c.resolve(c.restart)), "restart", "no such file: " + c.resolve(c.restart).string());
}

inline RunConfig load_run_config(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path))
        throw ConfigError("config", "no such file: " + path.string());
    YAML::Node node;
    try
    {
        node = YAML::LoadFile(path.string());
    }
    catch (const YAML::Exception& e)
    {
        throw ConfigError("config", std::string("cannot parse: ") + e.what());
    }
    RunConfig c = parse_run_config(node);
    c.base_dir = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
    return c;
}

inline StudyConfig parse_study_config(const YAML::Node& node)
{
    using namespace config_detail;
    StudyConfig s;
    s.run = parse_run_config(node, study_keys());
    s.dts = get<std::vector<double>>(node, "dts", s.dts);
    s.dt_ref = get<double>(node, "dt_ref", s.dt_ref);
    s.h0 = get<double>(node, "h0", s.h0);
    s.alpha = get<double>(node, "alpha", s.alpha);
    s.levels = get<int>(node, "levels", s.levels);
    const auto w = get<std::vector<double>>(node, "window", {s.window_t0, s.window_t1});
    if (w.size() != 2)
        throw ConfigError("window", "expected [t0, t1]");
    s.window_t0 = w[0];
    s.window_t1 = w[1];
    return s;
}

inline YAML::Node to_yaml(const StudyConfig& s)
{
    YAML::Node n = to_yaml(s.run);
    n["dts"] = s.dts;
    n["dt_ref"] = s.dt_ref;
    n["h0"] = s.h0;
    n["alpha"] = s.alpha;
    n["levels"] = s.levels;
    n["window"] = std::vector<double>{s.window_t0, s.window_t1};
    return n;
}

inline std::string serialize(const StudyConfig& s)
{
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << to_yaml(s);
    return std::string(out.c_str()) + "\n";
}

inline void validate(const StudyConfig& s, bool require_files = true)
{
    validate(s.run, require_files);
    if (s.dts.empty())
        throw ConfigError("dts", "at least one step size is required");
    if (!(s.dt_ref > 0.0))
        throw ConfigError("dt_ref", "must be > 0");
    for (double dt : s.dts)
    {
        const double ratio = dt / s.dt_ref;
        if (!(dt > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0)
            throw ConfigError("dts", fmt::format("{} is not a positive multiple of dt_ref = {}", dt, s.dt_ref));
    }
    if (!(s.h0 > 0.0))
        throw ConfigError("h0", "must be > 0");
    if (!(s.alpha > 0.0 && s.alpha < 1.0))
        throw ConfigError("alpha", "must lie in (0, 1)");
    if (s.levels < 3)
        throw ConfigError("levels", "must be >= 3");
    if (!(s.window_t1 > s.window_t0) || s.window_t0 < 0.0)
        throw ConfigError("window", "expected 0 <= t0 < t1");
    if (s.window_t1 > s.run.t_end + 1e-12)
        throw ConfigError("window", "window end exceeds t_end");
}

inline StudyConfig load_study_config(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path))
        throw ConfigError("config", "no such file: " + path.string());
    YAML::Node node;
    try
    {
        node = YAML::LoadFile(path.string());
    }
    catch (const YAML::Exception& e)
    {
        throw ConfigError("config", std::string("cannot parse: ") + e.what());
    }
    StudyConfig s = parse_study_config(node);
    s.run.base_dir = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
    return s;
}

// ---------------------------------------------------------------------------
// Mesh resolution

/// gmsh executable from $URANS_GMSH, else "gmsh" on PATH.
inline std::string gmsh_command()
{
    if (const char* env = std::getenv("URANS_GMSH"))
        return env;
    return "gmsh";
}

/// Offset-circles mesh at target size lc: the shipped file if present,
/// otherwise generated with gmsh from the shipped recipe.
inline std::filesystem::path ensure_offset_circles_mesh(double lc, const std::filesystem::path& dir)
{
    const auto path = offset_circles_mesh_path(lc, dir);
    if (std::filesystem::exists(path))
        return path;
    const auto geo = dir.parent_path() / "offset_circles.geo";
    if (!std::filesystem::exists(geo))
        throw ConfigError("lc", "no mesh " + path.string() + " and no recipe " + geo.string());
    const auto cmd = fmt::format("{} -2 -format msh22 -setnumber lc {:.17g} \"{}\" -o \"{}\" > /dev/null 2>&1",
                                 gmsh_command(), lc, geo.string(), path.string());
    if (std::system(cmd.c_str()) != 0 || !std::filesystem::exists(path))
        throw ConfigError("lc", fmt::format("no shipped mesh for lc = {} and gmsh failed; generate it with "
                                            "tools/make_meshes.sh {} (set URANS_GMSH to the gmsh executable)",
                                            lc, lc));
    return path;
}

struct ProblemSetup
{
    std::shared_ptr<const FESpace> space;
    WallDistanceField wall;
    StepperOptions options;
};

inline std::shared_ptr<const Mesh> load_mesh(const RunConfig& c)
{
    switch (c.mesh)
    {
    case MeshSource::square: return std::make_shared<const Mesh>(build_structured_square(c.square_n));
    case MeshSource::file: return std::make_shared<const Mesh>(parse_gmsh_file(c.resolve(c.mesh_file).string()));
    case MeshSource::offset_circles:
        return std::make_shared<const Mesh>(parse_gmsh_file(ensure_offset_circles_mesh(c.lc, mesh_dir_of(c)).string()));
    }
    throw ConfigError("mesh", "unknown mesh source");
}

inline ProblemSetup make_problem(const RunConfig& c)
{
    ProblemSetup s;
    const auto mesh = load_mesh(c);
    s.space = std::make_shared<const FESpace>(mesh, std::set<int>(c.noslip_tags.begin(), c.noslip_tags.end()));
    if (c.mesh == MeshSource::offset_circles && c.analytic_wall_distance)
        s.wall = compute_wall_distance(*s.space, OffsetCircles{}.distance_function());
    else
        s.wall = compute_wall_distance(*s.space);
    s.options.params = c.params;
    s.options.k_mode = c.k_update;
    s.options.form = c.form;
    s.options.force = c.forcing == "offset_circles" ? ForceFunction(offset_circles_force) : zero_force();
    return s;
}

inline RunControl make_control(const RunConfig& c)
{
    RunControl ctl;
    ctl.dt = c.dt;
    ctl.t_end = c.t_end;
    ctl.snapshot_every = c.snapshot_every;
    ctl.diagnostics_stride = c.diagnostics_stride;
    return ctl;
}

/// Constants of the cumulative stability bound for a configured problem.
/// The Poincare constant is that of the full-gradient form, which bounds
/// the symmetric-gradient form from below under no-slip conditions.
inline LedgerConstants ledger_constants(const RunConfig& c, const Stepper& stepper)
{
    const FESpace& space = stepper.space();
    const SparseMatrix K = c.form == ViscousForm::full_gradient
                               ? stepper.stiffness()
                               : assemble_diffusion(space, CoefficientField::constant(1.0), ViscousForm::full_gradient);
    return {space.mesh().domain_area(), c.params.nu, c.params.tau, poincare_constant(space, stepper.mass(), K)};
}

/// Header metadata of the statistics file.
inline StatsMetadata stats_metadata(const RunConfig& c, const FESpace& space, const LedgerConstants& lc)
{
    const auto& m = space.mesh();
    return {{"area", fmt::format("{:.17g}", lc.area)},
            {"nu", fmt::format("{:.17g}", lc.nu)},
            {"tau", fmt::format("{:.17g}", lc.tau)},
            {"poincare", fmt::format("{:.17g}", lc.poincare)},
            {"dt", fmt::format("{:.17g}", c.dt)},
            {"t_star", fmt::format("{:.17g}", c.params.t_star)},
            {"k_update", to_string(c.k_update)},
            {"viscous_form", to_string(c.form)},
            {"mesh", to_string(c.mesh)},
            {"vertices", std::to_string(m.num_vertices())},
            {"triangles", std::to_string(m.num_triangles())},
            {"h_max", fmt::format("{:.17g}", m.h_max())},
            {"h_min", fmt::format("{:.17g}", m.h_min())},
            {"quasi_uniformity", fmt::format("{:.6g}", m.quasi_uniformity())},
            {"velocity_dofs", std::to_string(space.num_velocity_dofs())},
            {"pressure_dofs", std::to_string(space.num_pressure_dofs())}};
}

} // namespace urans
