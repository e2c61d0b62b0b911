#pragma once

// File formats: statistics CSV, legacy VTK snapshots, restart state.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "solver.hpp"

namespace urans
{

class FormatError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Statistics CSV
//
//   # urans-stats v1
//   # key=value            (one per line: area, nu, tau, poincare, dt, k_update, ...)
//   n,t,kinetic_energy,...
//   rows, doubles with 17 significant digits

inline constexpr const char* stats_magic = "# urans-stats v1";

inline const std::vector<std::string>& stats_columns()
{
    static const std::vector<std::string> cols{"n",
                                               "t",
                                               "kinetic_energy",
                                               "nu_dissipation",
                                               "nut_dissipation",
                                               "k",
                                               "forcing_power",
                                               "energy_residual",
                                               "k_residual",
                                               "increment_sq",
                                               "force_sq",
                                               "eps",
                                               "model_on",
                                               "solve_residual"};
    return cols;
}

using StatsMetadata = std::map<std::string, std::string>;

class StatsWriter
{
public:
    StatsWriter(const std::filesystem::path& path, const StatsMetadata& meta) : os_(path)
    {
        if (!os_)
            throw FormatError("cannot write " + path.string());
        os_ << stats_magic << '\n';
        for (const auto& [k, v] : meta)
            os_ << "# " << k << '=' << v << '\n';
        for (std::size_t i = 0; i < stats_columns().size(); ++i)
            os_ << (i ? "," : "") << stats_columns()[i];
        os_ << '\n';
    }

    void write(const BudgetRecord& r)
    {
        os_ << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g}\n",
                           r.step, r.t, r.kinetic_energy, r.nu_dissipation, r.nut_dissipation, r.k, r.forcing_power,
                           r.energy_residual, r.k_residual, r.increment_sq, r.force_sq, r.eps, r.model_on ? 1 : 0,
                           r.solve_residual);
        os_.flush();
    }

private:
    std::ofstream os_;
};

struct StatsFile
{
    StatsMetadata meta;
    std::vector<BudgetRecord> records;

    double number(const std::string& key) const
    {
        auto it = meta.find(key);
        if (it == meta.end())
            throw FormatError("statistics header lacks '" + key + "'");
        return std::stod(it->second);
    }
};

inline StatsFile read_stats(std::istream& is)
{
    StatsFile f;
    std::string line;
    if (!std::getline(is, line))
        throw FormatError("empty statistics file");
    if (line != stats_magic)
        throw FormatError("unsupported statistics format '" + line + "' (expected '" + stats_magic + "')");
    std::size_t lineno = 1;
    bool header = false;
    while (std::getline(is, line))
    {
        ++lineno;
        if (line.empty())
            continue;
        if (line.rfind("# ", 0) == 0)
        {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw FormatError(fmt::format("line {}: malformed metadata", lineno));
            f.meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');)
            cells.push_back(c);
        if (!header)
        {
            if (cells != stats_columns())
                throw FormatError(fmt::format("line {}: unexpected column header", lineno));
            header = true;
            continue;
        }
        if (cells.size() != stats_columns().size())
            throw FormatError(fmt::format("line {}: expected {} columns, got {}", lineno, stats_columns().size(),
                                          cells.size()));
        try
        {
            BudgetRecord r;
            r.step = std::stoll(cells[0]);
            double* fields[] = {&r.t, &r.kinetic_energy, &r.nu_dissipation, &r.nut_dissipation, &r.k,
                                &r.forcing_power, &r.energy_residual, &r.k_residual, &r.increment_sq, &r.force_sq,
                                &r.eps};
            for (std::size_t i = 0; i < 11; ++i)
                *fields[i] = std::stod(cells[i + 1]);
            r.model_on = std::stoi(cells[12]) != 0;
            r.solve_residual = std::stod(cells[13]);
            f.records.push_back(r);
        }
        catch (const std::logic_error&)
        {
            throw FormatError(fmt::format("line {}: malformed number", lineno));
        }
    }
    if (!header)
        throw FormatError("statistics file has no column header");
    return f;
}

inline StatsFile read_stats_file(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw FormatError("cannot open " + path.string());
    return read_stats(is);
}

// ---------------------------------------------------------------------------
// Restart state (text, lossless)
//
//   urans-state v1
//   t <t>  step <n>  k <k>  model_on <0|1>
//   velocity <n_v>   followed by n_v values
//   pressure <n_p>   followed by n_p values

inline constexpr const char* state_magic = "urans-state v1";

inline void write_state(std::ostream& os, const State& s)
{
    os << state_magic << '\n';
    os << fmt::format("t {:.17g}\nstep {}\nk {:.17g}\nmodel_on {}\n", s.t, s.step, s.k, s.model_on ? 1 : 0);
    os << "velocity " << s.v.size() << '\n';
    for (Eigen::Index i = 0; i < s.v.size(); ++i)
        os << fmt::format("{:.17g}\n", s.v[i]);
    os << "pressure " << s.p.size() << '\n';
    for (Eigen::Index i = 0; i < s.p.size(); ++i)
        os << fmt::format("{:.17g}\n", s.p[i]);
}

inline void write_state_file(const std::filesystem::path& path, const State& s)
{
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp);
        if (!os)
            throw FormatError("cannot write " + tmp);
        write_state(os, s);
    }
    std::filesystem::rename(tmp, path);
}

inline State read_state(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != state_magic)
        throw FormatError("unsupported state format '" + line + "'");
    State s;
    auto expect = [&](const char* key) {
        std::string k;
        if (!(is >> k) || k != key)
            throw FormatError(std::string("state file: expected '") + key + "'");
    };
    int on = 0;
    expect("t");
    is >> s.t;
    expect("step");
    is >> s.step;
    expect("k");
    is >> s.k;
    expect("model_on");
    is >> on;
    s.model_on = on != 0;
    auto read_vec = [&](const char* key, Vector& v) {
        expect(key);
        Eigen::Index n = 0;
        if (!(is >> n) || n < 0)
            throw FormatError(std::string("state file: bad ") + key + " size");
        v.resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
            if (!(is >> v[i]))
                throw FormatError(std::string("state file: truncated ") + key);
    };
    read_vec("velocity", s.v);
    read_vec("pressure", s.p);
    if (!is)
        throw FormatError("state file: malformed header values");
    return s;
}

inline State read_state_file(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw FormatError("cannot open " + path.string());
    return read_state(is);
}

// ---------------------------------------------------------------------------
// Legacy ASCII VTK snapshot: every P2 triangle split into four linear
// triangles through its edge midpoints; fields given at the P2 nodes.

inline void write_vtk(std::ostream& os, const FESpace& space, const State& s, const WallDistanceField* y = nullptr)
{
    const auto& mesh = space.mesh();
    const auto nn = space.num_nodes();
    os << "# vtk DataFile Version 3.0\n";
    if (s.model_on)
        os << fmt::format("urans t={:.17g} k={:.17g}\n", s.t, s.k);
    else
        os << fmt::format("urans t={:.17g}\n", s.t);
    os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << nn << " double\n";
    for (std::size_t n = 0; n < nn; ++n)
    {
        const Point p = space.node_point(n);
        os << fmt::format("{:.17g} {:.17g} 0\n", p.x, p.y);
    }
    const auto nc = 4 * mesh.num_triangles();
    os << "CELLS " << nc << ' ' << 4 * nc << '\n';
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        const auto n = space.p2_nodes(t);
        // vertices 0,1,2; midpoints 3=(0,1) 4=(1,2) 5=(2,0)
        os << "3 " << n[0] << ' ' << n[3] << ' ' << n[5] << '\n';
        os << "3 " << n[3] << ' ' << n[1] << ' ' << n[4] << '\n';
        os << "3 " << n[5] << ' ' << n[4] << ' ' << n[2] << '\n';
        os << "3 " << n[3] << ' ' << n[4] << ' ' << n[5] << '\n';
    }
    os << "CELL_TYPES " << nc << '\n';
    for (std::size_t c = 0; c < nc; ++c)
        os << "5\n";

    // Pressure is P1: vertex values, midpoint averages.
    std::vector<double> p(nn, 0.0);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        const auto n = space.p2_nodes(t);
        const auto& tri = mesh.triangles()[t];
        for (int k = 0; k < 3; ++k)
        {
            p[n[k]] = s.p[tri[k]];
            p[n[3 + k]] = 0.5 * (s.p[tri[k]] + s.p[tri[(k + 1) % 3]]);
        }
    }
    os << "POINT_DATA " << nn << '\n';
    os << "VECTORS velocity double\n";
    for (std::size_t n = 0; n < nn; ++n)
        os << fmt::format("{:.9g} {:.9g} 0\n", s.v[space.velocity_dof(n, 0)], s.v[space.velocity_dof(n, 1)]);
    os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (double x : p)
        os << fmt::format("{:.9g}\n", x);
    if (y)
    {
        os << "SCALARS wall_distance double 1\nLOOKUP_TABLE default\n";
        for (std::size_t n = 0; n < nn; ++n)
            os << fmt::format("{:.9g}\n", y->at_node(n));
    }
}

inline void write_vtk_file(const std::filesystem::path& path, const FESpace& space, const State& s,
                           const WallDistanceField* y = nullptr)
{
    std::ofstream os(path);
    if (!os)
        throw FormatError("cannot write " + path.string());
    write_vtk(os, space, s, y);
}

} // namespace urans
