#pragma once

// Reader/writer for the ASCII GMSH 2.2 mesh format, restricted to what a
// 2D triangulation with tagged boundary lines needs.

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include <fmt/format.h>

#include "mesh.hpp"

namespace urans
{

class GmshParseError : public MeshError
{
public:
    GmshParseError(std::size_t line, const std::string& what)
        : MeshError(fmt::format("gmsh line {}: {}", line, what)), line_(line)
    {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace gmsh_detail
{

class LineReader
{
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& out)
    {
        while (std::getline(in_, out))
        {
            ++line_;
            if (!out.empty() && out.back() == '\r')
                out.pop_back();
            if (out.find_first_not_of(" \t") != std::string::npos)
                return true;
        }
        return false;
    }

    std::string expect(const char* what)
    {
        std::string s;
        if (!next(s))
            throw GmshParseError(line_ + 1, fmt::format("unexpected end of file, expected {}", what));
        return s;
    }

    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

} // namespace gmsh_detail

/// Parses GMSH ASCII 2.2. Element types 1 (line) and 2 (triangle) are
/// used; type 15 (point) is skipped, anything else is an error. The
/// physical tag (first element tag) of each line becomes its boundary
/// tag. Nodes not referenced by any triangle are dropped.
inline Mesh parse_gmsh(std::istream& in)
{
    using gmsh_detail::trim;
    gmsh_detail::LineReader rd(in);

    std::unordered_map<long, Point> nodes;
    std::vector<std::array<long, 3>> tris;
    std::vector<std::pair<std::array<long, 2>, int>> lines;
    std::vector<std::size_t> tri_lines, line_lines;
    bool have_format = false, have_nodes = false, have_elements = false;

    std::string s;
    while (rd.next(s))
    {
        const std::string header = trim(s);
        if (header.empty() || header[0] != '$')
            throw GmshParseError(rd.line(), "expected section header, got '" + header + "'");

        if (header == "$MeshFormat")
        {
            std::istringstream ls(rd.expect("format line"));
            std::string version;
            int file_type = -1, data_size = 0;
            if (!(ls >> version >> file_type >> data_size))
                throw GmshParseError(rd.line(), "malformed $MeshFormat line");
            if (version != "2.2" && version != "2")
                throw GmshParseError(rd.line(), "unsupported format version " + version + " (need 2.2)");
            if (file_type != 0)
                throw GmshParseError(rd.line(), "binary gmsh files are not supported");
            if (trim(rd.expect("$EndMeshFormat")) != "$EndMeshFormat")
                throw GmshParseError(rd.line(), "malformed section header, expected $EndMeshFormat");
            have_format = true;
        }
        else if (header == "$Nodes")
        {
            if (!have_format)
                throw GmshParseError(rd.line(), "$Nodes before $MeshFormat");
            long count = 0;
            if (!(std::istringstream(rd.expect("node count")) >> count) || count < 0)
                throw GmshParseError(rd.line(), "malformed node count");
            for (long i = 0; i < count; ++i)
            {
                std::istringstream ls(rd.expect("node"));
                long id;
                double x, y, z;
                if (!(ls >> id >> x >> y >> z))
                    throw GmshParseError(rd.line(), "malformed node line");
                nodes[id] = {x, y};
            }
            if (trim(rd.expect("$EndNodes")) != "$EndNodes")
                throw GmshParseError(rd.line(), "malformed section header, expected $EndNodes");
            have_nodes = true;
        }
        else if (header == "$Elements")
        {
            if (!have_nodes)
                throw GmshParseError(rd.line(), "$Elements before $Nodes");
            long count = 0;
            if (!(std::istringstream(rd.expect("element count")) >> count) || count < 0)
                throw GmshParseError(rd.line(), "malformed element count");
            for (long i = 0; i < count; ++i)
            {
                std::istringstream ls(rd.expect("element"));
                long id;
                int type, ntags;
                if (!(ls >> id >> type >> ntags) || ntags < 0)
                    throw GmshParseError(rd.line(), "malformed element line");
                std::vector<long> tags(ntags);
                for (auto& t : tags)
                    if (!(ls >> t))
                        throw GmshParseError(rd.line(), "malformed element tags");
                int nn = 0;
                switch (type)
                {
                case 1: nn = 2; break;
                case 2: nn = 3; break;
                case 15: nn = 1; break;
                default:
                    throw GmshParseError(rd.line(), fmt::format("unsupported element type {}", type));
                }
                std::array<long, 3> conn{};
                for (int k = 0; k < nn; ++k)
                {
                    if (!(ls >> conn[k]))
                        throw GmshParseError(rd.line(), "malformed element connectivity");
                    if (!nodes.contains(conn[k]))
                        throw GmshParseError(rd.line(), fmt::format("element references unknown node {}", conn[k]));
                }
                if (type == 2)
                {
                    tris.push_back(conn);
                    tri_lines.push_back(rd.line());
                }
                else if (type == 1)
                {
                    const int tag = tags.empty() ? 0 : static_cast<int>(tags[0]);
                    lines.push_back({{conn[0], conn[1]}, tag});
                    line_lines.push_back(rd.line());
                }
            }
            if (trim(rd.expect("$EndElements")) != "$EndElements")
                throw GmshParseError(rd.line(), "malformed section header, expected $EndElements");
            have_elements = true;
        }
        else
        {
            // Unknown or optional section ($PhysicalNames, ...): skip to its end.
            const std::string end = "$End" + header.substr(1);
            std::string body;
            for (;;)
            {
                if (!rd.next(body))
                    throw GmshParseError(rd.line(), "unterminated section " + header);
                if (trim(body) == end)
                    break;
                if (trim(body)[0] == '$')
                    throw GmshParseError(rd.line(), "malformed section header '" + trim(body) + "'");
            }
        }
    }

    if (!have_format)
        throw GmshParseError(rd.line(), "missing $MeshFormat");
    if (!have_elements || tris.empty())
        throw GmshParseError(rd.line(), "no triangles in mesh");

    std::unordered_map<long, int> index;
    std::vector<Point> verts;
    std::vector<Triangle> triangles;
    triangles.reserve(tris.size());
    auto vid = [&](long gid) {
        auto [it, fresh] = index.try_emplace(gid, static_cast<int>(verts.size()));
        if (fresh)
            verts.push_back(nodes.at(gid));
        return it->second;
    };
    for (const auto& t : tris)
        triangles.push_back({vid(t[0]), vid(t[1]), vid(t[2])});

    std::vector<BoundaryEdge> bnd;
    for (std::size_t i = 0; i < lines.size(); ++i)
    {
        const auto& [conn, tag] = lines[i];
        auto a = index.find(conn[0]), b = index.find(conn[1]);
        if (a == index.end() || b == index.end())
            throw GmshParseError(line_lines[i], "boundary line does not touch any triangle");
        bnd.push_back({{a->second, b->second}, tag});
    }

    try
    {
        return Mesh(std::move(verts), std::move(triangles), std::move(bnd));
    }
    catch (const GmshParseError&)
    {
        throw;
    }
    catch (const MeshError& e)
    {
        throw GmshParseError(rd.line(), e.what());
    }
}

inline Mesh parse_gmsh_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw MeshError("cannot open mesh file " + path);
    return parse_gmsh(in);
}

/// Writes the mesh as GMSH ASCII 2.2 with 1-based node/element ids.
inline void write_gmsh(std::ostream& out, const Mesh& mesh)
{
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    out << "$Nodes\n" << mesh.num_vertices() << '\n';
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
    {
        const auto& p = mesh.vertices()[i];
        out << fmt::format("{} {:.17g} {:.17g} 0\n", i + 1, p.x, p.y);
    }
    out << "$EndNodes\n";
    const auto& bnd = mesh.boundary_edges();
    out << "$Elements\n" << bnd.size() + mesh.num_triangles() << '\n';
    std::size_t id = 1;
    for (const auto& be : bnd)
        out << fmt::format("{} 1 2 {} {} {} {}\n", id++, be.tag, be.tag, be.vertices[0] + 1, be.vertices[1] + 1);
    for (const auto& t : mesh.triangles())
        out << fmt::format("{} 2 2 0 0 {} {} {}\n", id++, t[0] + 1, t[1] + 1, t[2] + 1);
    out << "$EndElements\n";
}

} // namespace urans
