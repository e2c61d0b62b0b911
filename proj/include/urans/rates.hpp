#pragma once

// Convergence-rate tables and the two estimators used to fill them:
// error against resolution, and the ratio of successive differences
//
//     (u_h - u_{ah}) / (u_{ah} - u_{a^2 h}) = a^{-p}.

#include <cmath>
#include <optional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace urans
{

/// p from two errors at two resolutions: log(e0/e1) / log(r0/r1).
inline double observed_order(double e0, double e1, double r0, double r1)
{
    if (!(e0 > 0.0 && e1 > 0.0 && r0 > 0.0 && r1 > 0.0) || r0 == r1)
        throw std::domain_error("observed_order: errors and resolutions must be positive and distinct");
    return std::log(e0 / e1) / std::log(r0 / r1);
}

/// p from two successive differences on a geometric sequence with ratio alpha.
inline double ratio_order(double d0, double d1, double alpha)
{
    if (!(d0 > 0.0 && d1 > 0.0) || !(alpha > 0.0 && alpha != 1.0))
        throw std::domain_error("ratio_order: differences must be positive and alpha in (0,1) or (1,inf)");
    return -std::log(d0 / d1) / std::log(alpha);
}

enum class RateStyle
{
    error,  // rows are errors at resolution r_i
    ratio   // rows are differences between level i and i+1 with ratio alpha
};

/// How a column enters the rate formula.
enum class ColumnKind
{
    norm,          // value is a norm
    squared_norm   // value is a squared norm; the rate is taken on its square root
};

struct RateColumn
{
    std::string name;
    ColumnKind kind = ColumnKind::norm;
};

struct RateRow
{
    double resolution = 0.0;
    std::vector<double> values;
    std::vector<std::optional<double>> rates; // empty on the first row
};

struct RateTable
{
    std::string title;
    std::string resolution_name;
    RateStyle style = RateStyle::error;
    double alpha = 0.0; // ratio style only
    std::vector<RateColumn> columns;
    std::vector<RateRow> rows;

    void add_row(double resolution, std::vector<double> values)
    {
        if (values.size() != columns.size())
            throw std::invalid_argument("RateTable: row width does not match columns");
        RateRow row{resolution, std::move(values), {}};
        row.rates.resize(columns.size());
        if (!rows.empty())
        {
            const auto& prev = rows.back();
            for (std::size_t c = 0; c < columns.size(); ++c)
            {
                double a = prev.values[c], b = row.values[c];
                if (columns[c].kind == ColumnKind::squared_norm)
                {
                    a = std::sqrt(a);
                    b = std::sqrt(b);
                }
                if (a > 0.0 && b > 0.0)
                    row.rates[c] = style == RateStyle::error ? observed_order(a, b, prev.resolution, row.resolution)
                                                             : ratio_order(a, b, alpha);
            }
        }
        rows.push_back(std::move(row));
    }

    /// Rates of column c from the second row on (missing entries skipped).
    std::vector<double> rates(std::size_t c) const
    {
        std::vector<double> r;
        for (const auto& row : rows)
            if (c < row.rates.size() && row.rates[c])
                r.push_back(*row.rates[c]);
        return r;
    }

    void write_csv(std::ostream& os) const
    {
        os << resolution_name;
        for (const auto& col : columns)
            os << ',' << col.name << ",rate";
        os << '\n';
        for (const auto& row : rows)
        {
            os << fmt::format("{:.17g}", row.resolution);
            for (std::size_t c = 0; c < columns.size(); ++c)
            {
                os << fmt::format(",{:.17g},", row.values[c]);
                if (c < row.rates.size() && row.rates[c])
                    os << fmt::format("{:.2f}", *row.rates[c]);
            }
            os << '\n';
        }
    }

    /// Aligned text, rates to 2 decimals.
    void write_text(std::ostream& os) const
    {
        if (!title.empty())
            os << title << '\n';
        std::vector<std::string> head{resolution_name};
        for (const auto& col : columns)
        {
            head.push_back(col.name);
            head.push_back("rate");
        }
        std::vector<std::vector<std::string>> cells{head};
        for (const auto& row : rows)
        {
            std::vector<std::string> line{fmt::format("{:.6g}", row.resolution)};
            for (std::size_t c = 0; c < columns.size(); ++c)
            {
                line.push_back(fmt::format("{:.6g}", row.values[c]));
                line.push_back(c < row.rates.size() && row.rates[c] ? fmt::format("{:.2f}", *row.rates[c]) : "--");
            }
            cells.push_back(std::move(line));
        }
        std::vector<std::size_t> width(head.size(), 0);
        for (const auto& line : cells)
            for (std::size_t i = 0; i < line.size(); ++i)
                width[i] = std::max(width[i], line[i].size());
        for (const auto& line : cells)
        {
            for (std::size_t i = 0; i < line.size(); ++i)
                os << (i ? " | " : "") << fmt::format("{:>{}}", line[i], width[i]);
            os << '\n';
        }
    }
};

/// Table from errors e[i][c] at resolutions r[i].
inline RateTable error_rate_table(std::string resolution_name, std::vector<RateColumn> columns,
                                  const std::vector<double>& resolution, const std::vector<std::vector<double>>& errors)
{
    if (resolution.size() != errors.size())
        throw std::invalid_argument("error_rate_table: size mismatch");
    RateTable t;
    t.resolution_name = std::move(resolution_name);
    t.columns = std::move(columns);
    for (std::size_t i = 0; i < resolution.size(); ++i)
        t.add_row(resolution[i], errors[i]);
    return t;
}

/// Table from differences d[i][c] between levels i and i+1 of a sequence
/// h0 * alpha^i; row i is labelled with the coarser resolution.
inline RateTable ratio_rate_table(std::string resolution_name, std::vector<RateColumn> columns, double h0,
                                  double alpha, const std::vector<std::vector<double>>& differences)
{
    RateTable t;
    t.resolution_name = std::move(resolution_name);
    t.columns = std::move(columns);
    t.style = RateStyle::ratio;
    t.alpha = alpha;
    double h = h0;
    for (const auto& d : differences)
    {
        t.add_row(h, d);
        h *= alpha;
    }
    return t;
}

/// Reads a table written by write_csv (rates as printed, 2 decimals).
inline RateTable read_rate_csv(std::istream& is)
{
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');)
            cells.push_back(c);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        return cells;
    };
    RateTable t;
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("rate table: empty input");
    const auto head = split(line);
    if (head.size() < 3 || head.size() % 2 == 0)
        throw std::invalid_argument("rate table: malformed header");
    t.resolution_name = head[0];
    for (std::size_t i = 1; i < head.size(); i += 2)
        t.columns.push_back({head[i], ColumnKind::norm});
    while (std::getline(is, line))
    {
        if (line.empty())
            continue;
        const auto cells = split(line);
        if (cells.size() != head.size())
            throw std::invalid_argument("rate table: row width does not match header");
        RateRow row;
        row.resolution = std::stod(cells[0]);
        for (std::size_t i = 1; i < cells.size(); i += 2)
        {
            row.values.push_back(std::stod(cells[i]));
            row.rates.push_back(cells[i + 1].empty() ? std::nullopt : std::optional<double>(std::stod(cells[i + 1])));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace urans
