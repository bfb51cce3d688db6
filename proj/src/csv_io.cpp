// SPDX-License-Identifier: Apache-2.0
//
// recipcal - TDD reciprocity calibration for hybrid beamforming transceivers
// Copyright (C) 2026 The recipcal authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "recipcal/csv_io.hpp"

#include "recipcal/errors.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace recipcal
{
    std::string format_double(double v)
    {
        if (std::isnan(v))
            return "nan";
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    }

    bool parse_double(const std::string &s, double &out)
    {
        if (s.empty())
            return false;
        const char *first = s.data();
        const char *last = s.data() + s.size();
        if (*first == '+')
            ++first;
        const auto res = std::from_chars(first, last, out);
        return res.ec == std::errc() && res.ptr == last;
    }

    namespace
    {
        std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos)
                return "";
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        }

        std::vector<std::string> split(const std::string &line)
        {
            std::vector<std::string> out;
            std::string cell;
            std::istringstream ss(line);
            while (std::getline(ss, cell, ','))
                out.push_back(trim(cell));
            if (!line.empty() && line.back() == ',')
                out.emplace_back();
            return out;
        }

        struct Field
        {
            const CsvDocument &doc;
            const std::string &source;

            double number(std::size_t r, std::size_t c) const
            {
                double v;
                if (!parse_double(doc.rows[r][c], v))
                    throw parse_error(source, doc.row_lines[r], "column '" + doc.columns[c] + "': not a number: '" +
                                                                    doc.rows[r][c] + "'");
                return v;
            }

            arma::uword index(std::size_t r, std::size_t c, arma::uword limit) const
            {
                const std::string &s = doc.rows[r][c];
                arma::uword v = 0;
                const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
                if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
                    throw parse_error(source, doc.row_lines[r], "column '" + doc.columns[c] + "': not an index: '" + s + "'");
                if (v >= limit)
                    throw parse_error(source, doc.row_lines[r], "column '" + doc.columns[c] + "': index " + s +
                                                                    " out of range (< " + std::to_string(limit) + ")");
                return v;
            }
        };

        void expect_columns(const CsvDocument &doc, const std::string &source, const std::vector<std::string> &cols)
        {
            if (doc.columns != cols)
            {
                std::string want;
                for (const auto &c : cols)
                    want += (want.empty() ? "" : ",") + c;
                throw parse_error(source, doc.column_line, "expected columns '" + want + "'");
            }
        }

        arma::uword meta_size(const CsvDocument &doc, const std::string &source, const std::string &key)
        {
            const auto it = doc.meta.find(key);
            if (it == doc.meta.end())
                throw parse_error(source, doc.column_line, "missing metadata '" + key + "'");
            arma::uword v = 0;
            const auto &s = it->second;
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
                throw parse_error(source, doc.meta_lines.at(key), "metadata '" + key + "' is not a non-negative integer");
            return v;
        }

        void expect_kind(const CsvDocument &doc, const std::string &source, const std::string &kind)
        {
            const auto it = doc.meta.find("kind");
            if (it == doc.meta.end())
                throw parse_error(source, doc.column_line, "missing metadata 'kind' (expected kind=" + kind + ")");
            if (it->second != kind)
                throw parse_error(source, doc.meta_lines.at("kind"), "expected kind=" + kind + ", got " + it->second);
        }
    }

    void write_csv(std::ostream &os,
                   const std::vector<std::pair<std::string, std::string>> &meta,
                   const std::vector<std::string> &columns,
                   const std::vector<std::vector<std::string>> &rows)
    {
        os << csv_magic << '\n';
        for (const auto &[k, v] : meta)
            os << "# " << k << '=' << v << '\n';
        for (std::size_t c = 0; c < columns.size(); ++c)
            os << (c ? "," : "") << columns[c];
        os << '\n';
        for (const auto &row : rows)
        {
            for (std::size_t c = 0; c < row.size(); ++c)
                os << (c ? "," : "") << row[c];
            os << '\n';
        }
    }

    CsvDocument read_csv(std::istream &is, const std::string &source)
    {
        CsvDocument doc;
        std::string line;
        std::size_t n = 0;

        if (!std::getline(is, line))
            throw parse_error(source, 1, "empty file");
        ++n;
        if (trim(line) != csv_magic)
            throw parse_error(source, n, std::string("expected header '") + csv_magic + "'");

        bool have_columns = false;
        while (std::getline(is, line))
        {
            ++n;
            const std::string t = trim(line);
            if (t.empty())
                continue;
            if (t[0] == '#')
            {
                if (have_columns)
                    throw parse_error(source, n, "metadata line after the column header");
                std::istringstream ss(t.substr(1));
                std::string kv;
                while (ss >> kv)
                {
                    const auto eq = kv.find('=');
                    if (eq == std::string::npos || eq == 0)
                        throw parse_error(source, n, "metadata must be key=value, got '" + kv + "'");
                    doc.meta[kv.substr(0, eq)] = kv.substr(eq + 1);
                    doc.meta_lines[kv.substr(0, eq)] = n;
                }
                continue;
            }
            auto cells = split(t);
            if (!have_columns)
            {
                doc.columns = std::move(cells);
                doc.column_line = n;
                have_columns = true;
                continue;
            }
            if (cells.size() != doc.columns.size())
                throw parse_error(source, n, "expected " + std::to_string(doc.columns.size()) + " fields, got " +
                                                 std::to_string(cells.size()));
            doc.rows.push_back(std::move(cells));
            doc.row_lines.push_back(n);
        }
        if (!have_columns)
            throw parse_error(source, n, "missing column header line");
        return doc;
    }

    void write_channel_csv(std::ostream &os, const ChannelMatrix &c)
    {
        std::vector<std::vector<std::string>> rows;
        rows.reserve(c.entries.n_elem);
        for (arma::uword i = 0; i < c.entries.n_rows; ++i)
            for (arma::uword j = 0; j < c.entries.n_cols; ++j)
                rows.push_back({std::to_string(i), std::to_string(j), format_double(c.entries(i, j).real()),
                                format_double(c.entries(i, j).imag())});
        write_csv(os,
                  {{"kind", "channel"},
                   {"rows", std::to_string(c.entries.n_rows)},
                   {"cols", std::to_string(c.entries.n_cols)},
                   {"reciprocal", c.reciprocal ? "1" : "0"}},
                  {"row", "col", "re", "im"}, rows);
    }

    ChannelMatrix read_channel_csv(std::istream &is, const std::string &source)
    {
        const CsvDocument doc = read_csv(is, source);
        expect_kind(doc, source, "channel");
        expect_columns(doc, source, {"row", "col", "re", "im"});
        const arma::uword n_rows = meta_size(doc, source, "rows");
        const arma::uword n_cols = meta_size(doc, source, "cols");

        ChannelMatrix c;
        c.entries.zeros(n_rows, n_cols);
        arma::umat seen(n_rows, n_cols, arma::fill::zeros);
        const Field f{doc, source};
        for (std::size_t r = 0; r < doc.rows.size(); ++r)
        {
            const arma::uword i = f.index(r, 0, n_rows);
            const arma::uword j = f.index(r, 1, n_cols);
            if (seen(i, j))
                throw parse_error(source, doc.row_lines[r], "duplicate entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
            seen(i, j) = 1;
            c.entries(i, j) = {f.number(r, 2), f.number(r, 3)};
        }
        if (doc.rows.size() != n_rows * n_cols)
            throw parse_error(source, doc.row_lines.empty() ? doc.column_line : doc.row_lines.back(),
                              "expected " + std::to_string(n_rows * n_cols) + " entries, got " + std::to_string(doc.rows.size()));
        c.reciprocal = n_rows == n_cols && arma::approx_equal(c.entries, arma::cx_mat(c.entries.st()), "absdiff", 0.0);
        const auto rec = doc.meta.find("reciprocal");
        if (rec != doc.meta.end() && rec->second == "1" && !c.reciprocal)
            throw parse_error(source, doc.meta_lines.at("reciprocal"), "reciprocal=1 but the entries are not symmetric");
        return c;
    }

    void write_calibration_csv(std::ostream &os,
                               const CalibrationSolution &sol,
                               const std::vector<std::pair<std::string, std::string>> &extra)
    {
        std::vector<std::pair<std::string, std::string>> meta = {
            {"kind", "calibration"},
            {"residual", format_double(sol.eigenvalue)},
            {"next_eigenvalue", format_double(sol.next_eigenvalue)},
            {"eigen_gap", format_double(sol.eigen_gap)},
            {"degenerate", sol.degenerate ? "1" : "0"}};
        meta.insert(meta.end(), extra.begin(), extra.end());

        std::vector<std::vector<std::string>> rows;
        for (arma::uword m = 0; m < sol.f.size(); ++m)
            rows.push_back({std::to_string(m), format_double(sol.f.f(m).real()), format_double(sol.f.f(m).imag())});
        write_csv(os, meta, {"index", "re", "im"}, rows);
    }

    CalibrationSolution read_calibration_csv(std::istream &is, const std::string &source)
    {
        const CsvDocument doc = read_csv(is, source);
        expect_kind(doc, source, "calibration");
        expect_columns(doc, source, {"index", "re", "im"});

        auto meta_number = [&](const std::string &key)
        {
            const auto it = doc.meta.find(key);
            double v = 0.0;
            if (it == doc.meta.end() || !parse_double(it->second, v))
                throw parse_error(source, it == doc.meta.end() ? doc.column_line : doc.meta_lines.at(key),
                                  "missing or malformed metadata '" + key + "'");
            return v;
        };

        CalibrationSolution sol;
        sol.eigenvalue = meta_number("residual");
        sol.next_eigenvalue = meta_number("next_eigenvalue");
        sol.eigen_gap = meta_number("eigen_gap");
        sol.degenerate = meta_number("degenerate") != 0.0;
        sol.f.f.set_size(doc.rows.size());
        const Field f{doc, source};
        for (std::size_t r = 0; r < doc.rows.size(); ++r)
        {
            const arma::uword m = f.index(r, 0, doc.rows.size());
            sol.f.f(m) = {f.number(r, 1), f.number(r, 2)};
        }
        return sol;
    }

    void write_measurements_csv(std::ostream &os, const MeasurementSet &m)
    {
        std::vector<std::vector<std::string>> rows;
        auto emit = [&](const char *name, const arma::cx_mat &x)
        {
            for (arma::uword i = 0; i < x.n_rows; ++i)
                for (arma::uword j = 0; j < x.n_cols; ++j)
                    rows.push_back({name, std::to_string(i), std::to_string(j), format_double(x(i, j).real()),
                                    format_double(x(i, j).imag())});
        };
        emit("Y", m.y);
        emit("P", m.p_stacked);
        emit("W", m.w_stacked);
        write_csv(os,
                  {{"kind", "measurements"},
                   {"n_s", std::to_string(m.n_s)},
                   {"K", std::to_string(m.K())},
                   {"L", std::to_string(m.L())},
                   {"n_ant_t", std::to_string(m.p_stacked.n_rows)},
                   {"n_ant_r", std::to_string(m.w_stacked.n_cols)}},
                  {"matrix", "row", "col", "re", "im"}, rows);
    }

    MeasurementSet read_measurements_csv(std::istream &is, const std::string &source)
    {
        const CsvDocument doc = read_csv(is, source);
        expect_kind(doc, source, "measurements");
        expect_columns(doc, source, {"matrix", "row", "col", "re", "im"});

        MeasurementSet m;
        m.n_s = meta_size(doc, source, "n_s");
        const arma::uword K = meta_size(doc, source, "K");
        const arma::uword L = meta_size(doc, source, "L");
        const arma::uword n_t = meta_size(doc, source, "n_ant_t");
        const arma::uword n_r = meta_size(doc, source, "n_ant_r");
        m.y.zeros(m.n_s * L, K);
        m.p_stacked.zeros(n_t, K);
        m.w_stacked.zeros(m.n_s * L, n_r);

        const Field f{doc, source};
        std::size_t count = 0;
        for (std::size_t r = 0; r < doc.rows.size(); ++r)
        {
            const std::string &name = doc.rows[r][0];
            arma::cx_mat *target = name == "Y" ? &m.y : name == "P" ? &m.p_stacked : name == "W" ? &m.w_stacked : nullptr;
            if (!target)
                throw parse_error(source, doc.row_lines[r], "unknown matrix '" + name + "' (expected Y, P or W)");
            const arma::uword i = f.index(r, 1, target->n_rows);
            const arma::uword j = f.index(r, 2, target->n_cols);
            (*target)(i, j) = {f.number(r, 3), f.number(r, 4)};
            ++count;
        }
        if (count != m.y.n_elem + m.p_stacked.n_elem + m.w_stacked.n_elem)
            throw parse_error(source, doc.row_lines.empty() ? doc.column_line : doc.row_lines.back(), "entry count does not match the declared dimensions");
        return m;
    }
}
