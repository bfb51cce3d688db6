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

#ifndef recipcal_csv_io_H
#define recipcal_csv_io_H

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "recipcal/channel_model.hpp"
#include "recipcal/effective_channel.hpp"
#include "recipcal/reciprocity_calibration.hpp"

namespace recipcal
{
    // All CSV files start with this line, followed by "# key=value ..." metadata lines, one
    // column-name line and the data rows.
    inline constexpr const char *csv_magic = "# recipcal-csv v1";

    // Shortest decimal representation that round-trips to the same double
    std::string format_double(double v);

    // Strict full-string parse; returns false on trailing garbage or empty input
    bool parse_double(const std::string &s, double &out);

    struct CsvDocument
    {
        std::map<std::string, std::string> meta; // from "# key=value" lines
        std::map<std::string, std::size_t> meta_lines;
        std::size_t column_line = 0;
        std::vector<std::string> columns;
        std::vector<std::vector<std::string>> rows;
        std::vector<std::size_t> row_lines; // 1-based source line of each row
    };

    // Writes magic, metadata (in the given order), column line and rows
    void write_csv(std::ostream &os,
                   const std::vector<std::pair<std::string, std::string>> &meta,
                   const std::vector<std::string> &columns,
                   const std::vector<std::vector<std::string>> &rows);

    // Parses the common layout; throws parse_error with the offending line
    CsvDocument read_csv(std::istream &is, const std::string &source);

    // Long format: row,col,re,im with metadata kind=channel rows= cols= reciprocal=
    void write_channel_csv(std::ostream &os, const ChannelMatrix &c);
    ChannelMatrix read_channel_csv(std::istream &is, const std::string &source);

    // index,re,im with residual / eigen-gap / degeneracy metadata; extra metadata appended after those
    void write_calibration_csv(std::ostream &os,
                               const CalibrationSolution &sol,
                               const std::vector<std::pair<std::string, std::string>> &extra = {});
    CalibrationSolution read_calibration_csv(std::istream &is, const std::string &source);

    // matrix,row,col,re,im for matrix in {Y, P, W}
    void write_measurements_csv(std::ostream &os, const MeasurementSet &m);
    MeasurementSet read_measurements_csv(std::istream &is, const std::string &source);
}

#endif
