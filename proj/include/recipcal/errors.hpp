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

#ifndef recipcal_errors_H
#define recipcal_errors_H

#include <stdexcept>
#include <string>

namespace recipcal
{
    // Parameter outside the domain of an operation (bad config, bad sizes requested by the caller)
    class invalid_parameter : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Operation not defined for the given analog architecture
    class unsupported_architecture : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Antenna partition not usable (odd antenna count, RF chain split across groups, ...)
    class unsupported_partition : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Caller broke a documented precondition (dimension mismatch, non-Hermitian input)
    class contract_violation : public std::logic_error
    {
    public:
        using std::logic_error::logic_error;
    };

    // Zero hardware response or zero calibration coefficient where an inverse is needed
    class singular_hardware : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Least-squares channel estimation without enough independent measurements
    class underdetermined_system : public std::runtime_error
    {
    public:
        enum class failed_condition
        {
            precoders,  // rank(P) < n_ant^t, i.e. K too small
            combiners,  // rank(W) < n_ant^r, i.e. L too small
            both
        };

        underdetermined_system(failed_condition which, const std::string &what)
            : std::runtime_error(what), which_(which) {}

        failed_condition which() const noexcept { return which_; }

    private:
        failed_condition which_;
    };

    // Malformed input files
    class parse_error : public std::runtime_error
    {
    public:
        parse_error(const std::string &source, std::size_t line, const std::string &msg)
            : std::runtime_error(source + ":" + std::to_string(line) + ": " + msg), line_(line) {}

        std::size_t line() const noexcept { return line_; }

    private:
        std::size_t line_;
    };
}

#endif
