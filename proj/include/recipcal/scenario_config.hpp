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

#ifndef recipcal_scenario_config_H
#define recipcal_scenario_config_H

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "recipcal/array_model.hpp"
#include "recipcal/channel_model.hpp"
#include "recipcal/effective_channel.hpp"

namespace recipcal
{
    // Everything an experiment run depends on. Defaults reproduce the 64-antenna, 8-RF-chain setup.
    struct ScenarioConfig
    {
        HybridArrayConfig array;
        double amp_imbalance_std = 0.1;   // std of the squared branch amplitude
        double branch_phase_jitter = 0.0; // half-width of uniform branch phase error in [rad]
        IntraArrayChannelParams channel;
        NoiseBudget noise;
        PartitionScheme::Kind partition_kind = PartitionScheme::Kind::TwoSides;
        arma::uword interleave_block = 8; // antennas per run whenever the interleaved scheme is used
        bool partition_set = false;       // partition.scheme given explicitly; sweeps otherwise run both schemes

        // Single calibration run (calibrate, fig6)
        arma::uword single_k = 32;
        arma::uword single_l = 8;

        // K x L sweep (fig7, fig8)
        std::vector<arma::uword> sweep_k;
        std::vector<arma::uword> sweep_l;

        arma::uword trials = 50;
        std::uint64_t seed = 1;
        std::string output_path; // empty: standard output

        // DL CSIT (fig9, dl-nmse)
        std::vector<double> dl_nmse_f = {1e-4, 1e-3, 1e-2, 1e-1};
        std::vector<double> dl_nmse_ul = {1e-4, 1e-3, 1e-2, 1e-1};
        double dl_point_nmse_f = 1e-2;
        double dl_point_nmse_ul = 1e-2;
        arma::uword dl_trials = 10000;

        // Reference-UE calibration of a fully connected base station (fully-connected-check)
        HybridArrayConfig fc_bs{8, 2, Architecture::FullyConnected};
        HybridArrayConfig fc_ue{2, 1, Architecture::Subarray};
        arma::uword fc_k = 16;
        arma::uword fc_l = 8;

        ScenarioConfig();

        PartitionScheme scheme(PartitionScheme::Kind kind) const;
        PartitionScheme scheme() const { return scheme(partition_kind); }

        // Throws invalid_parameter naming the first violated condition by its key
        void validate() const;
    };

    // Sets one dotted key from its text value. Throws invalid_parameter for an unknown key or a
    // value that does not parse.
    void apply_setting(ScenarioConfig &cfg, const std::string &key, const std::string &value);

    // Reads "key = value" lines into cfg. '#' starts a comment, "[section]" prefixes following keys
    // with "section.". Throws parse_error with the line number.
    void load_config(ScenarioConfig &cfg, std::istream &is, const std::string &source);

    // Effective settings as (key, value) pairs in a fixed order
    std::vector<std::pair<std::string, std::string>> describe(const ScenarioConfig &cfg);

    // "24:40" (inclusive range), "24:40:2" (with step) or "24,28,32"
    std::vector<arma::uword> parse_index_list(const std::string &s);
    std::vector<double> parse_real_list(const std::string &s);
}

#endif
