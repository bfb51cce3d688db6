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

#include "recipcal/array_model.hpp"

#include "recipcal/errors.hpp"
#include "recipcal/fully_connected.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace recipcal
{
    std::string to_string(Architecture a)
    {
        return a == Architecture::Subarray ? "subarray" : "fully-connected";
    }

    Architecture parse_architecture(const std::string &s)
    {
        if (s == "subarray")
            return Architecture::Subarray;
        if (s == "fully-connected" || s == "fully_connected")
            return Architecture::FullyConnected;
        throw invalid_parameter("array.architecture: expected 'subarray' or 'fully-connected', got '" + s + "'");
    }

    std::string to_string(const PartitionScheme &s)
    {
        return s.kind == PartitionScheme::Kind::TwoSides ? "two-sides" : "interleaved";
    }

    void HybridArrayConfig::validate() const
    {
        if (n_ant == 0)
            throw invalid_parameter("array.n_ant must be positive");
        if (n_rf == 0)
            throw invalid_parameter("array.n_rf must be positive");
        if (n_rf > n_ant)
            throw invalid_parameter("array.n_rf must not exceed array.n_ant");
        if (architecture == Architecture::Subarray && n_ant % n_rf != 0)
            throw invalid_parameter("array.n_rf must divide array.n_ant for the subarray architecture");
        if (!(element_spacing > 0.0))
            throw invalid_parameter("array.element_spacing must be positive");
    }

    arma::uword HybridArrayConfig::antennas_per_chain() const
    {
        return n_ant / n_rf;
    }

    arma::uword HybridArrayConfig::n_branches() const
    {
        return architecture == Architecture::Subarray ? n_ant : n_rf * n_ant;
    }

    ChainLayout ChainLayout::contiguous(arma::uword n_elements, arma::uword n_chains)
    {
        if (n_chains == 0 || n_elements % n_chains != 0)
            throw invalid_parameter("chain layout: chain count must divide the element count");
        ChainLayout layout;
        layout.n_chains = n_chains;
        layout.chain_of.resize(n_elements);
        const arma::uword per_chain = n_elements / n_chains;
        for (arma::uword m = 0; m < n_elements; ++m)
            layout.chain_of[m] = m / per_chain;
        return layout;
    }

    double amplitude_half_width(double amp_imbalance_std)
    {
        if (!(amp_imbalance_std >= 0.0))
            throw invalid_parameter("hardware.amp_imbalance_std must be non-negative");
        if (amp_imbalance_std == 0.0)
            return 0.0;

        // Var(a^2) for a ~ U[1-e, 1+e] is (4/3) e^2 + (4/45) e^4; solve the quadratic in x = e^2.
        // The root is written in the cancellation-free form 2c / (b + sqrt(b^2 + 4ac)).
        const double a = 4.0 / 45.0;
        const double b = 4.0 / 3.0;
        const double c = amp_imbalance_std * amp_imbalance_std;
        const double x = 2.0 * c / (b + std::sqrt(b * b + 4.0 * a * c));
        const double eps = std::sqrt(x);

        // Amplitudes must stay strictly positive
        if (!(eps < 1.0))
            throw invalid_parameter("hardware.amp_imbalance_std too large for the uniform amplitude model (needs eps < 1)");
        return eps;
    }

    HardwareProfile sample_hardware_profile(const HybridArrayConfig &config,
                                            double amp_imbalance_std,
                                            Rng &rng,
                                            double branch_phase_jitter)
    {
        config.validate();
        const double eps = amplitude_half_width(amp_imbalance_std);
        if (!(branch_phase_jitter >= 0.0))
            throw invalid_parameter("hardware.branch_phase_jitter must be non-negative");

        HardwareProfile p;
        p.t1.set_size(config.n_rf);
        p.r1.set_size(config.n_rf);
        p.t2.set_size(config.n_ant);
        p.r2.set_size(config.n_ant);

        for (arma::uword k = 0; k < config.n_rf; ++k)
            p.t1(k) = std::polar(1.0, rng.phase());
        for (arma::uword k = 0; k < config.n_rf; ++k)
            p.r1(k) = std::polar(1.0, rng.phase());

        auto branch = [&]() -> std::complex<double>
        {
            const double amp = eps > 0.0 ? rng.uniform(1.0 - eps, 1.0 + eps) : 1.0;
            const double ph = branch_phase_jitter > 0.0 ? rng.uniform(-branch_phase_jitter, branch_phase_jitter) : 0.0;
            return std::polar(amp, ph);
        };
        for (arma::uword m = 0; m < config.n_ant; ++m)
            p.t2(m) = branch();
        for (arma::uword m = 0; m < config.n_ant; ++m)
            p.r2(m) = branch();
        return p;
    }

    namespace
    {
        void check_subarray_profile(const HardwareProfile &profile, const HybridArrayConfig &config, const char *what)
        {
            config.validate();
            if (config.architecture != Architecture::Subarray)
                throw unsupported_architecture(std::string(what) + ": fully connected transceivers use merged_responses_fully_connected");
            if (profile.t1.n_elem != config.n_rf || profile.r1.n_elem != config.n_rf ||
                profile.t2.n_elem != config.n_ant || profile.r2.n_elem != config.n_ant)
                throw contract_violation(std::string(what) + ": hardware profile does not match the array configuration");
        }

        // Branch response times the response of the RF chain the branch hangs off
        arma::cx_vec kron_merge(const arma::cx_vec &chain, const arma::cx_vec &branch, arma::uword per_chain)
        {
            arma::cx_vec out(branch.n_elem);
            for (arma::uword m = 0; m < branch.n_elem; ++m)
                out(m) = branch(m) * chain(m / per_chain);
            return out;
        }
    }

    arma::cx_vec merged_tx_response(const HardwareProfile &profile, const HybridArrayConfig &config)
    {
        check_subarray_profile(profile, config, "merged_tx_response");
        return kron_merge(profile.t1, profile.t2, config.antennas_per_chain());
    }

    arma::cx_vec merged_rx_response(const HardwareProfile &profile, const HybridArrayConfig &config)
    {
        check_subarray_profile(profile, config, "merged_rx_response");
        return kron_merge(profile.r1, profile.r2, config.antennas_per_chain());
    }

    CalibrationMatrix calibration_from_responses(const arma::cx_vec &tx, const arma::cx_vec &rx)
    {
        if (tx.n_elem != rx.n_elem)
            throw contract_violation("calibration_from_responses: length mismatch");
        for (arma::uword m = 0; m < rx.n_elem; ++m)
            if (rx(m) == 0.0)
                throw singular_hardware("receive response " + std::to_string(m) + " is zero");
        return {tx / rx};
    }

    CalibrationMatrix true_calibration(const HardwareProfile &profile, const HybridArrayConfig &config)
    {
        if (config.architecture == Architecture::FullyConnected)
        {
            const auto merged = merged_responses_fully_connected(profile, config);
            return calibration_from_responses(merged.tx, merged.rx);
        }
        return calibration_from_responses(merged_tx_response(profile, config), merged_rx_response(profile, config));
    }

    Partition make_partition(const HybridArrayConfig &config, const PartitionScheme &scheme)
    {
        config.validate();
        const arma::uword n = config.n_ant;
        if (n % 2 != 0)
            throw unsupported_partition("antenna partition needs an even antenna count, got " + std::to_string(n));
        const arma::uword half = n / 2;

        Partition p;
        p.group_a.reserve(half);
        p.group_b.reserve(half);

        if (scheme.kind == PartitionScheme::Kind::TwoSides)
        {
            for (arma::uword m = 0; m < n; ++m)
                (m < half ? p.group_a : p.group_b).push_back(m);
            return p;
        }

        if (scheme.block == 0 || half % scheme.block != 0)
            throw unsupported_partition("interleaved partition block " + std::to_string(scheme.block) +
                                        " must divide n_ant/2 = " + std::to_string(half));
        for (arma::uword m = 0; m < n; ++m)
            ((m / scheme.block) % 2 == 0 ? p.group_a : p.group_b).push_back(m);
        return p;
    }

    ChainLayout group_layout(const HybridArrayConfig &config, const std::vector<arma::uword> &antennas)
    {
        config.validate();
        if (config.architecture != Architecture::Subarray)
            throw unsupported_architecture("antenna groups with own RF chains require the subarray architecture");

        const arma::uword per_chain = config.antennas_per_chain();
        std::map<arma::uword, arma::uword> local_chain; // global chain -> local chain
        std::map<arma::uword, arma::uword> members;     // global chain -> antennas seen in the group

        ChainLayout layout;
        layout.chain_of.reserve(antennas.size());
        for (auto m : antennas)
        {
            if (m >= config.n_ant)
                throw contract_violation("group_layout: antenna index out of range");
            const arma::uword chain = m / per_chain;
            auto it = local_chain.find(chain);
            if (it == local_chain.end())
                it = local_chain.emplace(chain, layout.n_chains++).first;
            ++members[chain];
            layout.chain_of.push_back(it->second);
        }
        for (const auto &[chain, count] : members)
            if (count != per_chain)
                throw unsupported_partition("RF chain " + std::to_string(chain) +
                                            " has antennas in both groups; partition must follow RF-chain boundaries");
        return layout;
    }
}
