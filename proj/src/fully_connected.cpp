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

#include "recipcal/fully_connected.hpp"

#include "recipcal/errors.hpp"

namespace recipcal
{
    SummationMatrix summation_matrix(arma::uword n_ant, arma::uword n_rf, Side side)
    {
        if (n_ant == 0 || n_rf == 0)
            throw invalid_parameter("summation_matrix: n_ant and n_rf must be positive");
        arma::mat u = arma::repmat(arma::eye<arma::mat>(n_ant, n_ant), 1, n_rf);
        if (side == Side::Receive)
            arma::inplace_trans(u);
        return {std::move(u), side};
    }

    arma::cx_mat composite_channel(const ChannelMatrix &c, const SummationMatrix &u_tx, const SummationMatrix &u_rx)
    {
        const arma::cx_mat &C = c.entries;
        if (u_tx.u.n_rows != C.n_cols || u_rx.u.n_cols != C.n_rows)
            throw contract_violation("composite_channel: summation matrices do not match the channel dimensions");
        return arma::cx_mat(u_rx.u, arma::zeros(arma::size(u_rx.u))) * C *
               arma::cx_mat(u_tx.u, arma::zeros(arma::size(u_tx.u)));
    }

    BranchResponses merged_responses_fully_connected(const HardwareProfile &profile, const HybridArrayConfig &config)
    {
        config.validate();
        if (config.architecture != Architecture::FullyConnected)
            throw unsupported_architecture("merged_responses_fully_connected: subarray transceivers use merged_tx_response");
        if (profile.t1.n_elem != config.n_rf || profile.r1.n_elem != config.n_rf ||
            profile.t2.n_elem != config.n_ant || profile.r2.n_elem != config.n_ant)
            throw contract_violation("merged_responses_fully_connected: hardware profile does not match the configuration");

        const arma::uword n = config.n_ant;
        BranchResponses out;
        out.tx.set_size(config.n_rf * n);
        out.rx.set_size(config.n_rf * n);
        for (arma::uword k = 0; k < config.n_rf; ++k)
            for (arma::uword m = 0; m < n; ++m)
            {
                out.tx(k * n + m) = profile.t1(k) * profile.t2(m);
                out.rx(k * n + m) = profile.r1(k) * profile.r2(m);
            }
        return out;
    }

    HardwareProfile absorb_summation_impairment(const HardwareProfile &profile,
                                                const arma::cx_vec &e_tx,
                                                const arma::cx_vec &e_rx)
    {
        if (e_tx.n_elem != profile.t2.n_elem || e_rx.n_elem != profile.r2.n_elem)
            throw contract_violation("absorb_summation_impairment: impairment length must equal n_ant");
        HardwareProfile out = profile;
        out.t2 %= e_tx;
        out.r2 %= e_rx;
        return out;
    }

    BranchModel branch_model(const HardwareProfile &profile, const HybridArrayConfig &config)
    {
        config.validate();
        BranchModel b;
        if (config.architecture == Architecture::FullyConnected)
        {
            const auto merged = merged_responses_fully_connected(profile, config);
            b.tx = merged.tx;
            b.rx = merged.rx;
            b.u_tx = summation_matrix(config.n_ant, config.n_rf, Side::Transmit).u;
            b.u_rx = summation_matrix(config.n_ant, config.n_rf, Side::Receive).u;
            b.layout = ChainLayout::contiguous(config.n_rf * config.n_ant, config.n_rf);
        }
        else
        {
            b.tx = merged_tx_response(profile, config);
            b.rx = merged_rx_response(profile, config);
            b.u_tx = arma::eye<arma::mat>(config.n_ant, config.n_ant);
            b.u_rx = b.u_tx;
            b.layout = ChainLayout::contiguous(config.n_ant, config.n_rf);
        }
        return b;
    }

    ReferenceLinkChannels reference_link_channels(const HardwareProfile &bs_profile,
                                                  const HybridArrayConfig &bs_config,
                                                  const HardwareProfile &ue_profile,
                                                  const HybridArrayConfig &ue_config,
                                                  const ChannelMatrix &c_dl)
    {
        if (c_dl.entries.n_rows != ue_config.n_ant || c_dl.entries.n_cols != bs_config.n_ant)
            throw contract_violation("reference link channel must be n_ant(UE) x n_ant(BS)");
        const BranchModel bs = branch_model(bs_profile, bs_config);
        const BranchModel ue = branch_model(ue_profile, ue_config);

        const auto as_cx = [](const arma::mat &m) { return arma::cx_mat(m, arma::zeros(arma::size(m))); };
        const arma::cx_mat &C = c_dl.entries;

        ReferenceLinkChannels out;
        out.noise_dl = arma::diagmat(ue.rx) * as_cx(ue.u_rx) * C;
        out.noise_ul = arma::diagmat(bs.rx) * as_cx(bs.u_rx) * C.st();
        out.h_dl = out.noise_dl * as_cx(bs.u_tx) * arma::diagmat(bs.tx);
        out.h_ul = out.noise_ul * as_cx(ue.u_tx) * arma::diagmat(ue.tx);
        return out;
    }

    DirectionalWeights reference_weights(const HybridArrayConfig &bs_config,
                                         const HybridArrayConfig &ue_config,
                                         arma::uword K,
                                         arma::uword L,
                                         double pilot_power_w,
                                         Rng &rng)
    {
        bs_config.validate();
        ue_config.validate();
        const auto bs = ChainLayout::contiguous(bs_config.n_branches(), bs_config.n_rf);
        const auto ue = ChainLayout::contiguous(ue_config.n_branches(), ue_config.n_rf);
        DirectionalWeights w;
        w.a_to_b = random_beam_weights(bs, ue, K, L, pilot_power_w, rng);
        w.b_to_a = random_beam_weights(ue, bs, K, L, pilot_power_w, rng);
        return w;
    }

    ReferenceCalibration calibrate_with_reference(const HardwareProfile &bs_profile,
                                                  const HybridArrayConfig &bs_config,
                                                  const HardwareProfile &ue_profile,
                                                  const HybridArrayConfig &ue_config,
                                                  const ChannelMatrix &c_dl,
                                                  const DirectionalWeights &weights,
                                                  const NoiseBudget &noise,
                                                  Rng &rng,
                                                  const LsOptions &options)
    {
        const auto ch = reference_link_channels(bs_profile, bs_config, ue_profile, ue_config, c_dl);
        const arma::uword n_bs = ch.h_dl.n_cols;
        const arma::uword n_ue = ch.h_dl.n_rows;

        const MeasurementSet dl = simulate_measurements(ch.h_dl, weights.a_to_b, noise, rng, ch.noise_dl);
        const MeasurementSet ul = simulate_measurements(ch.h_ul, weights.b_to_a, noise, rng, ch.noise_ul);

        ReferenceCalibration out;
        for (arma::uword i = 0; i < n_bs; ++i)
            out.estimate.partition.group_a.push_back(i);
        for (arma::uword j = 0; j < n_ue; ++j)
            out.estimate.partition.group_b.push_back(n_bs + j);
        out.estimate.h_ab = ls_estimate_channel(dl, options);
        out.estimate.h_ba = ls_estimate_channel(ul, options);

        out.joint = solve_calibration(build_q(out.estimate));
        out.bs.f = out.joint.f.f.head(n_bs);
        out.ue.f = out.joint.f.f.tail(n_ue);
        return out;
    }

    CalibrationMatrix reference_true_calibration(const HardwareProfile &bs_profile,
                                                 const HybridArrayConfig &bs_config,
                                                 const HardwareProfile &ue_profile,
                                                 const HybridArrayConfig &ue_config)
    {
        const BranchModel bs = branch_model(bs_profile, bs_config);
        const BranchModel ue = branch_model(ue_profile, ue_config);
        return calibration_from_responses(arma::join_cols(bs.tx, ue.tx), arma::join_cols(bs.rx, ue.rx));
    }
}
