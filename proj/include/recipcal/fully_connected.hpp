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

#ifndef recipcal_fully_connected_H
#define recipcal_fully_connected_H

#include <armadillo>

#include "recipcal/array_model.hpp"
#include "recipcal/channel_model.hpp"
#include "recipcal/effective_channel.hpp"
#include "recipcal/reciprocity_calibration.hpp"

namespace recipcal
{
    // Fully connected transceivers are modelled at branch level: branch (k, m) connects RF chain k to
    // antenna m and has index k * n_ant + m.

    enum class Side
    {
        Transmit, // n_ant x (n_rf n_ant): branches summed onto antennas
        Receive   // (n_rf n_ant) x n_ant: antennas split onto branches
    };

    struct SummationMatrix
    {
        arma::mat u; // 0/1 entries
        Side side = Side::Transmit;
    };

    // Transmit: [I I ... I] with n_rf identity blocks; receive: the stacked transpose
    SummationMatrix summation_matrix(arma::uword n_ant, arma::uword n_rf, Side side);

    // U_rx C U_tx
    arma::cx_mat composite_channel(const ChannelMatrix &c, const SummationMatrix &u_tx, const SummationMatrix &u_rx);

    struct BranchResponses
    {
        arma::cx_vec tx; // diag of (I kron T2)(T1 kron I), length n_rf n_ant
        arma::cx_vec rx; // diag of (R1 kron I)(I kron R2)
    };

    // Branch (k, m) gets t1_k t2_m (and r1_k r2_m). Throws unsupported_architecture for a subarray config.
    BranchResponses merged_responses_fully_connected(const HardwareProfile &profile, const HybridArrayConfig &config);

    // Impairments of the summation network, U_tx = E_tx U0_tx and U_rx = U0_rx E_rx with diagonal E,
    // folded into the branch amplifier responses: t2 <- t2 .* e_tx, r2 <- r2 .* e_rx
    HardwareProfile absorb_summation_impairment(const HardwareProfile &profile,
                                                const arma::cx_vec &e_tx,
                                                const arma::cx_vec &e_rx);

    // Branch-level view of either architecture. For a subarray the branches are the antennas and
    // the summation matrices are identities.
    struct BranchModel
    {
        arma::mat u_tx;     // n_ant x n_branches
        arma::mat u_rx;     // n_branches x n_ant
        arma::cx_vec tx;    // per-branch transmit response
        arma::cx_vec rx;    // per-branch receive response
        ChainLayout layout; // branch -> RF chain
    };

    BranchModel branch_model(const HardwareProfile &profile, const HybridArrayConfig &config);

    // Effective channels between a base station and a reference UE at branch level
    struct ReferenceLinkChannels
    {
        arma::cx_mat h_dl;     // R_UE C~ T_BS, UE branches x BS branches
        arma::cx_mat h_ul;     // R_BS C~^T T_UE
        arma::cx_mat noise_dl; // R_UE U_rx,UE C: BS antenna-domain transmit noise seen by the UE branches
        arma::cx_mat noise_ul; // R_BS U_rx,BS C^T
    };

    // c_dl is the downlink propagation channel, UE antennas x BS antennas
    ReferenceLinkChannels reference_link_channels(const HardwareProfile &bs_profile,
                                                  const HybridArrayConfig &bs_config,
                                                  const HardwareProfile &ue_profile,
                                                  const HybridArrayConfig &ue_config,
                                                  const ChannelMatrix &c_dl);

    // a_to_b: downlink (BS transmits), b_to_a: uplink
    DirectionalWeights reference_weights(const HybridArrayConfig &bs_config,
                                         const HybridArrayConfig &ue_config,
                                         arma::uword K,
                                         arma::uword L,
                                         double pilot_power_w,
                                         Rng &rng);

    struct ReferenceCalibration
    {
        CalibrationSolution joint;   // BS branches first, then UE branches
        CalibrationMatrix bs;        // BS portion of joint.f
        CalibrationMatrix ue;        // UE portion of joint.f
        BidirectionalEstimate estimate;
    };

    // Bi-directional BS <-> reference-UE measurements over the composite channel, then the same
    // Q-matrix eigen-solution as internal calibration with BS branches as group A and UE branches
    // as group B. UE feedback of its downlink estimate is ideal.
    ReferenceCalibration calibrate_with_reference(const HardwareProfile &bs_profile,
                                                  const HybridArrayConfig &bs_config,
                                                  const HardwareProfile &ue_profile,
                                                  const HybridArrayConfig &ue_config,
                                                  const ChannelMatrix &c_dl,
                                                  const DirectionalWeights &weights,
                                                  const NoiseBudget &noise,
                                                  Rng &rng,
                                                  const LsOptions &options = {});

    // True joint calibration vector [f_BS; f_UE] at branch level
    CalibrationMatrix reference_true_calibration(const HardwareProfile &bs_profile,
                                                 const HybridArrayConfig &bs_config,
                                                 const HardwareProfile &ue_profile,
                                                 const HybridArrayConfig &ue_config);
}

#endif
