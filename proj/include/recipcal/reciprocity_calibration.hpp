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

#ifndef recipcal_reciprocity_calibration_H
#define recipcal_reciprocity_calibration_H

#include <armadillo>

#include "recipcal/array_model.hpp"
#include "recipcal/channel_model.hpp"
#include "recipcal/effective_channel.hpp"
#include "recipcal/random.hpp"

namespace recipcal
{
    // Bi-directional effective channels between the two antenna groups.
    // h_ab(b, a) is the channel from the a-th antenna of group A to the b-th antenna of group B,
    // h_ba(a, b) the channel from the b-th antenna of group B to the a-th antenna of group A
    // (local indices follow partition.group_a / group_b order).
    struct BidirectionalEstimate
    {
        arma::cx_mat h_ab; // |B| x |A|
        arma::cx_mat h_ba; // |A| x |B|
        Partition partition;

        // Dimensions match the partition; groups are disjoint and cover 0 .. |A|+|B|-1 (sizes may differ)
        void validate() const;
    };

    // True effective channels and transmit-noise routing for both directions of an intra-array measurement
    struct BidirectionalChannels
    {
        arma::cx_mat h_ab;        // R_B C_BA T_A
        arma::cx_mat h_ba;        // R_A C_AB T_B
        arma::cx_mat noise_ab;    // R_B C_BA: antenna-domain transmit noise of A as seen by B
        arma::cx_mat noise_ba;    // R_A C_AB
    };

    // Weight sets for the two measurement directions
    struct DirectionalWeights
    {
        BeamWeightSet a_to_b;
        BeamWeightSet b_to_a;
    };

    struct BidirectionalMeasurements
    {
        MeasurementSet a_to_b;
        MeasurementSet b_to_a;
        Partition partition;

        BidirectionalMeasurements subset(arma::uword K, arma::uword L) const;
    };

    // Effective channels of both directions over one channel realization. Subarray only; the partition
    // must follow RF-chain boundaries.
    BidirectionalChannels bidirectional_channels(const HardwareProfile &profile,
                                                 const HybridArrayConfig &config,
                                                 const Partition &partition,
                                                 const ChannelMatrix &channel);

    // Random weights for both directions. Each group transmits and receives with its own RF chains.
    DirectionalWeights calibration_weights(const HybridArrayConfig &config,
                                           const Partition &partition,
                                           arma::uword K,
                                           arma::uword L,
                                           double pilot_power_w,
                                           Rng &rng);

    // Simulated measurements A -> B then B -> A with the same channel realization
    BidirectionalMeasurements measure_bidirectional(const HardwareProfile &profile,
                                                    const HybridArrayConfig &config,
                                                    const Partition &partition,
                                                    const ChannelMatrix &channel,
                                                    const DirectionalWeights &weights,
                                                    const NoiseBudget &noise,
                                                    Rng &rng);

    // LS estimates of both directions
    BidirectionalEstimate estimate_bidirectional(const BidirectionalMeasurements &meas, const LsOptions &options = {});

    // measure_bidirectional followed by estimate_bidirectional
    BidirectionalEstimate bidirectional_measure(const HardwareProfile &profile,
                                                const HybridArrayConfig &config,
                                                const Partition &partition,
                                                const ChannelMatrix &channel,
                                                const DirectionalWeights &weights,
                                                const NoiseBudget &noise,
                                                Rng &rng,
                                                const LsOptions &options = {});

    // Hermitian PSD matrix with f^H Q f = sum_{i in A, j in B} |f_j h_{i->j} - f_i h_{j->i}|^2
    struct QMatrix
    {
        arma::cx_mat q;
    };

    QMatrix build_q(const BidirectionalEstimate &est);

    // Quadratic form f^H Q f
    double calibration_cost(const QMatrix &q, const arma::cx_vec &f);

    struct CalibrationSolution
    {
        CalibrationMatrix f;           // Unit norm, first nonzero entry real positive
        double eigenvalue = 0.0;       // Smallest eigenvalue, the residual J at the optimum
        double next_eigenvalue = 0.0;  // Second smallest eigenvalue
        double eigen_gap = 0.0;        // (next_eigenvalue - eigenvalue) / largest eigenvalue magnitude
        bool degenerate = false;       // eigen_gap <= degeneracy_threshold: solution not unique up to a scalar
    };

    constexpr double degeneracy_threshold = 1e-6;

    // Eigenvector of the smallest eigenvalue. Throws contract_violation if q is not Hermitian.
    CalibrationSolution solve_calibration(const QMatrix &q);

    // alpha * f_est with alpha = (f_est^H f_ref) / (f_est^H f_est)
    CalibrationMatrix align_scalar(const CalibrationMatrix &f_est, const CalibrationMatrix &f_ref);

    // ||f_est - f_ref||^2 / ||f_ref||^2 (no alignment)
    double nmse_f(const CalibrationMatrix &f_est, const CalibrationMatrix &f_ref);

    // Alternative normalization: scale so that the first coefficient equals one
    CalibrationMatrix pin_first(const CalibrationMatrix &f);

    // Rotate so the first nonzero entry is real positive
    void apply_phase_convention(arma::cx_vec &f);
}

#endif
