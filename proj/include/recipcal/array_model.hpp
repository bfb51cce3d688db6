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

#ifndef recipcal_array_model_H
#define recipcal_array_model_H

#include <armadillo>
#include <string>
#include <vector>

#include "recipcal/random.hpp"

namespace recipcal
{
    enum class Architecture
    {
        Subarray,      // each RF chain drives a disjoint block of antennas
        FullyConnected // every RF chain drives every antenna through a summation network
    };

    enum class Arrangement
    {
        Linear // co-polarized uniform linear array
    };

    std::string to_string(Architecture a);
    Architecture parse_architecture(const std::string &s);

    // Hybrid transceiver description
    struct HybridArrayConfig
    {
        arma::uword n_ant = 64;                           // Number of antennas
        arma::uword n_rf = 8;                             // Number of RF chains
        Architecture architecture = Architecture::Subarray;
        double element_spacing = 1.0;                     // Antenna spacing in half-wavelength units
        Arrangement arrangement = Arrangement::Linear;

        // Throws invalid_parameter naming the first violated condition
        void validate() const;

        // Subarray: antennas driven by one RF chain
        arma::uword antennas_per_chain() const;

        // Number of analog branches (phase shifters): n_ant for subarray, n_rf * n_ant for fully connected
        arma::uword n_branches() const;
    };

    // Mapping from (local) antenna or branch index to the RF chain that drives it.
    // Chains are numbered 0 .. n_chains-1 in order of first appearance.
    struct ChainLayout
    {
        std::vector<arma::uword> chain_of;
        arma::uword n_chains = 0;

        arma::uword size() const { return chain_of.size(); }

        // n_elements split into n_chains contiguous blocks of equal size
        static ChainLayout contiguous(arma::uword n_elements, arma::uword n_chains);
    };

    // Per-component hardware responses of one transceiver (diagonal matrices stored as vectors)
    struct HardwareProfile
    {
        arma::cx_vec t1; // Transmit RF-chain (mixer) responses, length n_rf
        arma::cx_vec r1; // Receive RF-chain (mixer) responses, length n_rf
        arma::cx_vec t2; // Transmit branch (amplifier) responses, length n_ant
        arma::cx_vec r2; // Receive branch (amplifier) responses, length n_ant
    };

    // Diagonal of a calibration matrix F = R^{-T} T
    struct CalibrationMatrix
    {
        arma::cx_vec f;

        arma::uword size() const { return f.n_elem; }
    };

    struct Partition
    {
        std::vector<arma::uword> group_a; // 0-based antenna indices, ascending
        std::vector<arma::uword> group_b;
    };

    struct PartitionScheme
    {
        enum class Kind
        {
            TwoSides,
            Interleaved
        };

        Kind kind = Kind::TwoSides;
        arma::uword block = 8; // Interleaved only: consecutive antennas per group run

        static PartitionScheme two_sides() { return {Kind::TwoSides, 0}; }
        static PartitionScheme interleaved(arma::uword block) { return {Kind::Interleaved, block}; }
    };

    std::string to_string(const PartitionScheme &s);

    // Half-width eps of U[1-eps, 1+eps] such that the squared amplitude has the given standard deviation.
    // Throws invalid_parameter when no eps in [0, 1) exists.
    double amplitude_half_width(double amp_imbalance_std);

    // Random mixer phases (uniform on [-pi, pi)) and branch amplitude imbalance (uniform on [1-eps, 1+eps]).
    // Branch phases are zero unless branch_phase_jitter > 0, in which case they are uniform on
    // [-jitter, jitter).
    HardwareProfile sample_hardware_profile(const HybridArrayConfig &config,
                                            double amp_imbalance_std,
                                            Rng &rng,
                                            double branch_phase_jitter = 0.0);

    // Diagonal of T = T2 (T1 kron I), subarray only
    arma::cx_vec merged_tx_response(const HardwareProfile &profile, const HybridArrayConfig &config);

    // Diagonal of R = (R1 kron I) R2, subarray only
    arma::cx_vec merged_rx_response(const HardwareProfile &profile, const HybridArrayConfig &config);

    // Elementwise f = tx / rx. Throws singular_hardware on a zero receive response.
    CalibrationMatrix calibration_from_responses(const arma::cx_vec &tx, const arma::cx_vec &rx);

    // Ground-truth (unnormalized) calibration vector. Subarray: per antenna; fully connected: per branch.
    CalibrationMatrix true_calibration(const HardwareProfile &profile, const HybridArrayConfig &config);

    Partition make_partition(const HybridArrayConfig &config, const PartitionScheme &scheme);

    // RF-chain layout of a subset of antennas of a subarray transceiver.
    // Throws unsupported_partition if an RF chain has antennas both inside and outside the subset.
    ChainLayout group_layout(const HybridArrayConfig &config, const std::vector<arma::uword> &antennas);
}

#endif
