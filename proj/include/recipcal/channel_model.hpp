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

#ifndef recipcal_channel_model_H
#define recipcal_channel_model_H

#include <armadillo>

#include "recipcal/array_model.hpp"
#include "recipcal/random.hpp"

namespace recipcal
{
    // Near-field plus multipath model of the propagation between elements of one linear array
    struct IntraArrayChannelParams
    {
        double mag_at_half_lambda_db = -15.0;   // Near-field path magnitude between adjacent elements in [dB]
        double decay_db_per_half_lambda = 3.5;  // Additional loss per half-wavelength of separation in [dB]
        double multipath_variance = 0.001;      // Power of the i.i.d. multipath term

        void validate() const;
    };

    // Propagation channel, rows = receive antennas, cols = transmit antennas
    struct ChannelMatrix
    {
        arma::cx_mat entries;
        bool reciprocal = false; // entries == entries.st() exactly
    };

    // Near-field path magnitude (linear) at a separation of d half-wavelengths, d > 0
    double near_field_magnitude(const IntraArrayChannelParams &params, double d);

    // c_ij = |cbar_ij| exp(j 2 pi phi_ij) + ctilde_ij for i != j, drawn once per unordered pair and mirrored.
    // Diagonal is zero.
    ChannelMatrix intra_array_channel(const HybridArrayConfig &config, const IntraArrayChannelParams &params, Rng &rng);

    // i.i.d. CN(0, 1) entries
    arma::cx_vec rayleigh_channel(arma::uword n, Rng &rng);
}

#endif
