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

#ifndef recipcal_effective_channel_H
#define recipcal_effective_channel_H

#include <armadillo>
#include <vector>

#include "recipcal/array_model.hpp"
#include "recipcal/random.hpp"

namespace recipcal
{
    // Randomly drawn analog precoders / combiners and pilot symbols for one measurement direction.
    // Pilots are injected after the digital precoder and the digital combiner is the identity, so
    // each precoder drives one pilot per transmit RF chain and each combiner yields one sample per
    // receive RF chain.
    struct BeamWeightSet
    {
        ChainLayout tx_layout;                // Transmit antenna (or branch) -> RF chain
        ChainLayout rx_layout;                // Receive antenna (or branch) -> RF chain
        std::vector<arma::cx_mat> precoders;  // K matrices, n_ant^t x n_rf^t, block-diagonal, unit modulus
        std::vector<arma::cx_vec> pilots;     // K vectors, length n_rf^t, QPSK
        std::vector<arma::cx_mat> combiners;  // L matrices, n_s x n_ant^r, block-diagonal, unit modulus

        arma::uword n_precoders() const { return precoders.size(); }
        arma::uword n_combiners() const { return combiners.size(); }
        arma::uword n_streams() const { return rx_layout.n_chains; }

        // First K precoders/pilots and first L combiners
        BeamWeightSet prefix(arma::uword K, arma::uword L) const;

        // Stacked pilot matrix, column k = V_k p_k
        arma::cx_mat stacked_pilots() const;

        // Stacked combiner matrix [W_1; ...; W_L]
        arma::cx_mat stacked_combiners() const;
    };

    // Weight set with i.i.d. U[-pi, pi) analog phases and QPSK pilots of power pilot_power_w per antenna.
    // Precoder k and combiner l are drawn from sub-streams keyed by their index, so the set for
    // (K, L) is a prefix of the set for any larger (K', L') drawn from the same random source state.
    BeamWeightSet random_beam_weights(const ChainLayout &tx_layout,
                                      const ChainLayout &rx_layout,
                                      arma::uword K,
                                      arma::uword L,
                                      double pilot_power_w,
                                      Rng &rng);

    // Same transceiver layout on both sides (contiguous RF-chain blocks over config.n_branches()), unit pilot power
    BeamWeightSet random_beam_weights(const HybridArrayConfig &config, arma::uword K, arma::uword L, Rng &rng);

    // Transmit EVM and receiver thermal noise
    struct NoiseBudget
    {
        double tx_evm_db = -20.0;               // Transmit error vector magnitude in [dB]
        double tx_power_dbm_per_antenna = 0.0;  // Transmit power per antenna in [dBm]
        double rx_noise_floor_dbm = -97.0;      // Noise power per digital-domain receive sample in [dBm]
        bool enable_tx = true;
        bool enable_rx = true;

        void validate() const;

        double tx_power_w() const;

        // Transmit SNR in dB; an EVM of -20 dB corresponds to a 40 dB transmit SNR
        double tx_snr_db() const;

        double tx_noise_power_w() const;
        double rx_noise_power_w() const;

        static NoiseBudget noiseless();
    };

    // Stacked pilot-based measurements Y = W H P + N
    struct MeasurementSet
    {
        arma::cx_mat y;          // n_s L x K, block (l, k) = y_{l,k}
        arma::cx_mat p_stacked;  // n_ant^t x K
        arma::cx_mat w_stacked;  // n_s L x n_ant^r
        arma::uword n_s = 0;     // Samples per measurement (receive RF chains)

        arma::uword K() const { return p_stacked.n_cols; }
        arma::uword L() const { return n_s == 0 ? 0 : w_stacked.n_rows / n_s; }

        arma::cx_vec block(arma::uword l, arma::uword k) const;

        // Measurements of the first K precoders and first L combiners
        MeasurementSet subset(arma::uword K, arma::uword L) const;
    };

    // y_{l,k} = W_l (H V_k p_k + G n_tx) + n_rx.
    // h is the effective channel (n_ant^r x n_ant^t). Transmit noise is white per transmit antenna with
    // power noise.tx_noise_power_w() and reaches the receiver through tx_noise_channel G, which maps
    // the antenna domain after the transmit hardware to the receive branches (pass R C). When G is
    // empty the noise is added to the precoded signal and goes through h. Receive noise is white per
    // output sample. Noise for measurement (l, k) comes from a sub-stream keyed by (l, k).
    MeasurementSet simulate_measurements(const arma::cx_mat &h,
                                         const BeamWeightSet &weights,
                                         const NoiseBudget &noise,
                                         Rng &rng,
                                         const arma::cx_mat &tx_noise_channel = arma::cx_mat());

    struct LsOptions
    {
        bool allow_rank_deficient = false; // return the minimum-norm solution instead of throwing
    };

    // Numerical rank from the singular values (tolerance max(m, n) * eps * s_max)
    arma::uword numerical_rank(const arma::cx_mat &a);

    // Least-squares effective-channel estimate vec(H) = D^+ vec(Y), D = P^T kron W, computed as
    // H = W^+ Y P^+ from SVDs of the two factors. Throws underdetermined_system when
    // rank(P) < n_ant^t or rank(W) < n_ant^r unless options.allow_rank_deficient is set.
    arma::cx_mat ls_estimate_channel(const MeasurementSet &meas, const LsOptions &options = {});
}

#endif
