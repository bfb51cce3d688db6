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

#include "recipcal/effective_channel.hpp"

#include "recipcal/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace recipcal
{
    namespace
    {
        // Sub-stream tags
        constexpr std::uint64_t tag_precoder = 1;
        constexpr std::uint64_t tag_pilot = 2;
        constexpr std::uint64_t tag_combiner = 3;
        constexpr std::uint64_t tag_tx_noise = 4;
        constexpr std::uint64_t tag_rx_noise = 5;

        arma::cx_mat random_analog_matrix(const ChainLayout &layout, Rng &rng)
        {
            arma::cx_mat v(layout.size(), layout.n_chains, arma::fill::zeros);
            for (arma::uword m = 0; m < layout.size(); ++m)
                v(m, layout.chain_of[m]) = std::polar(1.0, rng.phase());
            return v;
        }
    }

    BeamWeightSet BeamWeightSet::prefix(arma::uword K, arma::uword L) const
    {
        if (K > precoders.size() || L > combiners.size())
            throw contract_violation("BeamWeightSet::prefix: requested more weights than available");
        BeamWeightSet out;
        out.tx_layout = tx_layout;
        out.rx_layout = rx_layout;
        out.precoders.assign(precoders.begin(), precoders.begin() + K);
        out.pilots.assign(pilots.begin(), pilots.begin() + K);
        out.combiners.assign(combiners.begin(), combiners.begin() + L);
        return out;
    }

    arma::cx_mat BeamWeightSet::stacked_pilots() const
    {
        arma::cx_mat p(tx_layout.size(), precoders.size());
        for (arma::uword k = 0; k < precoders.size(); ++k)
            p.col(k) = precoders[k] * pilots[k];
        return p;
    }

    arma::cx_mat BeamWeightSet::stacked_combiners() const
    {
        const arma::uword n_s = n_streams();
        arma::cx_mat w(n_s * combiners.size(), rx_layout.size());
        for (arma::uword l = 0; l < combiners.size(); ++l)
            w.rows(l * n_s, (l + 1) * n_s - 1) = combiners[l];
        return w;
    }

    BeamWeightSet random_beam_weights(const ChainLayout &tx_layout,
                                      const ChainLayout &rx_layout,
                                      arma::uword K,
                                      arma::uword L,
                                      double pilot_power_w,
                                      Rng &rng)
    {
        if (K == 0 || L == 0)
            throw invalid_parameter("random_beam_weights: K and L must be at least 1");
        if (!(pilot_power_w > 0.0))
            throw invalid_parameter("random_beam_weights: pilot power must be positive");

        const std::uint64_t base = rng.next_u64();
        const double amp = std::sqrt(pilot_power_w / 2.0);
        const std::complex<double> qpsk[4] = {{amp, amp}, {-amp, amp}, {-amp, -amp}, {amp, -amp}};

        BeamWeightSet w;
        w.tx_layout = tx_layout;
        w.rx_layout = rx_layout;
        w.precoders.reserve(K);
        w.pilots.reserve(K);
        w.combiners.reserve(L);

        for (arma::uword k = 0; k < K; ++k)
        {
            Rng sub(derive_seed(base, {tag_precoder, k}));
            w.precoders.push_back(random_analog_matrix(tx_layout, sub));

            Rng sym(derive_seed(base, {tag_pilot, k}));
            arma::cx_vec p(tx_layout.n_chains);
            for (arma::uword c = 0; c < tx_layout.n_chains; ++c)
                p(c) = qpsk[sym.index(4)];
            w.pilots.push_back(std::move(p));
        }
        for (arma::uword l = 0; l < L; ++l)
        {
            Rng sub(derive_seed(base, {tag_combiner, l}));
            w.combiners.push_back(random_analog_matrix(rx_layout, sub).st());
        }
        return w;
    }

    BeamWeightSet random_beam_weights(const HybridArrayConfig &config, arma::uword K, arma::uword L, Rng &rng)
    {
        config.validate();
        const auto layout = ChainLayout::contiguous(config.n_branches(), config.n_rf);
        return random_beam_weights(layout, layout, K, L, 1.0, rng);
    }

    void NoiseBudget::validate() const
    {
        if (!(tx_evm_db <= 0.0))
            throw invalid_parameter("noise.tx_evm_db must be <= 0 dB");
        if (!std::isfinite(tx_power_dbm_per_antenna))
            throw invalid_parameter("noise.tx_power_dbm_per_antenna must be finite");
        if (!std::isfinite(rx_noise_floor_dbm))
            throw invalid_parameter("noise.rx_noise_floor_dbm must be finite");
    }

    double NoiseBudget::tx_power_w() const
    {
        return std::pow(10.0, (tx_power_dbm_per_antenna - 30.0) / 10.0);
    }

    double NoiseBudget::tx_snr_db() const
    {
        return -2.0 * tx_evm_db;
    }

    double NoiseBudget::tx_noise_power_w() const
    {
        return tx_power_w() * std::pow(10.0, -tx_snr_db() / 10.0);
    }

    double NoiseBudget::rx_noise_power_w() const
    {
        return std::pow(10.0, (rx_noise_floor_dbm - 30.0) / 10.0);
    }

    NoiseBudget NoiseBudget::noiseless()
    {
        NoiseBudget n;
        n.enable_tx = false;
        n.enable_rx = false;
        return n;
    }

    arma::cx_vec MeasurementSet::block(arma::uword l, arma::uword k) const
    {
        return y.submat(l * n_s, k, (l + 1) * n_s - 1, k);
    }

    MeasurementSet MeasurementSet::subset(arma::uword K_new, arma::uword L_new) const
    {
        if (K_new == 0 || L_new == 0 || K_new > K() || L_new > L())
            throw contract_violation("MeasurementSet::subset: sizes out of range");
        MeasurementSet out;
        out.n_s = n_s;
        out.y = y.submat(0, 0, L_new * n_s - 1, K_new - 1);
        out.p_stacked = p_stacked.cols(0, K_new - 1);
        out.w_stacked = w_stacked.rows(0, L_new * n_s - 1);
        return out;
    }

    MeasurementSet simulate_measurements(const arma::cx_mat &h,
                                         const BeamWeightSet &weights,
                                         const NoiseBudget &noise,
                                         Rng &rng,
                                         const arma::cx_mat &tx_noise_channel)
    {
        noise.validate();
        const arma::uword n_t = weights.tx_layout.size();
        const arma::uword n_r = weights.rx_layout.size();
        if (h.n_rows != n_r || h.n_cols != n_t)
            throw contract_violation("simulate_measurements: channel is " + std::to_string(h.n_rows) + "x" +
                                     std::to_string(h.n_cols) + ", weights expect " + std::to_string(n_r) + "x" +
                                     std::to_string(n_t));
        const bool routed = !tx_noise_channel.is_empty();
        if (routed && tx_noise_channel.n_rows != n_r)
            throw contract_violation("simulate_measurements: transmit-noise channel row count mismatch");

        MeasurementSet m;
        m.n_s = weights.n_streams();
        m.p_stacked = weights.stacked_pilots();
        m.w_stacked = weights.stacked_combiners();

        const arma::uword K = weights.n_precoders();
        const arma::uword L = weights.n_combiners();
        const arma::uword n_s = m.n_s;
        const std::uint64_t base = rng.next_u64();

        const arma::cx_mat received = h * m.p_stacked; // noiseless receive-branch signals, one column per k
        m.y.set_size(n_s * L, K);

        const arma::uword noise_dim = routed ? tx_noise_channel.n_cols : n_t;
        const double tx_var = noise.tx_noise_power_w();
        const double rx_var = noise.rx_noise_power_w();

        arma::cx_vec n_tx(noise_dim);
        arma::cx_vec n_rx(n_s);
        for (arma::uword k = 0; k < K; ++k)
            for (arma::uword l = 0; l < L; ++l)
            {
                arma::cx_vec r = received.col(k);
                if (noise.enable_tx)
                {
                    Rng sub(derive_seed(base, {tag_tx_noise, l, k}));
                    for (arma::uword i = 0; i < noise_dim; ++i)
                        n_tx(i) = sub.complex_normal(tx_var);
                    r += routed ? arma::cx_vec(tx_noise_channel * n_tx) : arma::cx_vec(h * n_tx);
                }
                arma::cx_vec yl = weights.combiners[l] * r;
                if (noise.enable_rx)
                {
                    Rng sub(derive_seed(base, {tag_rx_noise, l, k}));
                    for (arma::uword i = 0; i < n_s; ++i)
                        n_rx(i) = sub.complex_normal(rx_var);
                    yl += n_rx;
                }
                m.y.submat(l * n_s, k, (l + 1) * n_s - 1, k) = yl;
            }
        return m;
    }

    namespace
    {
        struct Pinv
        {
            arma::cx_mat pinv;
            arma::uword rank = 0;
        };

        Pinv pseudo_inverse(const arma::cx_mat &a)
        {
            arma::cx_mat u, v;
            arma::vec s;
            if (!arma::svd_econ(u, s, v, a, "both", "std"))
                throw std::runtime_error("SVD failed to converge");
            Pinv out;
            if (s.is_empty())
            {
                out.pinv.zeros(a.n_cols, a.n_rows);
                return out;
            }
            const double tol = double(std::max(a.n_rows, a.n_cols)) * std::numeric_limits<double>::epsilon() * s(0);
            while (out.rank < s.n_elem && s(out.rank) > tol)
                ++out.rank;
            if (out.rank == 0)
            {
                out.pinv.zeros(a.n_cols, a.n_rows);
                return out;
            }
            const arma::uword r = out.rank;
            out.pinv = v.cols(0, r - 1) * arma::diagmat(1.0 / s.head(r)) * u.cols(0, r - 1).t();
            return out;
        }
    }

    arma::uword numerical_rank(const arma::cx_mat &a)
    {
        return pseudo_inverse(a).rank;
    }

    arma::cx_mat ls_estimate_channel(const MeasurementSet &meas, const LsOptions &options)
    {
        const arma::uword n_t = meas.p_stacked.n_rows;
        const arma::uword n_r = meas.w_stacked.n_cols;
        if (meas.y.n_rows != meas.w_stacked.n_rows || meas.y.n_cols != meas.p_stacked.n_cols)
            throw contract_violation("ls_estimate_channel: Y, P and W dimensions are inconsistent");

        const Pinv p = pseudo_inverse(meas.p_stacked);
        const Pinv w = pseudo_inverse(meas.w_stacked);

        const bool k_short = p.rank < n_t;
        const bool l_short = w.rank < n_r;
        if ((k_short || l_short) && !options.allow_rank_deficient)
        {
            std::string msg = "underdetermined effective-channel estimation:";
            if (k_short)
                msg += " K condition failed (K = " + std::to_string(meas.K()) + " precoders, rank(P) = " +
                       std::to_string(p.rank) + " < n_ant^t = " + std::to_string(n_t) + ")";
            if (l_short)
                msg += std::string(k_short ? ";" : "") + " L condition failed (L = " + std::to_string(meas.L()) +
                       " combiners x n_s = " + std::to_string(meas.n_s) + ", rank(W) = " + std::to_string(w.rank) +
                       " < n_ant^r = " + std::to_string(n_r) + ")";
            using fc = underdetermined_system::failed_condition;
            throw underdetermined_system(k_short && l_short ? fc::both : (k_short ? fc::precoders : fc::combiners), msg);
        }

        // pinv(P^T kron W) = pinv(P^T) kron pinv(W), applied to vec(Y)
        return w.pinv * meas.y * p.pinv;
    }
}
