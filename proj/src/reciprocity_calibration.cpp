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

#include "recipcal/reciprocity_calibration.hpp"

#include "recipcal/errors.hpp"

#include <cmath>

namespace recipcal
{
    namespace
    {
        arma::uvec to_uvec(const std::vector<arma::uword> &v)
        {
            return arma::conv_to<arma::uvec>::from(v);
        }

        void check_partition(const Partition &p, arma::uword n_ant, bool equal_sizes)
        {
            if (p.group_a.size() + p.group_b.size() != n_ant)
                throw contract_violation("partition groups must cover every antenna");
            if (equal_sizes && p.group_a.size() != p.group_b.size())
                throw contract_violation("partition does not split the array into two equal groups");
            std::vector<bool> seen(n_ant, false);
            for (const auto *g : {&p.group_a, &p.group_b})
                for (auto m : *g)
                {
                    if (m >= n_ant || seen[m])
                        throw contract_violation("partition groups must be disjoint and cover every antenna");
                    seen[m] = true;
                }
        }
    }

    void BidirectionalEstimate::validate() const
    {
        const arma::uword na = partition.group_a.size();
        const arma::uword nb = partition.group_b.size();
        if (h_ab.n_rows != nb || h_ab.n_cols != na || h_ba.n_rows != na || h_ba.n_cols != nb)
            throw contract_violation("bidirectional estimate dimensions do not match the partition");
        check_partition(partition, na + nb, false);
    }

    BidirectionalMeasurements BidirectionalMeasurements::subset(arma::uword K, arma::uword L) const
    {
        return {a_to_b.subset(K, L), b_to_a.subset(K, L), partition};
    }

    BidirectionalChannels bidirectional_channels(const HardwareProfile &profile,
                                                 const HybridArrayConfig &config,
                                                 const Partition &partition,
                                                 const ChannelMatrix &channel)
    {
        if (config.architecture != Architecture::Subarray)
            throw unsupported_architecture("internal calibration is not feasible for a fully connected array: "
                                           "antennas cannot be split into transmit and receive groups");
        check_partition(partition, config.n_ant, true);
        if (channel.entries.n_rows != config.n_ant || channel.entries.n_cols != config.n_ant)
            throw contract_violation("intra-array channel must be n_ant x n_ant");

        // Both groups must own whole RF chains
        group_layout(config, partition.group_a);
        group_layout(config, partition.group_b);

        const arma::cx_vec t = merged_tx_response(profile, config);
        const arma::cx_vec r = merged_rx_response(profile, config);
        const arma::uvec a = to_uvec(partition.group_a);
        const arma::uvec b = to_uvec(partition.group_b);

        const arma::cx_mat c_ba = channel.entries.submat(b, a); // rows receive (B), cols transmit (A)
        const arma::cx_mat c_ab = channel.entries.submat(a, b);

        BidirectionalChannels out;
        out.noise_ab = arma::diagmat(arma::cx_vec(r.elem(b))) * c_ba;
        out.noise_ba = arma::diagmat(arma::cx_vec(r.elem(a))) * c_ab;
        out.h_ab = out.noise_ab * arma::diagmat(arma::cx_vec(t.elem(a)));
        out.h_ba = out.noise_ba * arma::diagmat(arma::cx_vec(t.elem(b)));
        return out;
    }

    DirectionalWeights calibration_weights(const HybridArrayConfig &config,
                                           const Partition &partition,
                                           arma::uword K,
                                           arma::uword L,
                                           double pilot_power_w,
                                           Rng &rng)
    {
        const ChainLayout la = group_layout(config, partition.group_a);
        const ChainLayout lb = group_layout(config, partition.group_b);
        DirectionalWeights w;
        w.a_to_b = random_beam_weights(la, lb, K, L, pilot_power_w, rng);
        w.b_to_a = random_beam_weights(lb, la, K, L, pilot_power_w, rng);
        return w;
    }

    BidirectionalMeasurements measure_bidirectional(const HardwareProfile &profile,
                                                    const HybridArrayConfig &config,
                                                    const Partition &partition,
                                                    const ChannelMatrix &channel,
                                                    const DirectionalWeights &weights,
                                                    const NoiseBudget &noise,
                                                    Rng &rng)
    {
        const auto ch = bidirectional_channels(profile, config, partition, channel);
        BidirectionalMeasurements m;
        m.partition = partition;
        m.a_to_b = simulate_measurements(ch.h_ab, weights.a_to_b, noise, rng, ch.noise_ab);
        m.b_to_a = simulate_measurements(ch.h_ba, weights.b_to_a, noise, rng, ch.noise_ba);
        return m;
    }

    BidirectionalEstimate estimate_bidirectional(const BidirectionalMeasurements &meas, const LsOptions &options)
    {
        BidirectionalEstimate est;
        est.partition = meas.partition;
        est.h_ab = ls_estimate_channel(meas.a_to_b, options);
        est.h_ba = ls_estimate_channel(meas.b_to_a, options);
        return est;
    }

    BidirectionalEstimate bidirectional_measure(const HardwareProfile &profile,
                                                const HybridArrayConfig &config,
                                                const Partition &partition,
                                                const ChannelMatrix &channel,
                                                const DirectionalWeights &weights,
                                                const NoiseBudget &noise,
                                                Rng &rng,
                                                const LsOptions &options)
    {
        return estimate_bidirectional(measure_bidirectional(profile, config, partition, channel, weights, noise, rng),
                                      options);
    }

    QMatrix build_q(const BidirectionalEstimate &est)
    {
        est.validate();
        const auto &A = est.partition.group_a;
        const auto &B = est.partition.group_b;
        const arma::uword n = A.size() + B.size();

        QMatrix q{arma::cx_mat(n, n, arma::fill::zeros)};
        for (arma::uword a = 0; a < A.size(); ++a)
        {
            const arma::uword i = A[a];
            for (arma::uword b = 0; b < B.size(); ++b)
            {
                const arma::uword j = B[b];
                const std::complex<double> h_ij = est.h_ab(b, a); // i -> j
                const std::complex<double> h_ji = est.h_ba(a, b); // j -> i

                q.q(i, i) += std::norm(h_ji);
                q.q(j, j) += std::norm(h_ij);
                q.q(i, j) = -std::conj(h_ji) * h_ij;
                q.q(j, i) = -std::conj(h_ij) * h_ji;
            }
        }
        return q;
    }

    double calibration_cost(const QMatrix &q, const arma::cx_vec &f)
    {
        if (q.q.n_rows != f.n_elem || q.q.n_cols != f.n_elem)
            throw contract_violation("calibration_cost: size mismatch");
        return std::real(arma::cdot(f, q.q * f));
    }

    void apply_phase_convention(arma::cx_vec &f)
    {
        for (arma::uword m = 0; m < f.n_elem; ++m)
            if (std::abs(f(m)) > 0.0)
            {
                f *= std::conj(f(m)) / std::abs(f(m));
                f(m) = std::abs(f(m)); // exactly real
                return;
            }
    }

    CalibrationSolution solve_calibration(const QMatrix &q)
    {
        const arma::cx_mat &Q = q.q;
        if (Q.n_rows != Q.n_cols || Q.is_empty())
            throw contract_violation("solve_calibration: Q must be square and non-empty");
        const double scale = arma::norm(Q, "fro");
        if (arma::norm(Q - Q.t(), "fro") > 1e-12 * scale)
            throw contract_violation("solve_calibration: Q is not Hermitian");

        arma::vec eigval;
        arma::cx_mat eigvec;
        const arma::cx_mat sym = 0.5 * (Q + Q.t());
        if (!arma::eig_sym(eigval, eigvec, sym, "std"))
            throw std::runtime_error("solve_calibration: eigendecomposition failed");

        CalibrationSolution sol;
        sol.f.f = eigvec.col(0);
        sol.f.f /= arma::norm(sol.f.f);
        apply_phase_convention(sol.f.f);

        sol.eigenvalue = eigval(0);
        sol.next_eigenvalue = eigval.n_elem > 1 ? eigval(1) : eigval(0);
        const double top = arma::max(arma::abs(eigval));
        sol.eigen_gap = top > 0.0 ? (sol.next_eigenvalue - sol.eigenvalue) / top : 0.0;
        sol.degenerate = eigval.n_elem > 1 && sol.eigen_gap <= degeneracy_threshold;
        return sol;
    }

    CalibrationMatrix align_scalar(const CalibrationMatrix &f_est, const CalibrationMatrix &f_ref)
    {
        if (f_est.size() != f_ref.size())
            throw contract_violation("align_scalar: length mismatch");
        const double power = std::real(arma::cdot(f_est.f, f_est.f));
        if (!(power > 0.0))
            throw invalid_parameter("align_scalar: estimate is the zero vector");
        const std::complex<double> alpha = arma::cdot(f_est.f, f_ref.f) / power;
        return {alpha * f_est.f};
    }

    double nmse_f(const CalibrationMatrix &f_est, const CalibrationMatrix &f_ref)
    {
        if (f_est.size() != f_ref.size())
            throw contract_violation("nmse_f: length mismatch");
        const double ref = std::real(arma::cdot(f_ref.f, f_ref.f));
        if (!(ref > 0.0))
            throw invalid_parameter("nmse_f: reference is the zero vector");
        const arma::cx_vec d = f_est.f - f_ref.f;
        return std::real(arma::cdot(d, d)) / ref;
    }

    CalibrationMatrix pin_first(const CalibrationMatrix &f)
    {
        if (f.size() == 0 || f.f(0) == 0.0)
            throw invalid_parameter("pin_first: first coefficient is zero");
        return {f.f / f.f(0)};
    }
}
