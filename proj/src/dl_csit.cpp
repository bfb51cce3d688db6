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

#include "recipcal/dl_csit.hpp"

#include "recipcal/channel_model.hpp"
#include "recipcal/errors.hpp"
#include "recipcal/parallel.hpp"

#include <cmath>

namespace recipcal
{
    void CsitErrorModel::validate() const
    {
        if (!(sigma_f_sq >= 0.0))
            throw invalid_parameter("sigma_f_sq must be non-negative");
        if (!(sigma_ul_sq >= 0.0))
            throw invalid_parameter("sigma_ul_sq must be non-negative");
        if (n_ant_bs == 0)
            throw invalid_parameter("n_ant_bs must be positive");
    }

    CsitErrorModel CsitErrorModel::from_nmse(double nmse_f, double nmse_ul, const CalibrationMatrix &f_true)
    {
        if (!(nmse_f >= 0.0) || !(nmse_ul >= 0.0))
            throw invalid_parameter("target NMSE values must be non-negative");
        CsitErrorModel e;
        e.n_ant_bs = f_true.size();
        const double power = std::real(arma::cdot(f_true.f, f_true.f));
        e.sigma_f_sq = nmse_f * power / double(e.n_ant_bs);
        e.sigma_ul_sq = nmse_ul;
        e.validate();
        return e;
    }

    double CsitErrorModel::nmse_f(const CalibrationMatrix &f_true) const
    {
        return double(n_ant_bs) * sigma_f_sq / std::real(arma::cdot(f_true.f, f_true.f));
    }

    arma::cx_mat reconstruct_dl(const arma::cx_mat &h_ul, const CalibrationMatrix &f_bs, const CalibrationMatrix &f_ue)
    {
        if (h_ul.n_rows != f_bs.size() || h_ul.n_cols != f_ue.size())
            throw contract_violation("reconstruct_dl: UL channel must be n_ant(BS) x n_ant(UE)");
        for (arma::uword u = 0; u < f_ue.size(); ++u)
            if (f_ue.f(u) == 0.0)
                throw singular_hardware("reconstruct_dl: UE calibration coefficient " + std::to_string(u) + " is zero");
        for (arma::uword b = 0; b < f_bs.size(); ++b)
            if (f_bs.f(b) == 0.0)
                throw singular_hardware("reconstruct_dl: BS calibration coefficient " + std::to_string(b) + " is zero");

        arma::cx_mat dl = h_ul.st();
        dl.each_row() %= f_bs.f.st();
        dl.each_col() /= f_ue.f;
        return dl;
    }

    namespace
    {
        void check_covariance(const arma::cx_mat &omega, arma::uword n)
        {
            if (omega.n_rows != n || omega.n_cols != n)
                throw invalid_parameter("covariance must be n_ant_bs x n_ant_bs");
            const double scale = arma::norm(omega, "fro");
            if (arma::norm(omega - omega.t(), "fro") > 1e-12 * scale)
                throw invalid_parameter("covariance is not Hermitian");
            const arma::vec ev = arma::eig_sym(arma::cx_mat(0.5 * (omega + omega.t())));
            if (ev.n_elem > 0 && ev(0) < -1e-10 * scale)
                throw invalid_parameter("covariance is not positive semidefinite");
        }
    }

    double nmse_dl_closed_form(const arma::cx_mat &omega, const CalibrationMatrix &f_hat, const CsitErrorModel &err)
    {
        err.validate();
        check_covariance(omega, err.n_ant_bs);
        if (f_hat.size() != err.n_ant_bs)
            throw contract_violation("nmse_dl_closed_form: calibration length mismatch");
        // E_dF[dF^H conj(Omega) dF] = sigma_f^2 diag(conj(Omega)) for i.i.d. entries, whose trace is sigma_f^2 Tr(Omega)
        const double trace = std::real(arma::trace(omega));
        const double power = std::real(arma::cdot(f_hat.f, f_hat.f));
        return (err.sigma_f_sq * trace + err.sigma_ul_sq * power) / double(err.n_ant_bs);
    }

    double nmse_dl_conditional(const arma::cx_mat &omega,
                               const arma::cx_vec &delta_f,
                               const CalibrationMatrix &f_hat,
                               double sigma_ul_sq)
    {
        const arma::uword n = delta_f.n_elem;
        check_covariance(omega, n);
        if (f_hat.size() != n)
            throw contract_violation("nmse_dl_conditional: calibration length mismatch");
        const arma::cx_mat d = arma::diagmat(delta_f);
        const double quad = std::real(arma::trace(d.t() * arma::conj(omega) * d));
        const double power = std::real(arma::cdot(f_hat.f, f_hat.f));
        return (quad + sigma_ul_sq * power) / double(n);
    }

    double nmse_dl_expected(const arma::cx_mat &omega, const CalibrationMatrix &f_true, const CsitErrorModel &err)
    {
        err.validate();
        check_covariance(omega, err.n_ant_bs);
        const double trace = std::real(arma::trace(omega));
        const double power = std::real(arma::cdot(f_true.f, f_true.f)) + double(err.n_ant_bs) * err.sigma_f_sq;
        return (err.sigma_f_sq * trace + err.sigma_ul_sq * power) / double(err.n_ant_bs);
    }

    CalibrationMatrix CsitScenario::combined_calibration() const
    {
        CalibrationMatrix f = true_calibration(bs, bs_config);
        if (t_ue == 0.0)
            throw singular_hardware("UE transmit response is zero");
        f.f *= r_ue / t_ue;
        return f;
    }

    arma::cx_mat CsitScenario::ul_covariance() const
    {
        const arma::cx_vec r = merged_rx_response(bs, bs_config);
        return std::norm(t_ue) * (r * r.t());
    }

    CsitScenario sample_csit_scenario(const HybridArrayConfig &bs_config, double amp_imbalance_std, Rng &rng)
    {
        CsitScenario s;
        s.bs_config = bs_config;
        s.bs = sample_hardware_profile(bs_config, amp_imbalance_std, rng);
        HybridArrayConfig ue_config;
        ue_config.n_ant = 1;
        ue_config.n_rf = 1;
        const HardwareProfile ue = sample_hardware_profile(ue_config, amp_imbalance_std, rng);
        s.t_ue = merged_tx_response(ue, ue_config)(0);
        s.r_ue = merged_rx_response(ue, ue_config)(0);
        return s;
    }

    MonteCarloResult nmse_dl_monte_carlo(const CsitScenario &scenario,
                                         const CsitErrorModel &err,
                                         arma::uword trials,
                                         Rng &rng,
                                         MonteCarloMode mode)
    {
        if (trials == 0)
            throw invalid_parameter("nmse_dl_monte_carlo: trials must be at least 1");
        err.validate();
        const arma::uword n = scenario.bs_config.n_ant;
        if (err.n_ant_bs != n)
            throw contract_violation("nmse_dl_monte_carlo: error model size does not match the base station");

        const arma::cx_vec t_bs = merged_tx_response(scenario.bs, scenario.bs_config);
        const arma::cx_vec r_bs = merged_rx_response(scenario.bs, scenario.bs_config);
        const CalibrationMatrix f = scenario.combined_calibration();
        const CalibrationMatrix ue_unit{arma::cx_vec{std::complex<double>(1.0, 0.0)}};

        MonteCarloResult out;
        auto draw_delta_f = [&]()
        {
            arma::cx_vec d(n);
            for (arma::uword m = 0; m < n; ++m)
                d(m) = rng.complex_normal(err.sigma_f_sq);
            return d;
        };
        if (mode == MonteCarloMode::Conditional)
            out.delta_f = draw_delta_f();

        double acc = 0.0;
        arma::cx_vec dh(n);
        for (arma::uword t = 0; t < trials; ++t)
        {
            const arma::cx_vec c = rayleigh_channel(n, rng);
            const arma::cx_vec h_ul = (r_bs % c) * scenario.t_ue;
            const arma::cx_vec h_dl = (t_bs % c) * scenario.r_ue; // DL row as a column vector

            const arma::cx_vec delta_f = mode == MonteCarloMode::Conditional ? out.delta_f : draw_delta_f();
            for (arma::uword m = 0; m < n; ++m)
                dh(m) = rng.complex_normal(err.sigma_ul_sq);

            const CalibrationMatrix f_hat{f.f + delta_f};
            const arma::cx_mat dl_hat = reconstruct_dl(arma::cx_mat(h_ul + dh), f_hat, ue_unit);
            const arma::cx_rowvec e = dl_hat.row(0) - h_dl.st();
            acc += std::real(arma::cdot(e, e));
        }
        out.nmse_dl = acc / (double(n) * double(trials));
        return out;
    }

    double beam_alignment(const arma::cx_vec &a, const arma::cx_vec &b)
    {
        const double na = arma::norm(a);
        const double nb = arma::norm(b);
        if (!(na > 0.0) || !(nb > 0.0))
            throw invalid_parameter("beam_alignment: zero vector");
        return std::abs(arma::cdot(a, b)) / (na * nb);
    }

    std::vector<CsitSweepRow> csit_sweep(const CsitScenario &scenario,
                                         const std::vector<double> &nmse_f_grid,
                                         const std::vector<double> &nmse_ul_grid,
                                         arma::uword trials,
                                         std::uint64_t seed,
                                         unsigned threads)
    {
        const CalibrationMatrix f = scenario.combined_calibration();
        const arma::cx_mat omega = scenario.ul_covariance();

        std::vector<CsitSweepRow> rows(nmse_f_grid.size() * nmse_ul_grid.size());
        parallel_for(rows.size(), threads, [&](std::size_t idx)
                     {
            const std::size_t i = idx / nmse_ul_grid.size();
            const std::size_t j = idx % nmse_ul_grid.size();
            const auto err = CsitErrorModel::from_nmse(nmse_f_grid[i], nmse_ul_grid[j], f);

            CsitSweepRow &row = rows[idx];
            row.nmse_f = nmse_f_grid[i];
            row.nmse_ul = nmse_ul_grid[j];
            row.trials = trials;
            row.seed = derive_seed(seed, {i, j});
            Rng rng(row.seed);
            row.nmse_dl_closed = nmse_dl_expected(omega, f, err);
            row.nmse_dl_mc = nmse_dl_monte_carlo(scenario, err, trials, rng).nmse_dl; });
        return rows;
    }
}
