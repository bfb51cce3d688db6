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

#ifndef recipcal_dl_csit_H
#define recipcal_dl_csit_H

#include <armadillo>
#include <complex>
#include <cstdint>
#include <vector>

#include "recipcal/array_model.hpp"
#include "recipcal/random.hpp"

namespace recipcal
{
    // i.i.d. zero-mean complex Gaussian errors on the calibration coefficients and on the UL estimate
    struct CsitErrorModel
    {
        double sigma_f_sq = 0.0;   // per-entry variance of Delta F
        double sigma_ul_sq = 0.0;  // per-entry variance of Delta h_UL, equal to NMSE_UL
        arma::uword n_ant_bs = 0;

        void validate() const;

        // sigma_f_sq = nmse_f ||F||^2 / N and sigma_ul_sq = nmse_ul
        static CsitErrorModel from_nmse(double nmse_f, double nmse_ul, const CalibrationMatrix &f_true);

        // N sigma_f_sq / ||F||^2
        double nmse_f(const CalibrationMatrix &f_true) const;
    };

    // Downlink CSIT F_UE^{-T} H_UL^T F_BS with diagonal calibration matrices.
    // h_ul is BS antennas x UE antennas; the result is UE antennas x BS antennas.
    // A single-antenna UE passes a length-1 f_ue (or {1} to ignore it).
    arma::cx_mat reconstruct_dl(const arma::cx_mat &h_ul, const CalibrationMatrix &f_bs, const CalibrationMatrix &f_ue);

    // Expected NMSE_DL, (1/N) (sigma_f^2 Tr(Omega*) + sigma_ul^2 ||f_hat||^2).
    // omega is the UL channel covariance; throws invalid_parameter if it is not Hermitian PSD.
    double nmse_dl_closed_form(const arma::cx_mat &omega, const CalibrationMatrix &f_hat, const CsitErrorModel &err);

    // NMSE_DL for one realized calibration error, (1/N) Tr(dF^H Omega* dF + sigma_ul^2 F_hat^H F_hat)
    double nmse_dl_conditional(const arma::cx_mat &omega,
                               const arma::cx_vec &delta_f,
                               const CalibrationMatrix &f_hat,
                               double sigma_ul_sq);

    // Expectation over the calibration error as well: the closed form with E||F_hat||^2 = ||F||^2 + N sigma_f^2
    double nmse_dl_expected(const arma::cx_mat &omega, const CalibrationMatrix &f_true, const CsitErrorModel &err);

    // Subarray base station serving a single-antenna UE
    struct CsitScenario
    {
        HybridArrayConfig bs_config;
        HardwareProfile bs;
        std::complex<double> t_ue{1.0, 0.0};
        std::complex<double> r_ue{1.0, 0.0};

        // Combined calibration f_UE^{-1} F_BS that maps h_UL^T to h_DL^T
        CalibrationMatrix combined_calibration() const;

        // Omega = E[h_UL h_UL^H] = |t_UE|^2 R_BS R_BS^H for a unit-variance Rayleigh channel
        arma::cx_mat ul_covariance() const;
    };

    CsitScenario sample_csit_scenario(const HybridArrayConfig &bs_config, double amp_imbalance_std, Rng &rng);

    enum class MonteCarloMode
    {
        Full,       // fresh Delta F every trial
        Conditional // one Delta F drawn up front and kept for all trials
    };

    struct MonteCarloResult
    {
        double nmse_dl = 0.0;
        arma::cx_vec delta_f; // the fixed calibration error in Conditional mode
    };

    // Empirical (1 / (N trials)) sum ||h_DL_hat - h_DL||^2 over Rayleigh channels and the error model
    MonteCarloResult nmse_dl_monte_carlo(const CsitScenario &scenario,
                                         const CsitErrorModel &err,
                                         arma::uword trials,
                                         Rng &rng,
                                         MonteCarloMode mode = MonteCarloMode::Full);

    // |a^H b| / (||a|| ||b||): beam-direction agreement, insensitive to a complex scalar
    double beam_alignment(const arma::cx_vec &a, const arma::cx_vec &b);

    struct CsitSweepRow
    {
        double nmse_f = 0.0;
        double nmse_ul = 0.0;
        double nmse_dl_closed = 0.0;
        double nmse_dl_mc = 0.0;
        arma::uword trials = 0;
        std::uint64_t seed = 0;
    };

    // Grid over (NMSE_F, NMSE_UL); each cell uses a sub-stream keyed by its grid position
    std::vector<CsitSweepRow> csit_sweep(const CsitScenario &scenario,
                                         const std::vector<double> &nmse_f_grid,
                                         const std::vector<double> &nmse_ul_grid,
                                         arma::uword trials,
                                         std::uint64_t seed,
                                         unsigned threads = 1);
}

#endif
