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

#include "catch_amalgamated.hpp"

#include "recipcal/dl_csit.hpp"
#include "recipcal/errors.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace recipcal;
using cx = std::complex<double>;

namespace
{
    CsitScenario small_scenario(std::uint64_t seed, arma::uword n_ant = 16)
    {
        HybridArrayConfig c;
        c.n_ant = n_ant;
        c.n_rf = 4;
        Rng rng(seed);
        return sample_csit_scenario(c, 0.1, rng);
    }
}

TEST_CASE("reciprocal hardware reproduces the transposed UL channel")
{
    Rng rng(1);
    const arma::cx_mat h_ul = testing::random_cx(8, 2, rng);
    const CalibrationMatrix ones_bs{arma::cx_vec(8, arma::fill::ones)};
    const CalibrationMatrix ones_ue{arma::cx_vec(2, arma::fill::ones)};
    REQUIRE(arma::all(arma::vectorise(reconstruct_dl(h_ul, ones_bs, ones_ue) == h_ul.st())));
}

TEST_CASE("true calibration maps the UL effective channel onto the DL effective channel")
{
    HybridArrayConfig bs;
    bs.n_ant = 16;
    bs.n_rf = 4;
    HybridArrayConfig ue;
    ue.n_ant = 4;
    ue.n_rf = 2;
    Rng rng(2);
    const HardwareProfile pb = sample_hardware_profile(bs, 0.1, rng, 0.3);
    const HardwareProfile pu = sample_hardware_profile(ue, 0.1, rng, 0.3);
    const arma::cx_mat c = testing::random_cx(4, 16, rng); // DL propagation, UE x BS

    const arma::cx_mat h_dl = arma::diagmat(merged_rx_response(pu, ue)) * c * arma::diagmat(merged_tx_response(pb, bs));
    const arma::cx_mat h_ul = arma::diagmat(merged_rx_response(pb, bs)) * c.st() * arma::diagmat(merged_tx_response(pu, ue));
    const arma::cx_mat rec = reconstruct_dl(h_ul, true_calibration(pb, bs), true_calibration(pu, ue));
    REQUIRE(testing::rel_err(rec, h_dl) <= 1e-12);

    SECTION("UE-side scalar only rescales the result")
    {
        const cx k(0.4, -1.3);
        CalibrationMatrix fu = true_calibration(pu, ue);
        fu.f *= k;
        const arma::cx_mat scaled = reconstruct_dl(h_ul, true_calibration(pb, bs), fu);
        REQUIRE(testing::rel_err(arma::cx_mat(scaled * k), rec) <= 1e-13);
        for (arma::uword u = 0; u < 4; ++u)
            REQUIRE(beam_alignment(scaled.row(u).st(), rec.row(u).st()) == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("zero calibration coefficients are singular")
{
    const arma::cx_mat h(4, 1, arma::fill::ones);
    CalibrationMatrix fb{arma::cx_vec(4, arma::fill::ones)};
    const CalibrationMatrix fu{arma::cx_vec(1, arma::fill::ones)};
    fb.f(2) = 0.0;
    REQUIRE_THROWS_AS(reconstruct_dl(h, fb, fu), singular_hardware);
    REQUIRE_THROWS_AS(reconstruct_dl(h, CalibrationMatrix{arma::cx_vec(4, arma::fill::ones)}, CalibrationMatrix{arma::cx_vec(1, arma::fill::zeros)}),
                      singular_hardware);
    REQUIRE_THROWS_AS(reconstruct_dl(h, CalibrationMatrix{arma::cx_vec(3, arma::fill::ones)}, fu), contract_violation);
}

TEST_CASE("error model")
{
    Rng rng(3);
    const CalibrationMatrix f{testing::random_cx_vec(32, rng)};
    const CsitErrorModel e = CsitErrorModel::from_nmse(1e-2, 1e-3, f);
    REQUIRE(e.n_ant_bs == 32);
    REQUIRE(e.sigma_ul_sq == 1e-3);
    REQUIRE(e.nmse_f(f) == Catch::Approx(1e-2).epsilon(1e-14));
    REQUIRE_THROWS_AS(CsitErrorModel::from_nmse(-1.0, 0.0, f), invalid_parameter);
    CsitErrorModel bad;
    bad.n_ant_bs = 4;
    bad.sigma_f_sq = -1.0;
    REQUIRE_THROWS_AS(bad.validate(), invalid_parameter);
}

TEST_CASE("closed form inputs")
{
    Rng rng(4);
    const CalibrationMatrix f{testing::random_cx_vec(8, rng)};
    CsitErrorModel zero;
    zero.n_ant_bs = 8;
    REQUIRE(nmse_dl_closed_form(arma::eye<arma::cx_mat>(8, 8), f, zero) == 0.0);

    arma::cx_mat not_psd = arma::eye<arma::cx_mat>(8, 8);
    not_psd(3, 3) = -1.0;
    REQUIRE_THROWS_AS(nmse_dl_closed_form(not_psd, f, zero), invalid_parameter);
    arma::cx_mat not_herm = arma::eye<arma::cx_mat>(8, 8);
    not_herm(0, 1) = cx(0.0, 0.3);
    REQUIRE_THROWS_AS(nmse_dl_closed_form(not_herm, f, zero), invalid_parameter);
}

TEST_CASE("closed form against an independent Monte Carlo oracle")
{
    // identity covariance, unit-norm f_hat, equal variances
    const arma::uword n = 8;
    Rng rng(5);
    const arma::cx_vec f_hat = arma::normalise(testing::random_cx_vec(n, rng));
    const double s = 0.01;
    CsitErrorModel e;
    e.n_ant_bs = n;
    e.sigma_f_sq = s;
    e.sigma_ul_sq = s;
    const double closed = nmse_dl_closed_form(arma::eye<arma::cx_mat>(n, n), CalibrationMatrix{f_hat}, e);
    REQUIRE(closed == Catch::Approx((n * s + s * 1.0) / double(n)).epsilon(1e-14));

    // error of the reconstructed DL row: h .* dF + dh .* f_hat
    double acc = 0.0;
    const int draws = 100000;
    for (int t = 0; t < draws; ++t)
        for (arma::uword m = 0; m < n; ++m)
        {
            const cx h = rng.complex_normal(1.0);
            const cx err = h * rng.complex_normal(s) + rng.complex_normal(s) * f_hat(m);
            acc += std::norm(err);
        }
    REQUIRE(acc / (double(draws) * double(n)) == Catch::Approx(closed).epsilon(0.02));
}

TEST_CASE("expected closed form agrees with the simulator's Monte Carlo")
{
    const CsitScenario sc = small_scenario(6);
    const CalibrationMatrix f = sc.combined_calibration();
    const arma::cx_mat omega = sc.ul_covariance();
    int pair = 0;
    for (auto [nf, nu] : {std::pair{1e-2, 1e-2}, {1e-3, 1e-1}, {1e-1, 1e-4}})
    {
        const CsitErrorModel e = CsitErrorModel::from_nmse(nf, nu, f);
        Rng rng(600 + pair++);
        const double mc = nmse_dl_monte_carlo(sc, e, 100000, rng).nmse_dl;
        REQUIRE(mc == Catch::Approx(nmse_dl_expected(omega, f, e)).epsilon(0.03));
    }
}

TEST_CASE("conditional Monte Carlo agrees with the conditional closed form")
{
    const CsitScenario sc = small_scenario(7);
    const CalibrationMatrix f = sc.combined_calibration();
    const CsitErrorModel e = CsitErrorModel::from_nmse(1e-2, 1e-2, f);
    Rng rng(70);
    const MonteCarloResult r = nmse_dl_monte_carlo(sc, e, 100000, rng, MonteCarloMode::Conditional);
    REQUIRE(r.delta_f.n_elem == 16);
    const double closed = nmse_dl_conditional(sc.ul_covariance(), r.delta_f, CalibrationMatrix{f.f + r.delta_f}, e.sigma_ul_sq);
    REQUIRE(r.nmse_dl == Catch::Approx(closed).epsilon(0.03));
}

TEST_CASE("zero errors give zero Monte Carlo NMSE")
{
    const CsitScenario sc = small_scenario(8);
    const CsitErrorModel e = CsitErrorModel::from_nmse(0.0, 0.0, sc.combined_calibration());
    Rng rng(1);
    REQUIRE(nmse_dl_monte_carlo(sc, e, 200, rng).nmse_dl <= 1e-28);
    REQUIRE_THROWS_AS(nmse_dl_monte_carlo(sc, e, 0, rng), invalid_parameter);
}

TEST_CASE("UL covariance is Hermitian PSD with the hardware gain on its diagonal")
{
    const CsitScenario sc = small_scenario(9);
    const arma::cx_mat omega = sc.ul_covariance();
    REQUIRE(arma::norm(omega - omega.t(), "fro") <= 1e-15);
    const arma::cx_vec r = merged_rx_response(sc.bs, sc.bs_config);
    for (arma::uword m = 0; m < 16; ++m)
        REQUIRE(omega(m, m).real() == Catch::Approx(std::norm(sc.t_ue) * std::norm(r(m))).epsilon(1e-14));
}

TEST_CASE("sweep grid is monotone and UL-limited where the UL error dominates")
{
    const CsitScenario sc = small_scenario(10, 64);
    const std::vector<double> grid = {1e-4, 1e-3, 1e-2, 1e-1};
    const auto rows = csit_sweep(sc, grid, grid, 2000, 5, 1);
    REQUIRE(rows.size() == 16);
    auto at = [&](std::size_t i, std::size_t j) { return rows[i * 4 + j]; };
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
        {
            if (i > 0)
                REQUIRE(at(i, j).nmse_dl_closed >= at(i - 1, j).nmse_dl_closed);
            if (j > 0)
                REQUIRE(at(i, j).nmse_dl_closed >= at(i, j - 1).nmse_dl_closed);
        }

    // NMSE_UL = 0.1: moving NMSE_F from 1e-4 to 1e-3 barely matters
    const double lo = at(0, 3).nmse_dl_closed, hi = at(1, 3).nmse_dl_closed;
    REQUIRE(std::abs(hi - lo) / lo < 0.05);

    // halving sigma_F^2 with NMSE_UL / NMSE_F >= 100
    const CalibrationMatrix f = sc.combined_calibration();
    const arma::cx_mat omega = sc.ul_covariance();
    const double full = nmse_dl_expected(omega, f, CsitErrorModel::from_nmse(1e-3, 1e-1, f));
    const double half = nmse_dl_expected(omega, f, CsitErrorModel::from_nmse(0.5e-3, 1e-1, f));
    REQUIRE(std::abs(full - half) / full < 0.05);

    REQUIRE(at(2, 2).nmse_dl_mc < 0.1);
}

TEST_CASE("sweep output does not depend on the worker count")
{
    const CsitScenario sc = small_scenario(11);
    const std::vector<double> grid = {1e-3, 1e-2};
    const auto a = csit_sweep(sc, grid, grid, 500, 9, 1);
    const auto b = csit_sweep(sc, grid, grid, 500, 9, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        REQUIRE(a[i].nmse_dl_mc == b[i].nmse_dl_mc);
        REQUIRE(a[i].seed == b[i].seed);
    }
}

TEST_CASE("beam alignment")
{
    const arma::cx_vec a{cx(1, 0), cx(0, 1)};
    REQUIRE(beam_alignment(a, cx(0.0, 2.0) * a) == Catch::Approx(1.0));
    REQUIRE(beam_alignment(a, arma::cx_vec{cx(0, 1), cx(1, 0)}) == Catch::Approx(0.0).margin(1e-15));
    REQUIRE_THROWS_AS(beam_alignment(a, arma::cx_vec(2, arma::fill::zeros)), invalid_parameter);
}
