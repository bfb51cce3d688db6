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

#include "recipcal/array_model.hpp"
#include "recipcal/errors.hpp"
#include "test_support.hpp"

#include <cmath>
#include <complex>
#include <numbers>

using namespace recipcal;
using cx = std::complex<double>;

namespace
{
    // Half-width by bisection on the sampled-free moment formula std(a^2) for a ~ U[1-e, 1+e],
    // computed from the raw moments E[a^2] and E[a^4] of the uniform distribution.
    double eps_by_bisection(double target_std)
    {
        auto std_of_square = [](double e)
        {
            // E[a^n] = ((1+e)^{n+1} - (1-e)^{n+1}) / ((n+1) 2e)
            auto moment = [e](int n) { return (std::pow(1 + e, n + 1) - std::pow(1 - e, n + 1)) / ((n + 1) * 2 * e); };
            return std::sqrt(moment(4) - moment(2) * moment(2));
        };
        double lo = 1e-12, hi = 1.0 - 1e-12;
        for (int i = 0; i < 200; ++i)
        {
            const double mid = 0.5 * (lo + hi);
            (std_of_square(mid) < target_std ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
}

TEST_CASE("config validation names the violated field")
{
    HybridArrayConfig c;
    REQUIRE_NOTHROW(c.validate());

    c.n_rf = 7;
    REQUIRE_THROWS_AS(c.validate(), invalid_parameter);
    REQUIRE_THROWS_WITH(c.validate(), Catch::Matchers::ContainsSubstring("array.n_rf"));

    c = {};
    c.n_rf = 65;
    REQUIRE_THROWS_AS(c.validate(), invalid_parameter);

    c = {};
    c.n_ant = 0;
    REQUIRE_THROWS_WITH(c.validate(), Catch::Matchers::ContainsSubstring("array.n_ant"));

    // a fully connected array need not split antennas evenly
    c = {};
    c.architecture = Architecture::FullyConnected;
    c.n_ant = 6;
    c.n_rf = 4;
    REQUIRE_NOTHROW(c.validate());
    REQUIRE(c.n_branches() == 24);
}

TEST_CASE("architecture names round-trip")
{
    REQUIRE(parse_architecture("subarray") == Architecture::Subarray);
    REQUIRE(parse_architecture("fully-connected") == Architecture::FullyConnected);
    REQUIRE(to_string(Architecture::FullyConnected) == "fully-connected");
    REQUIRE_THROWS_AS(parse_architecture("hybrid"), invalid_parameter);
}

TEST_CASE("amplitude half width")
{
    REQUIRE(amplitude_half_width(0.0) == 0.0);

    const double eps = amplitude_half_width(0.1);
    REQUIRE(eps == Catch::Approx(0.0866).margin(1e-4));
    REQUIRE(eps == Catch::Approx(eps_by_bisection(0.1)).epsilon(1e-10));

    // closed-form variance of a^2
    REQUIRE(4.0 / 3.0 * eps * eps + 4.0 / 45.0 * std::pow(eps, 4) == Catch::Approx(0.01).epsilon(1e-12));

    for (double s : {0.01, 0.3, 0.7, 1.1})
        REQUIRE(amplitude_half_width(s) == Catch::Approx(eps_by_bisection(s)).epsilon(1e-9));

    REQUIRE_THROWS_AS(amplitude_half_width(-0.1), invalid_parameter);
    REQUIRE_THROWS_AS(amplitude_half_width(1.2), invalid_parameter);
}

TEST_CASE("sampled squared amplitudes have the requested spread")
{
    HybridArrayConfig c;
    c.n_ant = 1000;
    c.n_rf = 1;
    Rng rng(7);
    double s1 = 0.0, s2 = 0.0;
    std::size_t n = 0;
    while (n < 1000000)
    {
        const HardwareProfile p = sample_hardware_profile(c, 0.1, rng);
        for (const auto &v : {p.t2, p.r2})
            for (const auto &x : v)
            {
                const double a2 = std::norm(x);
                s1 += a2;
                s2 += a2 * a2;
                ++n;
            }
    }
    const double mean = s1 / double(n);
    const double sd = std::sqrt(s2 / double(n) - mean * mean);
    REQUIRE(sd == Catch::Approx(0.1).margin(0.001));
}

TEST_CASE("hardware profile structure")
{
    HybridArrayConfig c;
    Rng rng(3);
    const HardwareProfile p = sample_hardware_profile(c, 0.1, rng);
    REQUIRE(p.t1.n_elem == 8);
    REQUIRE(p.r1.n_elem == 8);
    REQUIRE(p.t2.n_elem == 64);
    REQUIRE(p.r2.n_elem == 64);

    const double eps = amplitude_half_width(0.1);
    for (const auto &x : p.t1)
    {
        REQUIRE(std::abs(x) == Catch::Approx(1.0).epsilon(1e-15));
        REQUIRE(std::arg(x) >= -std::numbers::pi);
    }
    for (const auto &x : p.r1)
        REQUIRE(std::abs(x) == Catch::Approx(1.0).epsilon(1e-15));
    for (const auto &v : {p.t2, p.r2})
        for (const auto &x : v)
        {
            REQUIRE(x.imag() == 0.0);
            REQUIRE(x.real() >= 1.0 - eps);
            REQUIRE(x.real() <= 1.0 + eps);
        }

    SECTION("zero spread gives unit branch gains")
    {
        Rng r(5);
        const HardwareProfile q = sample_hardware_profile(c, 0.0, r);
        for (const auto &x : q.t2)
            REQUIRE(x == cx(1.0, 0.0));
    }
    SECTION("same seed, same profile")
    {
        Rng a(11), b(11);
        const HardwareProfile x = sample_hardware_profile(c, 0.1, a);
        const HardwareProfile y = sample_hardware_profile(c, 0.1, b);
        REQUIRE(arma::all(x.t1 == y.t1));
        REQUIRE(arma::all(x.r1 == y.r1));
        REQUIRE(arma::all(x.t2 == y.t2));
        REQUIRE(arma::all(x.r2 == y.r2));
    }
    SECTION("branch phase jitter is opt-in")
    {
        Rng r(5);
        const HardwareProfile q = sample_hardware_profile(c, 0.1, r, 0.2);
        bool any_phase = false;
        for (const auto &x : q.t2)
        {
            REQUIRE(std::abs(std::arg(x)) <= 0.2);
            any_phase = any_phase || x.imag() != 0.0;
        }
        REQUIRE(any_phase);
    }
}

TEST_CASE("merged responses, hand-expanded 4x2 case")
{
    HybridArrayConfig c;
    c.n_ant = 4;
    c.n_rf = 2;
    const cx ea = std::polar(1.0, 0.3), eb = std::polar(1.0, -1.2);
    HardwareProfile p;
    p.t1 = {ea, eb};
    p.t2 = {cx(1.1), cx(0.9), cx(1.05), cx(0.95)};
    p.r1 = {eb, ea};
    p.r2 = {cx(0.8), cx(1.2), cx(1.0), cx(1.01)};

    const arma::cx_vec t = merged_tx_response(p, c);
    REQUIRE(t(0) == 1.1 * ea);
    REQUIRE(t(1) == 0.9 * ea);
    REQUIRE(t(2) == 1.05 * eb);
    REQUIRE(t(3) == 0.95 * eb);

    const arma::cx_vec r = merged_rx_response(p, c);
    REQUIRE(r(0) == 0.8 * eb);
    REQUIRE(r(1) == 1.2 * eb);
    REQUIRE(r(2) == 1.0 * ea);
    REQUIRE(r(3) == 1.01 * ea);
}

TEST_CASE("merged responses, trivial cases")
{
    HybridArrayConfig c;
    c.n_ant = 8;
    c.n_rf = 2;
    HardwareProfile ones{arma::cx_vec(2, arma::fill::ones), arma::cx_vec(2, arma::fill::ones),
                         arma::cx_vec(8, arma::fill::ones), arma::cx_vec(8, arma::fill::ones)};
    REQUIRE(arma::all(merged_tx_response(ones, c) == cx(1.0)));
    REQUIRE(arma::all(merged_rx_response(ones, c) == cx(1.0)));
    REQUIRE(arma::all(true_calibration(ones, c).f == cx(1.0)));

    c.n_rf = 8; // one antenna per chain: plain elementwise product
    Rng rng(4);
    const HardwareProfile p = sample_hardware_profile(c, 0.1, rng);
    REQUIRE(arma::approx_equal(merged_tx_response(p, c), arma::cx_vec(p.t2 % p.t1), "absdiff", 0.0));
}

TEST_CASE("merged responses match the dense Kronecker product")
{
    Rng rng(21);
    for (auto [n_ant, n_rf] : {std::pair<arma::uword, arma::uword>{64, 8}, {16, 4}, {12, 3}, {6, 6}, {5, 1}})
    {
        HybridArrayConfig c;
        c.n_ant = n_ant;
        c.n_rf = n_rf;
        for (int trial = 0; trial < 10; ++trial)
        {
            const HardwareProfile p = sample_hardware_profile(c, 0.2, rng, 0.1);
            const arma::cx_mat t_dense = testing::dense_tx(p, n_ant, n_rf);
            const arma::cx_mat r_dense = testing::dense_rx(p, n_ant, n_rf);
            REQUIRE(arma::norm(t_dense - arma::diagmat(merged_tx_response(p, c)), "fro") <= 1e-12);
            REQUIRE(arma::norm(r_dense - arma::diagmat(merged_rx_response(p, c)), "fro") <= 1e-12);
        }
    }
}

TEST_CASE("RF-chain response commutes with a block-diagonal analog precoder")
{
    Rng rng(8);
    const arma::uword n_ant = 16, n_rf = 4, per = n_ant / n_rf;
    for (int trial = 0; trial < 20; ++trial)
    {
        arma::cx_mat v(n_ant, n_rf, arma::fill::zeros);
        for (arma::uword m = 0; m < n_ant; ++m)
            v(m, m / per) = std::polar(1.0, rng.phase());
        arma::cx_vec t1(n_rf);
        for (auto &x : t1)
            x = std::polar(1.0, rng.phase());
        const arma::cx_mat lhs = v * arma::diagmat(t1);
        const arma::cx_mat rhs = arma::kron(arma::cx_mat(arma::diagmat(t1)), arma::eye<arma::cx_mat>(per, per)) * v;
        REQUIRE(arma::norm(lhs - rhs, "fro") <= 1e-14);
    }
}

TEST_CASE("true calibration")
{
    REQUIRE(arma::approx_equal(calibration_from_responses({cx(2, 0), cx(0, 2)}, {cx(1, 0), cx(0, 1)}).f,
                               arma::cx_vec{cx(2, 0), cx(2, 0)}, "absdiff", 1e-15));
    REQUIRE_THROWS_AS(calibration_from_responses({cx(1), cx(1)}, {cx(1), cx(0)}), singular_hardware);

    HybridArrayConfig c;
    Rng rng(12);
    const HardwareProfile p = sample_hardware_profile(c, 0.1, rng);
    const arma::cx_vec f = true_calibration(p, c).f;
    REQUIRE(arma::approx_equal(f, arma::cx_vec(merged_tx_response(p, c) / merged_rx_response(p, c)), "absdiff", 0.0));

    SECTION("reciprocity identity of the ground truth for any symmetric channel")
    {
        const Partition part = make_partition(c, PartitionScheme::two_sides());
        const arma::cx_mat t = arma::diagmat(merged_tx_response(p, c));
        const arma::cx_mat r = arma::diagmat(merged_rx_response(p, c));
        const arma::cx_mat cc = testing::random_symmetric(64, rng);
        const auto &a = part.group_a;
        const auto &b = part.group_b;
        const arma::cx_mat h_ab = testing::sub(r, b, b) * testing::sub(cc, b, a) * testing::sub(t, a, a);
        const arma::cx_mat h_ba = testing::sub(r, a, a) * testing::sub(cc, a, b) * testing::sub(t, b, b);
        const arma::cx_mat fa = arma::diagmat(f.elem(arma::uvec(a)));
        const arma::cx_mat fb = arma::diagmat(f.elem(arma::uvec(b)));
        REQUIRE(testing::rel_err(arma::inv(fb).st() * h_ba.st() * fa, h_ab) <= 1e-12);
    }
}

TEST_CASE("fully connected configs are refused by the subarray merge")
{
    HybridArrayConfig c;
    c.architecture = Architecture::FullyConnected;
    c.n_ant = 8;
    c.n_rf = 2;
    Rng rng(1);
    const HardwareProfile p = sample_hardware_profile(c, 0.1, rng);
    REQUIRE_THROWS_AS(merged_tx_response(p, c), unsupported_architecture);
    REQUIRE_THROWS_AS(merged_rx_response(p, c), unsupported_architecture);
    REQUIRE(true_calibration(p, c).size() == 16);
}

TEST_CASE("partitions")
{
    HybridArrayConfig c;

    const Partition two = make_partition(c, PartitionScheme::two_sides());
    REQUIRE(two.group_a.size() == 32);
    REQUIRE(two.group_a.front() == 0);
    REQUIRE(two.group_a.back() == 31);
    REQUIRE(two.group_b.front() == 32);

    const Partition il = make_partition(c, PartitionScheme::interleaved(8));
    const std::vector<arma::uword> expect_a = [] {
        std::vector<arma::uword> v;
        for (arma::uword s : {0u, 16u, 32u, 48u})
            for (arma::uword m = 0; m < 8; ++m)
                v.push_back(s + m);
        return v;
    }();
    REQUIRE(il.group_a == expect_a);
    REQUIRE(il.group_b.front() == 8);

    HybridArrayConfig small;
    small.n_ant = 4;
    small.n_rf = 4;
    const Partition alt = make_partition(small, PartitionScheme::interleaved(1));
    REQUIRE(alt.group_a == std::vector<arma::uword>{0, 2});
    REQUIRE(alt.group_b == std::vector<arma::uword>{1, 3});

    HybridArrayConfig odd;
    odd.n_ant = 5;
    odd.n_rf = 1;
    REQUIRE_THROWS_AS(make_partition(odd, PartitionScheme::two_sides()), unsupported_partition);
    REQUIRE_THROWS_AS(make_partition(c, PartitionScheme::interleaved(5)), unsupported_partition);

    SECTION("groups are disjoint, exhaustive and equal sized")
    {
        for (arma::uword block : {1u, 2u, 4u, 8u, 16u, 32u})
        {
            const Partition p = make_partition(c, PartitionScheme::interleaved(block));
            REQUIRE(p.group_a.size() == 32);
            REQUIRE(p.group_b.size() == 32);
            std::vector<int> seen(64, 0);
            for (auto m : p.group_a)
                ++seen[m];
            for (auto m : p.group_b)
                ++seen[m];
            for (int s : seen)
                REQUIRE(s == 1);
        }
    }
}

TEST_CASE("group layouts follow RF-chain boundaries")
{
    HybridArrayConfig c;
    const Partition il = make_partition(c, PartitionScheme::interleaved(8));
    const ChainLayout la = group_layout(c, il.group_a);
    REQUIRE(la.n_chains == 4);
    REQUIRE(la.chain_of[0] == 0);
    REQUIRE(la.chain_of[8] == 1);

    // block 4 splits every 8-antenna chain across the two groups
    const Partition split = make_partition(c, PartitionScheme::interleaved(4));
    REQUIRE_THROWS_AS(group_layout(c, split.group_a), unsupported_partition);
}
