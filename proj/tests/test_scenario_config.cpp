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

#include "recipcal/errors.hpp"
#include "recipcal/scenario_config.hpp"

#include <sstream>

using namespace recipcal;
using Catch::Matchers::ContainsSubstring;

namespace
{
    std::size_t load_error_line(const std::string &text)
    {
        ScenarioConfig c;
        std::istringstream is(text);
        try
        {
            load_config(c, is, "cfg");
        }
        catch (const parse_error &e)
        {
            return e.line();
        }
        return 0;
    }
}

TEST_CASE("defaults")
{
    const ScenarioConfig c;
    REQUIRE(c.array.n_ant == 64);
    REQUIRE(c.array.n_rf == 8);
    REQUIRE(c.sweep_k.front() == 24);
    REQUIRE(c.sweep_k.back() == 40);
    REQUIRE(c.sweep_l.size() == 9);
    REQUIRE(c.noise.tx_snr_db() == Catch::Approx(40.0));
    REQUIRE(c.noise.rx_noise_floor_dbm == -97.0);
    REQUIRE(c.trials == 50);
    REQUIRE_NOTHROW(c.validate());
}

TEST_CASE("config file grammar")
{
    ScenarioConfig c;
    std::istringstream is(
        "# comment line\n"
        "run.seed = 42   # trailing comment\n"
        "\n"
        "[array]\n"
        "n_ant = 32\n"
        "n_rf=4\n"
        "[sweep]\n"
        "k = 20:30:5\n"
        "l = 2, 4 ,8\n"
        "[noise]\n"
        "mode = rx\n"
        "[partition]\n"
        "scheme = interleaved\n"
        "block = 4\n");
    load_config(c, is, "cfg");
    REQUIRE(c.seed == 42);
    REQUIRE(c.array.n_ant == 32);
    REQUIRE(c.array.n_rf == 4);
    REQUIRE(c.sweep_k == std::vector<arma::uword>{20, 25, 30});
    REQUIRE(c.sweep_l == std::vector<arma::uword>{2, 4, 8});
    REQUIRE_FALSE(c.noise.enable_tx);
    REQUIRE(c.noise.enable_rx);
    REQUIRE(c.partition_set);
    REQUIRE(c.partition_kind == PartitionScheme::Kind::Interleaved);
    REQUIRE(c.interleave_block == 4);
    REQUIRE_NOTHROW(c.validate());
}

TEST_CASE("config errors carry the line number")
{
    REQUIRE(load_error_line("run.seed = 1\nbogus.key = 3\n") == 2);
    REQUIRE(load_error_line("\n\nrun.trials = many\n") == 3);
    REQUIRE(load_error_line("[array\n") == 1);
    REQUIRE(load_error_line("run.seed 3\n") == 1);
    REQUIRE(load_error_line(" = 3\n") == 1);
    REQUIRE(load_error_line("[noise]\nmode = loud\n") == 2);
    REQUIRE(load_error_line("[sweep]\nk = 30:20\n") == 2);
}

TEST_CASE("settings")
{
    ScenarioConfig c;
    apply_setting(c, "array.architecture", "fully-connected");
    REQUIRE(c.array.architecture == Architecture::FullyConnected);
    apply_setting(c, "noise.enable_tx", "false");
    REQUIRE_FALSE(c.noise.enable_tx);
    apply_setting(c, "dl.nmse_f", "1e-3,1e-2");
    REQUIRE(c.dl_nmse_f == std::vector<double>{1e-3, 1e-2});
    apply_setting(c, "noise.mode", "none");
    REQUIRE_FALSE(c.noise.enable_tx);
    REQUIRE_FALSE(c.noise.enable_rx);
    apply_setting(c, "noise.mode", "both");
    REQUIRE(c.noise.enable_tx);
    REQUIRE(c.noise.enable_rx);

    REQUIRE_THROWS_WITH(apply_setting(c, "array.nant", "3"), ContainsSubstring("unknown setting 'array.nant'"));
    REQUIRE_THROWS_WITH(apply_setting(c, "run.trials", "-1"), ContainsSubstring("run.trials"));
    REQUIRE_THROWS_WITH(apply_setting(c, "hardware.amp_imbalance_std", "nan"), ContainsSubstring("hardware.amp_imbalance_std"));
    REQUIRE_THROWS_AS(apply_setting(c, "noise.enable_rx", "maybe"), invalid_parameter);
    REQUIRE_THROWS_AS(apply_setting(c, "partition.scheme", "random"), invalid_parameter);
}

TEST_CASE("later settings override earlier ones")
{
    ScenarioConfig c;
    std::istringstream is("run.seed = 5\nrun.seed = 6\n");
    load_config(c, is, "cfg");
    REQUIRE(c.seed == 6);
    apply_setting(c, "run.seed", "7");
    REQUIRE(c.seed == 7);
}

TEST_CASE("validation names the offending key")
{
    auto check = [](const std::string &key, const std::string &value, const std::string &needle)
    {
        ScenarioConfig c;
        apply_setting(c, key, value);
        REQUIRE_THROWS_WITH(c.validate(), ContainsSubstring(needle));
    };
    check("array.n_rf", "7", "array.n_rf");
    check("run.trials", "0", "run.trials");
    check("single.l", "0", "single.l");
    check("partition.block", "0", "partition.block");
    check("noise.tx_evm_db", "3", "noise.tx_evm_db");
    check("dl.trials", "0", "dl.trials");
    check("fc.k", "0", "fc.k");
    check("hardware.branch_phase_jitter", "-0.1", "hardware.branch_phase_jitter");
}

TEST_CASE("describe round-trips through apply_setting")
{
    ScenarioConfig a;
    apply_setting(a, "sweep.k", "30,33,40");
    apply_setting(a, "dl.nmse_ul", "0.5");
    apply_setting(a, "run.seed", "99");
    apply_setting(a, "channel.multipath_variance", "0.0003");
    ScenarioConfig b;
    for (const auto &[k, v] : describe(a))
        apply_setting(b, k, v);
    REQUIRE(describe(a) == describe(b));
    for (const auto &[k, v] : describe(a))
        REQUIRE(k != "run.output_path");
}

TEST_CASE("list parsing")
{
    REQUIRE(parse_index_list("3:5") == std::vector<arma::uword>{3, 4, 5});
    REQUIRE(parse_index_list("4:12:4") == std::vector<arma::uword>{4, 8, 12});
    REQUIRE(parse_index_list("7") == std::vector<arma::uword>{7});
    REQUIRE_THROWS_AS(parse_index_list("5,3"), invalid_parameter);
    REQUIRE_THROWS_AS(parse_index_list("3,3"), invalid_parameter);
    REQUIRE_THROWS_AS(parse_index_list("1:4:0"), invalid_parameter);
    REQUIRE_THROWS_AS(parse_index_list("a:b"), invalid_parameter);
    REQUIRE_THROWS_AS(parse_index_list(""), invalid_parameter);
    REQUIRE(parse_real_list("1e-4, 0.5") == std::vector<double>{1e-4, 0.5});
    REQUIRE_THROWS_AS(parse_real_list("1e-4,,2"), invalid_parameter);
}
