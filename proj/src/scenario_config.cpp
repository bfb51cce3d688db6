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

#include "recipcal/scenario_config.hpp"

#include "recipcal/csv_io.hpp"
#include "recipcal/errors.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <map>

namespace recipcal
{
    namespace
    {
        std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos)
                return "";
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        }

        std::vector<std::string> split(const std::string &s, char sep)
        {
            std::vector<std::string> out;
            std::size_t start = 0;
            while (true)
            {
                const auto pos = s.find(sep, start);
                out.push_back(trim(s.substr(start, pos - start)));
                if (pos == std::string::npos)
                    break;
                start = pos + 1;
            }
            return out;
        }

        bool to_u64(const std::string &s, std::uint64_t &out)
        {
            const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
            return !s.empty() && res.ec == std::errc() && res.ptr == s.data() + s.size();
        }

        arma::uword as_index(const std::string &key, const std::string &v)
        {
            std::uint64_t x = 0;
            if (!to_u64(v, x))
                throw invalid_parameter(key + ": expected a non-negative integer, got '" + v + "'");
            return arma::uword(x);
        }

        double as_real(const std::string &key, const std::string &v)
        {
            double x = 0.0;
            if (!parse_double(v, x) || !std::isfinite(x))
                throw invalid_parameter(key + ": expected a finite number, got '" + v + "'");
            return x;
        }

        bool as_bool(const std::string &key, const std::string &v)
        {
            if (v == "true" || v == "1" || v == "yes" || v == "on")
                return true;
            if (v == "false" || v == "0" || v == "no" || v == "off")
                return false;
            throw invalid_parameter(key + ": expected true or false, got '" + v + "'");
        }

        std::string join(const std::vector<arma::uword> &v)
        {
            std::string s;
            for (auto x : v)
                s += (s.empty() ? "" : ",") + std::to_string(x);
            return s;
        }

        std::string join(const std::vector<double> &v)
        {
            std::string s;
            for (auto x : v)
                s += (s.empty() ? "" : ",") + format_double(x);
            return s;
        }

        using Setter = std::function<void(ScenarioConfig &, const std::string &, const std::string &)>;

        const std::map<std::string, Setter> &setters()
        {
            static const std::map<std::string, Setter> table = {
                {"array.n_ant", [](auto &c, auto &k, auto &v) { c.array.n_ant = as_index(k, v); }},
                {"array.n_rf", [](auto &c, auto &k, auto &v) { c.array.n_rf = as_index(k, v); }},
                {"array.architecture", [](auto &c, auto &, auto &v) { c.array.architecture = parse_architecture(v); }},
                {"array.element_spacing", [](auto &c, auto &k, auto &v) { c.array.element_spacing = as_real(k, v); }},
                {"hardware.amp_imbalance_std", [](auto &c, auto &k, auto &v) { c.amp_imbalance_std = as_real(k, v); }},
                {"hardware.branch_phase_jitter", [](auto &c, auto &k, auto &v) { c.branch_phase_jitter = as_real(k, v); }},
                {"channel.mag_at_half_lambda_db", [](auto &c, auto &k, auto &v) { c.channel.mag_at_half_lambda_db = as_real(k, v); }},
                {"channel.decay_db_per_half_lambda", [](auto &c, auto &k, auto &v) { c.channel.decay_db_per_half_lambda = as_real(k, v); }},
                {"channel.multipath_variance", [](auto &c, auto &k, auto &v) { c.channel.multipath_variance = as_real(k, v); }},
                {"noise.tx_evm_db", [](auto &c, auto &k, auto &v) { c.noise.tx_evm_db = as_real(k, v); }},
                {"noise.tx_power_dbm_per_antenna", [](auto &c, auto &k, auto &v) { c.noise.tx_power_dbm_per_antenna = as_real(k, v); }},
                {"noise.rx_noise_floor_dbm", [](auto &c, auto &k, auto &v) { c.noise.rx_noise_floor_dbm = as_real(k, v); }},
                {"noise.enable_tx", [](auto &c, auto &k, auto &v) { c.noise.enable_tx = as_bool(k, v); }},
                {"noise.enable_rx", [](auto &c, auto &k, auto &v) { c.noise.enable_rx = as_bool(k, v); }},
                {"noise.mode", [](auto &c, auto &k, auto &v)
                 {
                     if (v == "both")
                         c.noise.enable_tx = true, c.noise.enable_rx = true;
                     else if (v == "tx")
                         c.noise.enable_tx = true, c.noise.enable_rx = false;
                     else if (v == "rx")
                         c.noise.enable_tx = false, c.noise.enable_rx = true;
                     else if (v == "none")
                         c.noise.enable_tx = false, c.noise.enable_rx = false;
                     else
                         throw invalid_parameter(k + ": expected both, tx, rx or none, got '" + v + "'");
                 }},
                {"partition.scheme", [](auto &c, auto &k, auto &v)
                 {
                     if (v == "two-sides")
                         c.partition_kind = PartitionScheme::Kind::TwoSides;
                     else if (v == "interleaved")
                         c.partition_kind = PartitionScheme::Kind::Interleaved;
                     else
                         throw invalid_parameter(k + ": expected two-sides or interleaved, got '" + v + "'");
                     c.partition_set = true;
                 }},
                {"partition.block", [](auto &c, auto &k, auto &v) { c.interleave_block = as_index(k, v); }},
                {"single.k", [](auto &c, auto &k, auto &v) { c.single_k = as_index(k, v); }},
                {"single.l", [](auto &c, auto &k, auto &v) { c.single_l = as_index(k, v); }},
                {"sweep.k", [](auto &c, auto &k, auto &v)
                 {
                     try { c.sweep_k = parse_index_list(v); }
                     catch (const invalid_parameter &e) { throw invalid_parameter(k + ": " + e.what()); }
                 }},
                {"sweep.l", [](auto &c, auto &k, auto &v)
                 {
                     try { c.sweep_l = parse_index_list(v); }
                     catch (const invalid_parameter &e) { throw invalid_parameter(k + ": " + e.what()); }
                 }},
                {"run.trials", [](auto &c, auto &k, auto &v) { c.trials = as_index(k, v); }},
                {"run.seed", [](auto &c, auto &k, auto &v) { c.seed = as_index(k, v); }},
                {"run.output_path", [](auto &c, auto &, auto &v) { c.output_path = v; }},
                {"dl.nmse_f", [](auto &c, auto &k, auto &v)
                 {
                     try { c.dl_nmse_f = parse_real_list(v); }
                     catch (const invalid_parameter &e) { throw invalid_parameter(k + ": " + e.what()); }
                 }},
                {"dl.nmse_ul", [](auto &c, auto &k, auto &v)
                 {
                     try { c.dl_nmse_ul = parse_real_list(v); }
                     catch (const invalid_parameter &e) { throw invalid_parameter(k + ": " + e.what()); }
                 }},
                {"dl.point_nmse_f", [](auto &c, auto &k, auto &v) { c.dl_point_nmse_f = as_real(k, v); }},
                {"dl.point_nmse_ul", [](auto &c, auto &k, auto &v) { c.dl_point_nmse_ul = as_real(k, v); }},
                {"dl.trials", [](auto &c, auto &k, auto &v) { c.dl_trials = as_index(k, v); }},
                {"fc.bs_n_ant", [](auto &c, auto &k, auto &v) { c.fc_bs.n_ant = as_index(k, v); }},
                {"fc.bs_n_rf", [](auto &c, auto &k, auto &v) { c.fc_bs.n_rf = as_index(k, v); }},
                {"fc.bs_architecture", [](auto &c, auto &, auto &v) { c.fc_bs.architecture = parse_architecture(v); }},
                {"fc.ue_n_ant", [](auto &c, auto &k, auto &v) { c.fc_ue.n_ant = as_index(k, v); }},
                {"fc.ue_n_rf", [](auto &c, auto &k, auto &v) { c.fc_ue.n_rf = as_index(k, v); }},
                {"fc.ue_architecture", [](auto &c, auto &, auto &v) { c.fc_ue.architecture = parse_architecture(v); }},
                {"fc.k", [](auto &c, auto &k, auto &v) { c.fc_k = as_index(k, v); }},
                {"fc.l", [](auto &c, auto &k, auto &v) { c.fc_l = as_index(k, v); }},
            };
            return table;
        }
    }

    ScenarioConfig::ScenarioConfig()
    {
        for (arma::uword k = 24; k <= 40; ++k)
            sweep_k.push_back(k);
        for (arma::uword l = 4; l <= 12; ++l)
            sweep_l.push_back(l);
    }

    PartitionScheme ScenarioConfig::scheme(PartitionScheme::Kind kind) const
    {
        return kind == PartitionScheme::Kind::TwoSides ? PartitionScheme::two_sides()
                                                       : PartitionScheme::interleaved(interleave_block);
    }

    void ScenarioConfig::validate() const
    {
        array.validate();
        if (!(amp_imbalance_std >= 0.0))
            throw invalid_parameter("hardware.amp_imbalance_std must be non-negative");
        amplitude_half_width(amp_imbalance_std);
        if (!(branch_phase_jitter >= 0.0))
            throw invalid_parameter("hardware.branch_phase_jitter must be non-negative");
        channel.validate();
        noise.validate();
        if (interleave_block == 0)
            throw invalid_parameter("partition.block must be positive");
        if (single_k == 0)
            throw invalid_parameter("single.k must be positive");
        if (single_l == 0)
            throw invalid_parameter("single.l must be positive");
        if (sweep_k.empty() || sweep_k.front() == 0)
            throw invalid_parameter("sweep.k must list positive values");
        if (sweep_l.empty() || sweep_l.front() == 0)
            throw invalid_parameter("sweep.l must list positive values");
        if (trials == 0)
            throw invalid_parameter("run.trials must be positive");
        if (dl_nmse_f.empty() || dl_nmse_ul.empty())
            throw invalid_parameter("dl.nmse_f and dl.nmse_ul must not be empty");
        for (double v : dl_nmse_f)
            if (!(v >= 0.0))
                throw invalid_parameter("dl.nmse_f values must be non-negative");
        for (double v : dl_nmse_ul)
            if (!(v >= 0.0))
                throw invalid_parameter("dl.nmse_ul values must be non-negative");
        if (!(dl_point_nmse_f >= 0.0))
            throw invalid_parameter("dl.point_nmse_f must be non-negative");
        if (!(dl_point_nmse_ul >= 0.0))
            throw invalid_parameter("dl.point_nmse_ul must be non-negative");
        if (dl_trials == 0)
            throw invalid_parameter("dl.trials must be positive");
        if (fc_k == 0 || fc_l == 0)
            throw invalid_parameter("fc.k and fc.l must be positive");
    }

    void apply_setting(ScenarioConfig &cfg, const std::string &key, const std::string &value)
    {
        const auto &table = setters();
        const auto it = table.find(key);
        if (it == table.end())
            throw invalid_parameter("unknown setting '" + key + "'");
        it->second(cfg, key, value);
    }

    void load_config(ScenarioConfig &cfg, std::istream &is, const std::string &source)
    {
        std::string line;
        std::string section;
        std::size_t n = 0;
        while (std::getline(is, line))
        {
            ++n;
            const auto hash = line.find('#');
            const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
            if (t.empty())
                continue;
            if (t.front() == '[')
            {
                if (t.back() != ']' || t.size() < 3)
                    throw parse_error(source, n, "malformed section header '" + t + "'");
                section = trim(t.substr(1, t.size() - 2));
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw parse_error(source, n, "expected 'key = value', got '" + t + "'");
            std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key.empty())
                throw parse_error(source, n, "missing key");
            if (!section.empty())
                key = section + "." + key;
            try
            {
                apply_setting(cfg, key, value);
            }
            catch (const invalid_parameter &e)
            {
                throw parse_error(source, n, e.what());
            }
            catch (const std::invalid_argument &e)
            {
                throw parse_error(source, n, e.what());
            }
        }
    }

    std::vector<std::pair<std::string, std::string>> describe(const ScenarioConfig &cfg)
    {
        const bool interleaved = cfg.partition_kind == PartitionScheme::Kind::Interleaved;
        return {
            {"array.n_ant", std::to_string(cfg.array.n_ant)},
            {"array.n_rf", std::to_string(cfg.array.n_rf)},
            {"array.architecture", to_string(cfg.array.architecture)},
            {"array.element_spacing", format_double(cfg.array.element_spacing)},
            {"hardware.amp_imbalance_std", format_double(cfg.amp_imbalance_std)},
            {"hardware.branch_phase_jitter", format_double(cfg.branch_phase_jitter)},
            {"channel.mag_at_half_lambda_db", format_double(cfg.channel.mag_at_half_lambda_db)},
            {"channel.decay_db_per_half_lambda", format_double(cfg.channel.decay_db_per_half_lambda)},
            {"channel.multipath_variance", format_double(cfg.channel.multipath_variance)},
            {"noise.tx_evm_db", format_double(cfg.noise.tx_evm_db)},
            {"noise.tx_power_dbm_per_antenna", format_double(cfg.noise.tx_power_dbm_per_antenna)},
            {"noise.rx_noise_floor_dbm", format_double(cfg.noise.rx_noise_floor_dbm)},
            {"noise.enable_tx", cfg.noise.enable_tx ? "true" : "false"},
            {"noise.enable_rx", cfg.noise.enable_rx ? "true" : "false"},
            {"partition.scheme", interleaved ? "interleaved" : "two-sides"},
            {"partition.block", std::to_string(cfg.interleave_block)},
            {"single.k", std::to_string(cfg.single_k)},
            {"single.l", std::to_string(cfg.single_l)},
            {"sweep.k", join(cfg.sweep_k)},
            {"sweep.l", join(cfg.sweep_l)},
            {"run.trials", std::to_string(cfg.trials)},
            {"run.seed", std::to_string(cfg.seed)},
            {"dl.nmse_f", join(cfg.dl_nmse_f)},
            {"dl.nmse_ul", join(cfg.dl_nmse_ul)},
            {"dl.point_nmse_f", format_double(cfg.dl_point_nmse_f)},
            {"dl.point_nmse_ul", format_double(cfg.dl_point_nmse_ul)},
            {"dl.trials", std::to_string(cfg.dl_trials)},
            {"fc.bs_n_ant", std::to_string(cfg.fc_bs.n_ant)},
            {"fc.bs_n_rf", std::to_string(cfg.fc_bs.n_rf)},
            {"fc.bs_architecture", to_string(cfg.fc_bs.architecture)},
            {"fc.ue_n_ant", std::to_string(cfg.fc_ue.n_ant)},
            {"fc.ue_n_rf", std::to_string(cfg.fc_ue.n_rf)},
            {"fc.ue_architecture", to_string(cfg.fc_ue.architecture)},
            {"fc.k", std::to_string(cfg.fc_k)},
            {"fc.l", std::to_string(cfg.fc_l)},
        };
    }

    std::vector<arma::uword> parse_index_list(const std::string &s)
    {
        std::vector<arma::uword> out;
        const std::string t = trim(s);
        if (t.find(':') != std::string::npos)
        {
            const auto parts = split(t, ':');
            if (parts.size() < 2 || parts.size() > 3)
                throw invalid_parameter("range must be first:last or first:last:step, got '" + t + "'");
            std::uint64_t first = 0, last = 0, step = 1;
            if (!to_u64(parts[0], first) || !to_u64(parts[1], last) || (parts.size() == 3 && !to_u64(parts[2], step)))
                throw invalid_parameter("range bounds must be non-negative integers, got '" + t + "'");
            if (step == 0 || last < first)
                throw invalid_parameter("range must be ascending with a positive step, got '" + t + "'");
            for (std::uint64_t v = first; v <= last; v += step)
                out.push_back(arma::uword(v));
            return out;
        }
        for (const auto &p : split(t, ','))
        {
            std::uint64_t v = 0;
            if (!to_u64(p, v))
                throw invalid_parameter("expected a non-negative integer, got '" + p + "'");
            if (!out.empty() && v <= out.back())
                throw invalid_parameter("list must be strictly ascending");
            out.push_back(arma::uword(v));
        }
        return out;
    }

    std::vector<double> parse_real_list(const std::string &s)
    {
        std::vector<double> out;
        for (const auto &p : split(trim(s), ','))
        {
            double v = 0.0;
            if (!parse_double(p, v) || !std::isfinite(v))
                throw invalid_parameter("expected a finite number, got '" + p + "'");
            out.push_back(v);
        }
        return out;
    }
}
