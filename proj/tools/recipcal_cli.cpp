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

// Command-line front end. Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O.

#include "CLI11.hpp"

#include "recipcal/csv_io.hpp"
#include "recipcal/errors.hpp"
#include "recipcal/experiment.hpp"
#include "recipcal/parallel.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace
{
    using namespace recipcal;

    constexpr int exit_config = 2;
    constexpr int exit_numerical = 3;
    constexpr int exit_io = 4;

    struct io_failure : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    struct Options
    {
        std::string config_path;
        std::optional<std::uint64_t> seed;
        std::optional<std::string> out;
        std::optional<arma::uword> trials;
        std::optional<std::string> partition;
        std::optional<std::string> noise;
        std::vector<std::string> sets; // --set key=value
        std::string channel_csv;
    };

    ScenarioConfig build_config(const Options &o)
    {
        ScenarioConfig cfg;
        if (!o.config_path.empty())
        {
            std::ifstream in(o.config_path);
            if (!in)
                throw io_failure("cannot open config file '" + o.config_path + "'");
            load_config(cfg, in, o.config_path);
        }
        for (const auto &s : o.sets)
        {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw invalid_parameter("--set expects key=value, got '" + s + "'");
            apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
        if (o.seed)
            cfg.seed = *o.seed;
        if (o.trials)
            apply_setting(cfg, "run.trials", std::to_string(*o.trials));
        if (o.partition)
            apply_setting(cfg, "partition.scheme", *o.partition);
        if (o.noise)
            apply_setting(cfg, "noise.mode", *o.noise);
        if (o.out)
            cfg.output_path = *o.out;
        cfg.validate();
        return cfg;
    }

    // Runs fn with the CSV stream (file or stdout). The file is written only after fn succeeds.
    template <typename Fn>
    void with_output(const ScenarioConfig &cfg, Fn &&fn)
    {
        std::ostringstream buf;
        fn(buf);
        if (cfg.output_path.empty() || cfg.output_path == "-")
        {
            std::cout << buf.str();
            std::cout.flush();
            return;
        }
        std::ofstream f(cfg.output_path, std::ios::binary);
        if (!f)
            throw io_failure("cannot open output file '" + cfg.output_path + "'");
        f << buf.str();
        if (!f)
            throw io_failure("write failed for '" + cfg.output_path + "'");
    }

    std::ostream &report()
    {
        return std::cerr;
    }

    int run_command(const std::string &cmd, const Options &o)
    {
        const ScenarioConfig cfg = build_config(o);
        const unsigned threads = worker_count();

        if (cmd == "calibrate")
        {
            std::optional<ChannelMatrix> channel;
            if (!o.channel_csv.empty())
            {
                std::ifstream in(o.channel_csv);
                if (!in)
                    throw io_failure("cannot open channel file '" + o.channel_csv + "'");
                channel = read_channel_csv(in, o.channel_csv);
            }
            SingleRunResult r;
            with_output(cfg, [&](std::ostream &os) { r = run_calibrate(cfg, os, channel); });
            report() << "residual J    = " << format_double(r.solution.eigenvalue) << "\n"
                     << "eigen gap     = " << format_double(r.solution.eigen_gap) << "\n"
                     << "NMSE_F        = " << format_double(r.nmse_f) << "\n";
            if (r.solution.degenerate)
            {
                report() << "error: calibration solution is degenerate (eigen gap below threshold)\n";
                return exit_numerical;
            }
            return 0;
        }
        if (cmd == "fig6")
        {
            SingleRunResult r;
            with_output(cfg, [&](std::ostream &os) { r = run_fig6(cfg, os); });
            report() << "K=" << cfg.single_k << " L=" << cfg.single_l << " NMSE_F=" << format_double(r.nmse_f)
                     << " max|f_est - f|=" << format_double(r.max_abs_deviation) << "\n";
            return r.solution.degenerate ? exit_numerical : 0;
        }
        if (cmd == "fig7")
        {
            with_output(cfg, [&](std::ostream &os) { run_fig7(cfg, os, threads); });
            return 0;
        }
        if (cmd == "fig8")
        {
            with_output(cfg, [&](std::ostream &os) { run_fig8(cfg, os, threads); });
            return 0;
        }
        if (cmd == "fig9")
        {
            with_output(cfg, [&](std::ostream &os) { run_fig9(cfg, os, threads); });
            return 0;
        }
        if (cmd == "dl-nmse")
        {
            DlPointResult r;
            with_output(cfg, [&](std::ostream &os) { r = run_dl_nmse(cfg, os); });
            report() << "NMSE_DL closed form (expected)    = " << format_double(r.row.nmse_dl_closed) << "\n"
                     << "NMSE_DL Monte Carlo               = " << format_double(r.row.nmse_dl_mc) << "\n"
                     << "NMSE_DL conditional closed form   = " << format_double(r.nmse_dl_conditional_closed) << "\n"
                     << "NMSE_DL conditional Monte Carlo   = " << format_double(r.nmse_dl_conditional_mc) << "\n";
            return 0;
        }
        if (cmd == "fully-connected-check")
        {
            FullyConnectedCheckResult r;
            with_output(cfg, [&](std::ostream &os) { r = run_fully_connected_check(cfg, os); });
            report() << "internal calibration refused   = " << (r.internal_refused ? "yes" : "no") << "\n"
                     << "composite reciprocity error    = " << format_double(r.composite_reciprocity_error) << "\n"
                     << "BS NMSE_F (reference UE)       = " << format_double(r.nmse_f_bs) << "\n";
            if (!r.internal_refused)
                return exit_numerical;
            return r.solution.degenerate ? exit_numerical : 0;
        }
        throw invalid_parameter("unknown subcommand '" + cmd + "'");
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"recipcal: TDD reciprocity calibration simulator for hybrid beamforming arrays"};
    app.require_subcommand(1, 1);

    Options o;
    auto add_common = [&](CLI::App *sub)
    {
        sub->add_option("--config", o.config_path, "Scenario file (key = value, [section] headers)");
        sub->add_option("--seed", o.seed, "Random seed");
        sub->add_option("--out", o.out, "Output CSV path (default: standard output)");
        sub->add_option("--trials", o.trials, "Trials per sweep cell");
        sub->add_option("--partition", o.partition, "two-sides or interleaved");
        sub->add_option("--noise", o.noise, "both, tx, rx or none");
        sub->add_option("--set", o.sets, "Override any setting, key=value (repeatable)");
    };

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"calibrate", "One internal calibration run; writes the calibration vector"},
        {"fig6", "Noiseless estimated vs true calibration coefficients"},
        {"fig7", "NMSE_F over the K x L sweep for both partition schemes"},
        {"fig8", "NMSE_F sweep with transmit-only and receive-only noise"},
        {"fig9", "DL CSIT NMSE over the (NMSE_F, NMSE_UL) grid"},
        {"dl-nmse", "DL CSIT NMSE at a single (NMSE_F, NMSE_UL) point"},
        {"fully-connected-check", "Fully connected base station: reciprocity checks and reference-UE calibration"}};

    for (const auto &[name, help] : commands)
    {
        CLI::App *sub = app.add_subcommand(name, help);
        add_common(sub);
        if (name == "calibrate")
            sub->add_option("--channel", o.channel_csv, "Channel realization CSV (row,col,re,im)");
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try
    {
        return run_command(cmd, o);
    }
    catch (const io_failure &e)
    {
        std::cerr << "I/O error: " << e.what() << "\n";
        return exit_io;
    }
    catch (const parse_error &e)
    {
        std::cerr << "parse error: " << e.what() << "\n";
        // config files are configuration; any other malformed input file is an I/O failure
        return (!o.config_path.empty() && std::string(e.what()).rfind(o.config_path + ":", 0) == 0) ? exit_config : exit_io;
    }
    catch (const underdetermined_system &e)
    {
        std::cerr << "numerical error: " << e.what() << "\n";
        return exit_numerical;
    }
    catch (const singular_hardware &e)
    {
        std::cerr << "numerical error: " << e.what() << "\n";
        return exit_numerical;
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
}
