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

#include "recipcal/experiment.hpp"

#include "recipcal/csv_io.hpp"
#include "recipcal/errors.hpp"
#include "recipcal/fully_connected.hpp"
#include "recipcal/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace recipcal
{
    namespace
    {
        // Sub-stream tags below a trial seed
        constexpr std::uint64_t tag_hardware = 1;
        constexpr std::uint64_t tag_weights = 2;
        constexpr std::uint64_t tag_noise = 3;
        constexpr std::uint64_t tag_dl = 4;
        constexpr std::uint64_t tag_fc = 5;

        std::string scheme_name(PartitionScheme::Kind k)
        {
            return k == PartitionScheme::Kind::TwoSides ? "two-sides" : "interleaved";
        }

        std::vector<std::pair<std::string, std::string>> run_meta(const ScenarioConfig &cfg, const std::string &kind)
        {
            auto meta = describe(cfg);
            meta.insert(meta.begin(), {"kind", kind});
            return meta;
        }

        void require_subarray(const ScenarioConfig &cfg)
        {
            if (cfg.array.architecture != Architecture::Subarray)
                throw unsupported_architecture(
                    "array.architecture: internal calibration is not feasible for a fully connected array "
                    "(use fully-connected-check for reference-UE calibration)");
        }

        double max_abs_diff(const arma::cx_vec &a, const arma::cx_vec &b)
        {
            return a.n_elem == 0 ? 0.0 : arma::max(arma::abs(a - b));
        }
    }

    std::string to_string(NoiseMode m)
    {
        switch (m)
        {
        case NoiseMode::Both:
            return "both";
        case NoiseMode::TxOnly:
            return "tx_only";
        case NoiseMode::RxOnly:
            return "rx_only";
        case NoiseMode::None:
            return "none";
        }
        return "both";
    }

    NoiseBudget with_mode(NoiseBudget noise, NoiseMode m)
    {
        noise.enable_tx = m == NoiseMode::Both || m == NoiseMode::TxOnly;
        noise.enable_rx = m == NoiseMode::Both || m == NoiseMode::RxOnly;
        return noise;
    }

    std::uint64_t trial_seed(const ScenarioConfig &cfg, arma::uword trial)
    {
        return derive_seed(cfg.seed, {trial});
    }

    TrialRealization draw_realization(const ScenarioConfig &cfg, arma::uword trial)
    {
        Rng rng(derive_seed(trial_seed(cfg, trial), {tag_hardware}));
        TrialRealization r;
        r.profile = sample_hardware_profile(cfg.array, cfg.amp_imbalance_std, rng, cfg.branch_phase_jitter);
        r.channel = intra_array_channel(cfg.array, cfg.channel, rng);
        r.truth = true_calibration(r.profile, cfg.array);
        return r;
    }

    BidirectionalMeasurements trial_measurements(const ScenarioConfig &cfg,
                                                 const TrialRealization &real,
                                                 const PartitionScheme &scheme,
                                                 const NoiseBudget &noise,
                                                 arma::uword trial,
                                                 arma::uword k_max,
                                                 arma::uword l_max)
    {
        const Partition partition = make_partition(cfg.array, scheme);
        Rng weight_rng(derive_seed(trial_seed(cfg, trial), {tag_weights}));
        const DirectionalWeights w =
            calibration_weights(cfg.array, partition, k_max, l_max, noise.tx_power_w(), weight_rng);
        Rng noise_rng(derive_seed(trial_seed(cfg, trial), {tag_noise}));
        return measure_bidirectional(real.profile, cfg.array, partition, real.channel, w, noise, noise_rng);
    }

    SingleRunResult calibrate_measurements(const BidirectionalMeasurements &meas,
                                           const CalibrationMatrix &truth,
                                           const LsOptions &options)
    {
        SingleRunResult out;
        out.partition = meas.partition;
        out.truth = truth;
        out.solution = solve_calibration(build_q(estimate_bidirectional(meas, options)));
        out.aligned = align_scalar(out.solution.f, truth);
        out.nmse_f = nmse_f(out.aligned, truth);
        out.max_abs_deviation = max_abs_diff(out.aligned.f, truth.f);
        return out;
    }

    SingleRunResult run_single(const ScenarioConfig &cfg,
                               const PartitionScheme &scheme,
                               const NoiseBudget &noise,
                               arma::uword K,
                               arma::uword L,
                               const std::optional<ChannelMatrix> &channel,
                               const LsOptions &options)
    {
        cfg.validate();
        require_subarray(cfg);
        TrialRealization real = draw_realization(cfg, 0);
        if (channel)
        {
            if (channel->entries.n_rows != cfg.array.n_ant || channel->entries.n_cols != cfg.array.n_ant)
                throw invalid_parameter("channel CSV must be array.n_ant x array.n_ant (" + std::to_string(cfg.array.n_ant) +
                                        "), got " + std::to_string(channel->entries.n_rows) + "x" +
                                        std::to_string(channel->entries.n_cols));
            real.channel = *channel;
        }
        return calibrate_measurements(trial_measurements(cfg, real, scheme, noise, 0, K, L), real.truth, options);
    }

    SingleRunResult run_fig6(const ScenarioConfig &cfg, std::ostream &os)
    {
        const SingleRunResult r = run_single(cfg, PartitionScheme::two_sides(), NoiseBudget::noiseless(),
                                             cfg.single_k, cfg.single_l);
        auto meta = run_meta(cfg, "fig6");
        meta.push_back({"nmse_f", format_double(r.nmse_f)});
        meta.push_back({"max_abs_deviation", format_double(r.max_abs_deviation)});
        meta.push_back({"eigen_gap", format_double(r.solution.eigen_gap)});

        std::vector<std::vector<std::string>> rows;
        for (arma::uword m = 0; m < r.truth.size(); ++m)
            rows.push_back({std::to_string(m), format_double(r.truth.f(m).real()), format_double(r.truth.f(m).imag()),
                            format_double(r.aligned.f(m).real()), format_double(r.aligned.f(m).imag())});
        write_csv(os, meta, {"index", "true_re", "true_im", "est_re", "est_im"}, rows);
        return r;
    }

    std::vector<PartitionScheme::Kind> sweep_schemes(const ScenarioConfig &cfg)
    {
        if (cfg.partition_set)
            return {cfg.partition_kind};
        return {PartitionScheme::Kind::TwoSides, PartitionScheme::Kind::Interleaved};
    }

    std::vector<SweepRecord> run_sweep(const ScenarioConfig &cfg,
                                       const std::vector<PartitionScheme::Kind> &schemes,
                                       const std::vector<NoiseMode> &modes,
                                       unsigned threads)
    {
        cfg.validate();
        require_subarray(cfg);
        for (auto s : schemes)
            make_partition(cfg.array, cfg.scheme(s)); // reject unusable schemes up front

        const arma::uword k_max = *std::max_element(cfg.sweep_k.begin(), cfg.sweep_k.end());
        const arma::uword l_max = *std::max_element(cfg.sweep_l.begin(), cfg.sweep_l.end());
        const std::size_t n_k = cfg.sweep_k.size();
        const std::size_t n_l = cfg.sweep_l.size();
        const std::size_t per_trial = schemes.size() * modes.size() * n_k * n_l;

        // slot (trial, scheme, mode, k, l)
        std::vector<SweepRecord> slots(cfg.trials * per_trial);
        parallel_for(cfg.trials, threads, [&](std::size_t t)
                     {
            const TrialRealization real = draw_realization(cfg, t);
            std::size_t slot = t * per_trial;
            for (auto s : schemes)
                for (auto mode : modes)
                {
                    const BidirectionalMeasurements full =
                        trial_measurements(cfg, real, cfg.scheme(s), with_mode(cfg.noise, mode), t, k_max, l_max);
                    for (auto K : cfg.sweep_k)
                        for (auto L : cfg.sweep_l)
                        {
                            SweepRecord &rec = slots[slot++];
                            rec.scheme = s;
                            rec.noise = mode;
                            rec.K = K;
                            rec.L = L;
                            rec.trial = t;
                            try
                            {
                                rec.nmse_f = calibrate_measurements(full.subset(K, L), real.truth).nmse_f;
                            }
                            catch (const underdetermined_system &)
                            {
                                rec.diverged = true;
                                rec.nmse_f = std::numeric_limits<double>::infinity();
                            }
                        }
                } });

        // reorder to (scheme, mode, K, L, trial)
        std::vector<SweepRecord> out;
        out.reserve(slots.size());
        const std::size_t n_modes = modes.size();
        for (std::size_t s = 0; s < schemes.size(); ++s)
            for (std::size_t m = 0; m < n_modes; ++m)
                for (std::size_t ki = 0; ki < n_k; ++ki)
                    for (std::size_t li = 0; li < n_l; ++li)
                        for (std::size_t t = 0; t < cfg.trials; ++t)
                            out.push_back(slots[t * per_trial + ((s * n_modes + m) * n_k + ki) * n_l + li]);
        return out;
    }

    namespace
    {
        void write_sweep(std::ostream &os,
                         const ScenarioConfig &cfg,
                         const std::string &kind,
                         const std::vector<SweepRecord> &records,
                         bool with_noise_column)
        {
            std::vector<std::string> columns = {"scheme"};
            if (with_noise_column)
                columns.push_back("noise_mode");
            columns.insert(columns.end(), {"K", "L", "trial", "nmse_f"});

            std::vector<std::vector<std::string>> rows;
            rows.reserve(records.size());
            for (const auto &r : records)
            {
                std::vector<std::string> row = {scheme_name(r.scheme)};
                if (with_noise_column)
                    row.push_back(to_string(r.noise));
                row.insert(row.end(), {std::to_string(r.K), std::to_string(r.L), std::to_string(r.trial),
                                       r.diverged ? "diverged" : format_double(r.nmse_f)});
                rows.push_back(std::move(row));
            }
            write_csv(os, run_meta(cfg, kind), columns, rows);
        }
    }

    std::vector<SweepRecord> run_fig7(const ScenarioConfig &cfg, std::ostream &os, unsigned threads)
    {
        NoiseMode mode = cfg.noise.enable_tx ? (cfg.noise.enable_rx ? NoiseMode::Both : NoiseMode::TxOnly)
                                             : (cfg.noise.enable_rx ? NoiseMode::RxOnly : NoiseMode::None);
        auto records = run_sweep(cfg, sweep_schemes(cfg), {mode}, threads);
        write_sweep(os, cfg, "fig7", records, false);
        return records;
    }

    std::vector<SweepRecord> run_fig8(const ScenarioConfig &cfg, std::ostream &os, unsigned threads)
    {
        auto records = run_sweep(cfg, sweep_schemes(cfg), {NoiseMode::TxOnly, NoiseMode::RxOnly}, threads);
        write_sweep(os, cfg, "fig8", records, true);
        return records;
    }

    double cell_median(const std::vector<SweepRecord> &records,
                       PartitionScheme::Kind scheme,
                       NoiseMode mode,
                       arma::uword K,
                       arma::uword L)
    {
        std::vector<double> v;
        for (const auto &r : records)
            if (r.scheme == scheme && r.noise == mode && r.K == K && r.L == L)
                v.push_back(r.diverged ? std::numeric_limits<double>::infinity() : r.nmse_f);
        if (v.empty())
            throw invalid_parameter("cell_median: no records for the requested cell");
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }

    namespace
    {
        CsitScenario dl_scenario(const ScenarioConfig &cfg)
        {
            cfg.validate();
            require_subarray(cfg);
            Rng rng(derive_seed(cfg.seed, {tag_dl}));
            return sample_csit_scenario(cfg.array, cfg.amp_imbalance_std, rng);
        }

        void write_dl_rows(std::ostream &os,
                           std::vector<std::pair<std::string, std::string>> meta,
                           const std::vector<CsitSweepRow> &rows)
        {
            std::vector<std::vector<std::string>> out;
            for (const auto &r : rows)
                out.push_back({format_double(r.nmse_f), format_double(r.nmse_ul), format_double(r.nmse_dl_closed),
                               format_double(r.nmse_dl_mc), std::to_string(r.trials), std::to_string(r.seed)});
            write_csv(os, meta, {"nmse_f", "nmse_ul", "nmse_dl_closed", "nmse_dl_mc", "trials", "seed"}, out);
        }
    }

    std::vector<CsitSweepRow> run_fig9(const ScenarioConfig &cfg, std::ostream &os, unsigned threads)
    {
        const CsitScenario scenario = dl_scenario(cfg);
        const auto rows = csit_sweep(scenario, cfg.dl_nmse_f, cfg.dl_nmse_ul, cfg.dl_trials,
                                     derive_seed(cfg.seed, {tag_dl, 1}), threads);
        write_dl_rows(os, run_meta(cfg, "fig9"), rows);
        return rows;
    }

    DlPointResult run_dl_nmse(const ScenarioConfig &cfg, std::ostream &os)
    {
        const CsitScenario scenario = dl_scenario(cfg);
        DlPointResult out;
        out.row = csit_sweep(scenario, {cfg.dl_point_nmse_f}, {cfg.dl_point_nmse_ul}, cfg.dl_trials,
                             derive_seed(cfg.seed, {tag_dl, 2}), 1)
                      .front();

        const CalibrationMatrix f = scenario.combined_calibration();
        const auto err = CsitErrorModel::from_nmse(cfg.dl_point_nmse_f, cfg.dl_point_nmse_ul, f);
        Rng rng(derive_seed(cfg.seed, {tag_dl, 3}));
        const MonteCarloResult cond = nmse_dl_monte_carlo(scenario, err, cfg.dl_trials, rng, MonteCarloMode::Conditional);
        out.nmse_dl_conditional_mc = cond.nmse_dl;
        out.nmse_dl_conditional_closed =
            nmse_dl_conditional(scenario.ul_covariance(), cond.delta_f, CalibrationMatrix{f.f + cond.delta_f}, err.sigma_ul_sq);

        auto meta = run_meta(cfg, "dl-nmse");
        meta.push_back({"nmse_dl_conditional_closed", format_double(out.nmse_dl_conditional_closed)});
        meta.push_back({"nmse_dl_conditional_mc", format_double(out.nmse_dl_conditional_mc)});
        write_dl_rows(os, meta, {out.row});
        return out;
    }

    FullyConnectedCheckResult run_fully_connected_check(const ScenarioConfig &cfg, std::ostream &os)
    {
        cfg.validate();
        cfg.fc_bs.validate();
        cfg.fc_ue.validate();

        FullyConnectedCheckResult out;
        Rng rng(derive_seed(cfg.seed, {tag_fc}));
        const HardwareProfile bs = sample_hardware_profile(cfg.fc_bs, cfg.amp_imbalance_std, rng, cfg.branch_phase_jitter);
        const HardwareProfile ue = sample_hardware_profile(cfg.fc_ue, cfg.amp_imbalance_std, rng, cfg.branch_phase_jitter);

        // Partition-based internal calibration must be refused for a fully connected array
        try
        {
            ChannelMatrix c_int;
            c_int.entries.zeros(cfg.fc_bs.n_ant, cfg.fc_bs.n_ant);
            Partition p;
            for (arma::uword m = 0; m < cfg.fc_bs.n_ant; ++m)
                (m < cfg.fc_bs.n_ant / 2 ? p.group_a : p.group_b).push_back(m);
            bidirectional_channels(bs, cfg.fc_bs, p, c_int);
        }
        catch (const unsupported_architecture &)
        {
            out.internal_refused = true;
        }

        ChannelMatrix c_dl;
        const arma::cx_vec g = rayleigh_channel(cfg.fc_ue.n_ant * cfg.fc_bs.n_ant, rng);
        c_dl.entries = arma::reshape(g, cfg.fc_ue.n_ant, cfg.fc_bs.n_ant);

        const BranchModel mb = branch_model(bs, cfg.fc_bs);
        const BranchModel mu = branch_model(ue, cfg.fc_ue);
        const arma::cx_mat dl = arma::cx_mat(mu.u_rx, arma::zeros(arma::size(mu.u_rx))) * c_dl.entries *
                                arma::cx_mat(mb.u_tx, arma::zeros(arma::size(mb.u_tx)));
        const arma::cx_mat ul = arma::cx_mat(mb.u_rx, arma::zeros(arma::size(mb.u_rx))) * c_dl.entries.st() *
                                arma::cx_mat(mu.u_tx, arma::zeros(arma::size(mu.u_tx)));
        out.composite_reciprocity_error = arma::abs(ul - dl.st()).max();

        Rng wrng(derive_seed(cfg.seed, {tag_fc, tag_weights}));
        const DirectionalWeights w = reference_weights(cfg.fc_bs, cfg.fc_ue, cfg.fc_k, cfg.fc_l, cfg.noise.tx_power_w(), wrng);
        Rng nrng(derive_seed(cfg.seed, {tag_fc, tag_noise}));
        const ReferenceCalibration rc = calibrate_with_reference(bs, cfg.fc_bs, ue, cfg.fc_ue, c_dl, w, cfg.noise, nrng);
        out.solution = rc.joint;

        const CalibrationMatrix truth = reference_true_calibration(bs, cfg.fc_bs, ue, cfg.fc_ue);
        const arma::uword n_bs = cfg.fc_bs.n_branches();
        const CalibrationMatrix truth_bs{truth.f.head(n_bs)};
        const CalibrationMatrix est_bs = align_scalar(rc.bs, truth_bs);
        out.nmse_f_bs = nmse_f(est_bs, truth_bs);

        auto meta = run_meta(cfg, "fully-connected-check");
        meta.push_back({"internal_refused", out.internal_refused ? "1" : "0"});
        meta.push_back({"composite_reciprocity_error", format_double(out.composite_reciprocity_error)});
        meta.push_back({"nmse_f_bs", format_double(out.nmse_f_bs)});
        meta.push_back({"eigen_gap", format_double(rc.joint.eigen_gap)});
        meta.push_back({"degenerate", rc.joint.degenerate ? "1" : "0"});

        std::vector<std::vector<std::string>> rows;
        for (arma::uword m = 0; m < n_bs; ++m)
            rows.push_back({std::to_string(m), format_double(truth_bs.f(m).real()), format_double(truth_bs.f(m).imag()),
                            format_double(est_bs.f(m).real()), format_double(est_bs.f(m).imag())});
        write_csv(os, meta, {"index", "true_re", "true_im", "est_re", "est_im"}, rows);
        return out;
    }

    SingleRunResult run_calibrate(const ScenarioConfig &cfg, std::ostream &os, const std::optional<ChannelMatrix> &channel)
    {
        const SingleRunResult r = run_single(cfg, cfg.scheme(), cfg.noise, cfg.single_k, cfg.single_l, channel);
        auto extra = run_meta(cfg, "calibrate");
        extra.erase(extra.begin()); // the calibration writer sets its own kind
        extra.push_back({"nmse_f", format_double(r.nmse_f)});
        extra.push_back({"external_channel", channel ? "1" : "0"});
        write_calibration_csv(os, r.solution, extra);
        return r;
    }
}
