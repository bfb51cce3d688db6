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

#ifndef recipcal_experiment_H
#define recipcal_experiment_H

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "recipcal/dl_csit.hpp"
#include "recipcal/reciprocity_calibration.hpp"
#include "recipcal/scenario_config.hpp"

namespace recipcal
{
    enum class NoiseMode
    {
        Both,
        TxOnly,
        RxOnly,
        None
    };

    std::string to_string(NoiseMode m); // "both", "tx_only", "rx_only", "none"
    NoiseBudget with_mode(NoiseBudget noise, NoiseMode m);

    // Hardware and channel of one trial. Trial t of a given seed is the same in every subcommand.
    struct TrialRealization
    {
        HardwareProfile profile;
        ChannelMatrix channel;
        CalibrationMatrix truth;
    };

    std::uint64_t trial_seed(const ScenarioConfig &cfg, arma::uword trial);
    TrialRealization draw_realization(const ScenarioConfig &cfg, arma::uword trial);

    // Weights for Kmax x Lmax and the full measurement set of one trial; smaller (K, L) use subset()
    BidirectionalMeasurements trial_measurements(const ScenarioConfig &cfg,
                                                 const TrialRealization &real,
                                                 const PartitionScheme &scheme,
                                                 const NoiseBudget &noise,
                                                 arma::uword trial,
                                                 arma::uword k_max,
                                                 arma::uword l_max);

    struct SingleRunResult
    {
        CalibrationSolution solution;
        CalibrationMatrix truth;
        CalibrationMatrix aligned;  // solution.f scaled onto truth
        double nmse_f = 0.0;
        double max_abs_deviation = 0.0;
        Partition partition;
    };

    // Calibration from measurements: LS estimates, Q matrix, eigen-solution, alignment to the truth
    SingleRunResult calibrate_measurements(const BidirectionalMeasurements &meas,
                                           const CalibrationMatrix &truth,
                                           const LsOptions &options = {});

    // One internal calibration run of trial 0 with the given scheme and noise. A supplied channel
    // replaces the simulated one.
    SingleRunResult run_single(const ScenarioConfig &cfg,
                               const PartitionScheme &scheme,
                               const NoiseBudget &noise,
                               arma::uword K,
                               arma::uword L,
                               const std::optional<ChannelMatrix> &channel = std::nullopt,
                               const LsOptions &options = {});

    // Noiseless two-sides run at (single.k, single.l); CSV index,true_re,true_im,est_re,est_im
    SingleRunResult run_fig6(const ScenarioConfig &cfg, std::ostream &os);

    struct SweepRecord
    {
        PartitionScheme::Kind scheme = PartitionScheme::Kind::TwoSides;
        NoiseMode noise = NoiseMode::Both;
        arma::uword K = 0;
        arma::uword L = 0;
        arma::uword trial = 0;
        double nmse_f = 0.0;
        bool diverged = false; // LS rank condition failed
    };

    // All (scheme, noise mode, K, L, trial) combinations, in that order. Every scheme and noise mode
    // of a trial sees the same hardware, channel, weights and noise streams.
    std::vector<SweepRecord> run_sweep(const ScenarioConfig &cfg,
                                       const std::vector<PartitionScheme::Kind> &schemes,
                                       const std::vector<NoiseMode> &modes,
                                       unsigned threads);

    // Schemes a sweep covers: both unless partition.scheme was set explicitly
    std::vector<PartitionScheme::Kind> sweep_schemes(const ScenarioConfig &cfg);

    // CSV scheme,K,L,trial,nmse_f with the configured noise; "diverged" in nmse_f for failed cells
    std::vector<SweepRecord> run_fig7(const ScenarioConfig &cfg, std::ostream &os, unsigned threads);

    // CSV scheme,noise_mode,K,L,trial,nmse_f with tx-only and rx-only noise
    std::vector<SweepRecord> run_fig8(const ScenarioConfig &cfg, std::ostream &os, unsigned threads);

    // Median over trials of one (scheme, mode, K, L) cell; diverged trials count as +inf
    double cell_median(const std::vector<SweepRecord> &records,
                       PartitionScheme::Kind scheme,
                       NoiseMode mode,
                       arma::uword K,
                       arma::uword L);

    // CSV nmse_f,nmse_ul,nmse_dl_closed,nmse_dl_mc,trials,seed over the dl grids
    std::vector<CsitSweepRow> run_fig9(const ScenarioConfig &cfg, std::ostream &os, unsigned threads);

    struct DlPointResult
    {
        CsitSweepRow row;
        double nmse_dl_conditional_closed = 0.0; // for the realized Delta F of the conditional run
        double nmse_dl_conditional_mc = 0.0;
    };

    // Single (dl.point_nmse_f, dl.point_nmse_ul) cell, same CSV schema as fig9
    DlPointResult run_dl_nmse(const ScenarioConfig &cfg, std::ostream &os);

    struct FullyConnectedCheckResult
    {
        bool internal_refused = false;      // partition-based calibration raised unsupported_architecture
        double composite_reciprocity_error = 0.0;
        double nmse_f_bs = 0.0;             // BS branches after scalar alignment
        CalibrationSolution solution;
    };

    // Reference-UE calibration of the fc.* base station; CSV of the BS branch coefficients
    FullyConnectedCheckResult run_fully_connected_check(const ScenarioConfig &cfg, std::ostream &os);

    // Internal calibration with the configured partition and noise at (single.k, single.l), optionally
    // over a channel read from CSV; writes the calibration CSV
    SingleRunResult run_calibrate(const ScenarioConfig &cfg,
                                  std::ostream &os,
                                  const std::optional<ChannelMatrix> &channel = std::nullopt);
}

#endif
