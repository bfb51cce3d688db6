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

#include "recipcal/channel_model.hpp"

#include "recipcal/errors.hpp"

#include <cmath>
#include <numbers>

namespace recipcal
{
    void IntraArrayChannelParams::validate() const
    {
        if (!(multipath_variance >= 0.0))
            throw invalid_parameter("channel.multipath_variance must be non-negative");
        if (!(decay_db_per_half_lambda >= 0.0))
            throw invalid_parameter("channel.decay_db_per_half_lambda must be non-negative");
        if (!std::isfinite(mag_at_half_lambda_db))
            throw invalid_parameter("channel.mag_at_half_lambda_db must be finite");
    }

    double near_field_magnitude(const IntraArrayChannelParams &params, double d)
    {
        const double db = params.mag_at_half_lambda_db - params.decay_db_per_half_lambda * (d - 1.0);
        return std::pow(10.0, db / 20.0);
    }

    ChannelMatrix intra_array_channel(const HybridArrayConfig &config, const IntraArrayChannelParams &params, Rng &rng)
    {
        config.validate();
        params.validate();

        const arma::uword n = config.n_ant;
        ChannelMatrix c;
        c.entries.zeros(n, n);
        c.reciprocal = true;

        for (arma::uword i = 0; i < n; ++i)
            for (arma::uword j = i + 1; j < n; ++j)
            {
                const double d = double(j - i) * config.element_spacing;
                const double phi = rng.uniform(0.0, 1.0); // in cycles
                const auto near = std::polar(near_field_magnitude(params, d), 2.0 * std::numbers::pi * phi);
                const auto multipath = params.multipath_variance > 0.0 ? rng.complex_normal(params.multipath_variance)
                                                                       : std::complex<double>(0.0);
                c.entries(i, j) = near + multipath;
                c.entries(j, i) = c.entries(i, j);
            }
        return c;
    }

    arma::cx_vec rayleigh_channel(arma::uword n, Rng &rng)
    {
        if (n == 0)
            throw invalid_parameter("rayleigh_channel: n must be positive");
        arma::cx_vec h(n);
        for (arma::uword m = 0; m < n; ++m)
            h(m) = rng.complex_normal(1.0);
        return h;
    }
}
