// SPDX-License-Identifier: Apache-2.0
//
// mimobc - high-SNR rate analysis of the MIMO broadcast channel
// Copyright (C) 2026 The mimobc authors
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

#ifndef MIMOBC_ERGODIC_ANALYSIS_HPP
#define MIMOBC_ERGODIC_ANALYSIS_HPP

#include "mac_analysis.hpp"
#include "monte_carlo.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace mimobc
{
    inline constexpr double euler_gamma = 0.57721566490153286;

    /// Digamma at a positive integer: psi(n) = -gamma + sum_{j=1}^{n-1} 1/j.
    inline double digamma_int(long n)
    {
        if (n < 1)
            throw DomainError("digamma_int: argument must be a positive integer, got " + std::to_string(n));
        double acc = -euler_gamma;
        for (long j = 1; j < n; ++j)
            acc += 1.0 / static_cast<double>(j);
        return acc;
    }

    namespace detail
    {
        // sum_{l=0}^{count-1} psi(top - l)
        inline double digamma_run(long top, long count)
        {
            if (top - count + 1 < 1)
                throw DomainError("ergodic closed form: digamma argument " + std::to_string(top - count + 1) +
                                  " is not positive (N < r)");
            double acc = 0.0;
            for (long l = 0; l < count; ++l)
                acc += digamma_int(top - l);
            return acc;
        }
    } // namespace detail

    /// E[log2|H^H H|] = (1/ln2) sum_{l=0}^{r-1} psi(N - l) + sum_k log2|C_k|.
    inline double ergodic_dpc_logdet(const SystemProfile &profile, const CorrelationModel &correlation)
    {
        if (!correlation.matches(profile))
            throw ValidationError("ergodic_dpc_logdet: correlation blocks do not match the antenna profile");
        double acc = detail::digamma_run(profile.base_antennas(), profile.total_antennas()) / ln2;
        for (std::size_t k = 0; k < profile.users(); ++k)
            acc += correlation.log2det(k);
        return acc;
    }

    /// E[log2|E_k^T (H^H H)^{-1} E_k|] = -log2|C_k| - (1/ln2) sum_{l=0}^{r_k-1} psi(N - r + r_k - l).
    /// The diagonal block of an inverse Wishart matrix is again inverse Wishart with N - r + r_k degrees of freedom.
    inline double ergodic_block_logdet(const SystemProfile &profile, const CorrelationModel &correlation,
                                       std::size_t k)
    {
        if (!correlation.matches(profile))
            throw ValidationError("ergodic_block_logdet: correlation blocks do not match the antenna profile");
        const long n = profile.base_antennas();
        const long r = profile.total_antennas();
        const long rk = profile.antennas(k);
        return -correlation.log2det(k) - detail::digamma_run(n - r + rk, rk) / ln2;
    }

    /// Ergodic rate loss of linear filtering against DPC for i.i.d. Gaussian channels.
    /// Path losses and receive correlations cancel, so no correlation argument is taken.
    inline double ergodic_rate_loss(const SystemProfile &profile)
    {
        const long n = profile.base_antennas();
        const long r = profile.total_antennas();
        double acc = detail::digamma_run(n, r);
        for (int rk : profile.antennas())
            acc -= detail::digamma_run(n - r + rk, rk);
        return acc / ln2;
    }

    /// Rate loss for K users with rbar antennas each.
    inline double ergodic_rate_loss_equal(int users, int rbar, int base_antennas)
    {
        if (users < 1 || rbar < 1)
            throw DomainError("ergodic_rate_loss_equal: user and antenna counts must be positive");
        const long n = base_antennas;
        const long k = users;
        const long rb = rbar;
        if (n < k * rb)
            throw DomainError("ergodic_rate_loss_equal: N = " + std::to_string(n) + " < K * rbar = " +
                              std::to_string(k * rb));
        double acc = 0.0;
        for (long l = 1; l <= (k - 1) * rb; ++l)
            acc += static_cast<double>(l) / static_cast<double>(n - l);
        for (long l = 1; l <= rb - 1; ++l)
            acc += static_cast<double>((k - 1) * l) / static_cast<double>(n - k * rb + l);
        return acc / ln2;
    }

    /// Rate loss for K single-antenna users: (1/ln2) sum_{l=1}^{K-1} l / (N - l).
    inline double ergodic_rate_loss_single(int users, int base_antennas)
    {
        if (users < 1)
            throw DomainError("ergodic_rate_loss_single: user count must be positive");
        if (base_antennas < users)
            throw DomainError("ergodic_rate_loss_single: N = " + std::to_string(base_antennas) + " < K = " +
                              std::to_string(users));
        double acc = 0.0;
        for (long l = 1; l <= users - 1; ++l)
            acc += static_cast<double>(l) / static_cast<double>(base_antennas - l);
        return acc / ln2;
    }

    /// Horizontal dB shift between two parallel affine rate curves of slope r separated by `rate_loss_bits`.
    inline double power_offset_db(double rate_loss_bits, int total_antennas)
    {
        if (total_antennas < 1)
            throw DomainError("power_offset_db: r must be positive");
        return rate_loss_bits / total_antennas * 10.0 * std::log10(2.0);
    }

    /// Trial count used for a profile: heavy-tailed log moments at N = r get ten times the budget.
    inline std::size_t monte_carlo_trials(const SystemProfile &profile, std::size_t base_trials)
    {
        return profile.base_antennas() == profile.total_antennas() ? base_trials * 10 : base_trials;
    }

    /// Monte Carlo mean of fn(channel) over independent realizations of the channel model.
    template <class Fn>
    MonteCarloEstimate monte_carlo(const SystemProfile &profile, const CorrelationModel &correlation,
                                   std::size_t trials, std::uint64_t seed, Fn &&fn, unsigned threads = 0)
    {
        if (trials < 2)
            throw ValidationError("Monte Carlo needs at least two trials");
        auto batch = sample_trials<double>(profile, correlation, trials, seed, std::forward<Fn>(fn), threads);
        auto est = summarize(batch.results, seed);
        est.discarded = batch.redraws;
        return est;
    }

    inline MonteCarloEstimate monte_carlo_rate_loss(const SystemProfile &profile, const CorrelationModel &correlation,
                                                    std::size_t trials, std::uint64_t seed, unsigned threads = 0)
    {
        return monte_carlo(
            profile, correlation, trials, seed,
            [](const ChannelRealization &ch) { return instantaneous_rate_loss(ch); }, threads);
    }

    // Closed-form values for one antenna/user profile.
    struct ErgodicClosedForm
    {
        double dpc_logdet = 0.0;               // E[log2|H^H H|]
        std::vector<double> block_logdets;     // E[log2|E_k^T (H^H H)^{-1} E_k|]
        double rate_loss = 0.0;                // E[Delta R]
    };

    inline ErgodicClosedForm ergodic_closed_form(const SystemProfile &profile, const CorrelationModel &correlation)
    {
        ErgodicClosedForm out;
        out.dpc_logdet = ergodic_dpc_logdet(profile, correlation);
        for (std::size_t k = 0; k < profile.users(); ++k)
            out.block_logdets.push_back(ergodic_block_logdet(profile, correlation, k));
        out.rate_loss = ergodic_rate_loss(profile);
        return out;
    }

    // Closed-form ergodic rate loss table over N = 2..6 for the standard user profiles.
    struct RateLossCell
    {
        std::vector<int> antennas;
        int base_antennas = 0;
        std::optional<double> value; // empty when N < r
    };

    /// Profiles of the rate loss table: K users with rbar antennas, then two users with (r1, r2) antennas.
    inline std::vector<std::vector<int>> rate_loss_table_profiles()
    {
        return {{1, 1}, {1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1}, {2, 2}, {3, 3}, {2, 2, 2},
                {1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}};
    }

    inline constexpr int rate_loss_table_min_n = 2;
    inline constexpr int rate_loss_table_max_n = 6;

    inline std::string profile_label(const std::vector<int> &antennas)
    {
        std::string s;
        for (std::size_t k = 0; k < antennas.size(); ++k)
            s += (k ? "+" : "") + std::to_string(antennas[k]);
        return s;
    }

    /// Evaluates a cell with the formula the table uses for it: equal-antenna (or single-antenna)
    /// closed form when all users match, general form otherwise.
    inline std::optional<double> rate_loss_cell(const std::vector<int> &antennas, int base_antennas)
    {
        int r = 0;
        for (int a : antennas)
            r += a;
        if (base_antennas < r)
            return std::nullopt;
        const bool equal = std::all_of(antennas.begin(), antennas.end(), [&](int a) { return a == antennas.front(); });
        const int k = static_cast<int>(antennas.size());
        if (equal && antennas.front() == 1)
            return ergodic_rate_loss_single(k, base_antennas);
        if (equal)
            return ergodic_rate_loss_equal(k, antennas.front(), base_antennas);
        return ergodic_rate_loss(SystemProfile(base_antennas, antennas));
    }

    inline std::vector<RateLossCell> reproduce_rate_loss_table()
    {
        std::vector<RateLossCell> cells;
        for (const auto &antennas : rate_loss_table_profiles())
            for (int n = rate_loss_table_min_n; n <= rate_loss_table_max_n; ++n)
                cells.push_back({antennas, n, rate_loss_cell(antennas, n)});
        return cells;
    }

    /// Reference three-decimal values of the table, keyed like reproduce_rate_loss_table().
    inline std::optional<double> tabulated_rate_loss(const std::vector<int> &antennas, int base_antennas)
    {
        struct Row
        {
            std::vector<int> antennas;
            std::array<double, 5> values; // N = 2..6, negative where undefined
        };
        static const std::vector<Row> rows = {
            {{1, 1}, {1.443, 0.721, 0.481, 0.361, 0.289}},
            {{1, 1, 1}, {-1, 3.607, 1.924, 1.322, 1.010}},
            {{1, 1, 1, 1}, {-1, -1, 6.252, 3.487, 2.453}},
            {{1, 1, 1, 1, 1}, {-1, -1, -1, 9.257, 5.338}},
            {{1, 1, 1, 1, 1, 1}, {-1, -1, -1, -1, 12.551}},
            {{2, 2}, {-1, -1, 3.366, 2.044, 1.491}},
            {{3, 3}, {-1, -1, -1, -1, 5.338}},
            {{2, 2, 2}, {-1, -1, -1, -1, 8.223}},
            {{1, 2}, {-1, 2.164, 1.202, 0.842, 0.649}},
            {{1, 3}, {-1, -1, 2.645, 1.563, 1.130}},
            {{1, 4}, {-1, -1, -1, 3.006, 1.851}},
            {{2, 3}, {-1, -1, -1, 4.208, 2.693}},
            {{2, 4}, {-1, -1, -1, -1, 4.857}},
        };
        if (base_antennas < rate_loss_table_min_n || base_antennas > rate_loss_table_max_n)
            return std::nullopt;
        for (const auto &row : rows)
            if (row.antennas == antennas)
            {
                const double v = row.values[static_cast<std::size_t>(base_antennas - rate_loss_table_min_n)];
                return v < 0.0 ? std::nullopt : std::optional<double>(v);
            }
        return std::nullopt;
    }

} // namespace mimobc

#endif
