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

#ifndef MIMOBC_MONTE_CARLO_HPP
#define MIMOBC_MONTE_CARLO_HPP

#include "system_channel.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace mimobc
{
    struct MonteCarloEstimate
    {
        double mean = 0.0;
        double standard_error = 0.0;
        std::size_t trials = 0;
        std::uint64_t seed = 0;
        std::size_t discarded = 0; // redrawn realizations

        // |mean - reference| in units of the standard error
        double z_score(double reference) const
        {
            return standard_error > 0.0 ? std::abs(mean - reference) / standard_error
                                        : (mean == reference ? 0.0 : std::numeric_limits<double>::infinity());
        }
    };

    /// Sample mean and standard error, accumulated in index order.
    inline MonteCarloEstimate summarize(const std::vector<double> &samples, std::uint64_t seed = 0)
    {
        if (samples.size() < 2)
            throw ValidationError("Monte Carlo estimate needs at least two trials");
        MonteCarloEstimate est;
        est.trials = samples.size();
        est.seed = seed;
        double sum = 0.0;
        for (double v : samples)
            sum += v;
        est.mean = sum / static_cast<double>(samples.size());
        double ss = 0.0;
        for (double v : samples)
            ss += (v - est.mean) * (v - est.mean);
        const double var = ss / static_cast<double>(samples.size() - 1);
        est.standard_error = std::sqrt(var / static_cast<double>(samples.size()));
        return est;
    }

    inline unsigned default_thread_count()
    {
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1u : hw;
    }

    /// Evaluates fn(trial) for every trial index and returns the results in trial order.
    /// Results depend only on the trial index, never on the thread count.
    template <class Result, class Fn>
    std::vector<Result> run_trials(std::size_t trials, Fn &&fn, unsigned threads = 0)
    {
        std::vector<Result> out(trials);
        if (threads == 0)
            threads = default_thread_count();
        threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(trials, 1)));
        if (threads <= 1)
        {
            for (std::size_t i = 0; i < trials; ++i)
                out[i] = fn(i);
            return out;
        }

        std::vector<std::exception_ptr> errors(threads);
        {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t)
                pool.emplace_back([&, t] {
                    try
                    {
                        for (std::size_t i = t; i < trials; i += threads)
                            out[i] = fn(i);
                    }
                    catch (...)
                    {
                        errors[t] = std::current_exception();
                    }
                });
        }
        for (auto &e : errors)
            if (e)
                std::rethrow_exception(e);
        return out;
    }


    template <class Result>
    struct TrialBatch
    {
        std::vector<Result> results; // in trial order
        std::size_t redraws = 0;
    };

    /// Runs fn(channel) on `trials` independent realizations of the channel model. Trial i draws
    /// seed (master XOR i); when fn reports a numerically singular realization it is redrawn from a
    /// derived seed. At most 0.1% of the trials (at least one) may be redrawn.
    template <class Result, class Fn>
    TrialBatch<Result> sample_trials(const SystemProfile &profile, const CorrelationModel &correlation,
                                     std::size_t trials, std::uint64_t seed, Fn &&fn, unsigned threads = 0)
    {
        const std::size_t cap = std::max<std::size_t>(1, (trials + 999) / 1000);
        struct Slot
        {
            Result value{};
            std::size_t redraws = 0;
        };
        auto slots = run_trials<Slot>(
            trials,
            [&](std::size_t i) {
                Slot s;
                const std::uint64_t base = trial_seed(seed, i);
                for (;; ++s.redraws)
                {
                    if (s.redraws > cap)
                        throw NumericalRankError("Monte Carlo: too many singular realizations");
                    const std::uint64_t draw = s.redraws == 0 ? base : splitmix64(base + s.redraws);
                    try
                    {
                        s.value = fn(sample_channel(profile, correlation, draw));
                        return s;
                    }
                    catch (const NumericalRankError &)
                    {
                    }
                }
            },
            threads);

        TrialBatch<Result> batch;
        batch.results.reserve(slots.size());
        for (auto &s : slots)
        {
            batch.results.push_back(std::move(s.value));
            batch.redraws += s.redraws;
        }
        if (batch.redraws > cap)
            throw NumericalRankError("Monte Carlo: " + std::to_string(batch.redraws) +
                                     " singular realizations exceed the redraw budget of " + std::to_string(cap));
        return batch;
    }

} // namespace mimobc

#endif
