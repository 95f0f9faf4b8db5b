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

#ifndef MIMOBC_CAPACITY_BASELINE_HPP
#define MIMOBC_CAPACITY_BASELINE_HPP

#include "bc_duality.hpp"
#include "ergodic_analysis.hpp"

#include <algorithm>
#include <vector>

namespace mimobc
{
    /// Water levels for parallel channels with gains g_i under total power P:
    /// p_i = max(0, mu - 1/g_i) with sum_i p_i = P. Nonpositive gains get no power.
    inline std::vector<double> waterfill(const std::vector<double> &gains, double total_power)
    {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < gains.size(); ++i)
            if (gains[i] > 0.0)
                order.push_back(i);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });

        std::vector<double> powers(gains.size(), 0.0);
        std::size_t active = order.size();
        double level = 0.0;
        while (active > 0)
        {
            double inv_sum = 0.0;
            for (std::size_t j = 0; j < active; ++j)
                inv_sum += 1.0 / gains[order[j]];
            level = (total_power + inv_sum) / static_cast<double>(active);
            if (level > 1.0 / gains[order[active - 1]])
                break;
            --active;
        }
        for (std::size_t j = 0; j < active; ++j)
            powers[order[j]] = level - 1.0 / gains[order[j]];
        return powers;
    }

    /// log2|I + sum_k H_k Q_k H_k^H|
    inline double mac_sum_rate_objective(const ChannelRealization &channel, const std::vector<CMatrix> &q)
    {
        const Eigen::Index n = channel.base_antennas();
        CMatrix x = CMatrix::Identity(n, n);
        for (std::size_t k = 0; k < channel.users(); ++k)
            x += channel.user(k) * q[k] * channel.user(k).adjoint();
        return log2det_hpd(x);
    }

    struct SumCapacityResult
    {
        std::vector<CMatrix> covariances;
        double sum_rate = 0.0;
        std::size_t iterations = 0;
        bool converged = false;
        bool monotone = true;
        std::vector<double> objective_trace; // objective after initialization and after every iteration
    };

    /// DPC sum capacity through the dual MAC: sum-power iterative waterfilling with averaging
    /// Q <- Q_new / K + (K - 1) / K Q, starting from Q_k = (P_Tx / r) I. Stops when one
    /// iteration gains less than `tolerance` bits.
    inline SumCapacityResult dual_mac_sum_capacity(const ChannelRealization &channel, double total_power,
                                                   double tolerance = 1e-8, std::size_t max_iterations = 500)
    {
        if (!(total_power > 0.0))
            throw ValidationError("transmit power must be positive");
        if (!(tolerance > 0.0))
            throw ValidationError("waterfilling tolerance must be positive");

        const auto &profile = channel.profile();
        const std::size_t users = channel.users();
        const Eigen::Index n = channel.base_antennas();

        SumCapacityResult res;
        for (std::size_t k = 0; k < users; ++k)
        {
            const int rk = profile.antennas(k);
            res.covariances.push_back(CMatrix::Identity(rk, rk) * (total_power / profile.total_antennas()));
        }
        double objective = mac_sum_rate_objective(channel, res.covariances);
        res.objective_trace.push_back(objective);

        const double keep = static_cast<double>(users - 1) / static_cast<double>(users);
        std::vector<CMatrix> bases(users);
        std::vector<RVector> gains(users);
        for (res.iterations = 1; res.iterations <= max_iterations; ++res.iterations)
        {
            CMatrix total = CMatrix::Identity(n, n);
            for (std::size_t k = 0; k < users; ++k)
                total += channel.user(k) * res.covariances[k] * channel.user(k).adjoint();

            std::vector<double> flat;
            for (std::size_t k = 0; k < users; ++k)
            {
                const auto hk = channel.user(k);
                const CMatrix z = total - hk * res.covariances[k] * hk.adjoint();
                Eigen::LLT<CMatrix> llt(hermitian_part(z));
                const CMatrix eff = hermitian_part(hk.adjoint() * llt.solve(CMatrix(hk)));
                Eigen::SelfAdjointEigenSolver<CMatrix> es(eff);
                bases[k] = es.eigenvectors();
                gains[k] = es.eigenvalues();
                for (Eigen::Index i = 0; i < gains[k].size(); ++i)
                    flat.push_back(gains[k](i));
            }

            const auto powers = waterfill(flat, total_power);
            std::size_t pos = 0;
            for (std::size_t k = 0; k < users; ++k)
            {
                RVector p(gains[k].size());
                for (Eigen::Index i = 0; i < p.size(); ++i)
                    p(i) = powers[pos++];
                const CMatrix fresh = bases[k] * p.cast<Complex>().asDiagonal() * bases[k].adjoint();
                res.covariances[k] = hermitian_part(fresh / static_cast<double>(users) + keep * res.covariances[k]);
            }

            const double next = mac_sum_rate_objective(channel, res.covariances);
            res.objective_trace.push_back(next);
            if (next < objective - 1e-12 * std::max(1.0, std::abs(objective)))
                res.monotone = false;
            const double gain = next - objective;
            objective = next;
            if (gain < tolerance)
            {
                res.converged = true;
                break;
            }
        }
        res.iterations = std::min(res.iterations, max_iterations);
        res.sum_rate = objective;
        return res;
    }

    struct CurvePoint
    {
        double power_db = 0.0;
        double power = 0.0;
        double dpc_sum_capacity = 0.0;
        double linear_bd_sum_rate = 0.0;
        double dpc_affine = 0.0;
        double linear_affine = 0.0;
        double dpc_stderr = 0.0;
        double linear_stderr = 0.0;
    };

    struct CurveSet
    {
        std::vector<CurvePoint> points;
        std::size_t trials = 0;
        std::size_t nonconverged = 0;  // waterfilling runs that hit the iteration cap
        std::size_t redraws = 0;       // singular realizations replaced
        std::size_t dominance_violations = 0; // realizations with linear BD rate above the DPC capacity
    };

    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

    /// Ergodic DPC sum capacity and BD sum rate versus transmit power, together with both affine
    /// high-SNR approximations from the closed-form ergodic expressions. The same realizations are
    /// used at every grid point.
    inline CurveSet generate_curves(const SystemProfile &profile, const CorrelationModel &correlation,
                                    const std::vector<double> &grid_db, std::size_t trials, std::uint64_t seed,
                                    double tolerance = 1e-8, std::size_t max_iterations = 500, unsigned threads = 0)
    {
        if (grid_db.empty())
            throw ValidationError("power grid must not be empty");
        if (!std::is_sorted(grid_db.begin(), grid_db.end()))
            throw ValidationError("power grid must be ascending");
        if (trials < 2)
            throw ValidationError("curves need at least two trials");

        struct TrialCurves
        {
            std::vector<double> dpc;
            std::vector<double> linear;
            std::size_t nonconverged = 0;
            std::size_t violations = 0;
        };
        auto batch = sample_trials<TrialCurves>(
            profile, correlation, trials, seed,
            [&](const ChannelRealization &ch) {
                const GramInverse gram(ch);
                TrialCurves tc;
                for (double db : grid_db)
                {
                    const double p = db_to_linear(db);
                    const auto cap = dual_mac_sum_capacity(ch, p, tolerance, max_iterations);
                    const double lin = solve_bc(gram, ch, p).sum_rate();
                    tc.dpc.push_back(cap.sum_rate);
                    tc.linear.push_back(lin);
                    tc.nonconverged += cap.converged ? 0 : 1;
                    tc.violations += cap.sum_rate < lin - 1e-9 ? 1 : 0;
                }
                return tc;
            },
            threads);

        const double r = profile.total_antennas();
        const auto closed = ergodic_closed_form(profile, correlation);
        double block_sum = 0.0;
        for (double v : closed.block_logdets)
            block_sum += v;

        CurveSet out;
        out.trials = trials;
        out.redraws = batch.redraws;
        for (const auto &tc : batch.results)
        {
            out.nonconverged += tc.nonconverged;
            out.dominance_violations += tc.violations;
        }
        for (std::size_t g = 0; g < grid_db.size(); ++g)
        {
            std::vector<double> dpc, lin;
            for (const auto &tc : batch.results)
            {
                dpc.push_back(tc.dpc[g]);
                lin.push_back(tc.linear[g]);
            }
            const auto d = summarize(dpc, seed);
            const auto l = summarize(lin, seed);
            CurvePoint pt;
            pt.power_db = grid_db[g];
            pt.power = db_to_linear(grid_db[g]);
            pt.dpc_sum_capacity = d.mean;
            pt.dpc_stderr = d.standard_error;
            pt.linear_bd_sum_rate = l.mean;
            pt.linear_stderr = l.standard_error;
            const double base = r * log2_of(pt.power) - r * log2_of(r);
            pt.dpc_affine = base + closed.dpc_logdet;
            pt.linear_affine = base - block_sum;
            out.points.push_back(pt);
        }
        return out;
    }

} // namespace mimobc

#endif
