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

#ifndef MIMOBC_VALIDATION_HPP
#define MIMOBC_VALIDATION_HPP

#include "experiment.hpp"

#include <functional>

namespace mimobc
{
    // One checked property: passes iff measured <= threshold (or >= when `at_least` is set).
    struct PropertyResult
    {
        std::string name;
        double measured = 0.0;
        double threshold = 0.0;
        bool at_least = false;

        bool passed() const { return at_least ? measured >= threshold : measured <= threshold; }
    };

    struct ValidationReport
    {
        std::vector<PropertyResult> properties;

        bool passed() const
        {
            return std::all_of(properties.begin(), properties.end(), [](const auto &p) { return p.passed(); });
        }

        ResultTable table() const
        {
            ResultTable t;
            t.experiment = "validate";
            t.columns = {"property", "passed", "measured", "threshold", "comparison"};
            for (const auto &p : properties)
                t.rows.push_back({p.name, std::string(p.passed() ? "true" : "false"), p.measured, p.threshold,
                                  std::string(p.at_least ? ">=" : "<=")});
            t.metadata["all_passed"] = passed();
            return t;
        }
    };

    namespace detail
    {
        // Profiles exercised by the structural checks besides the configured one.
        inline std::vector<SystemProfile> validation_profiles(const SystemProfile &configured)
        {
            return {configured, SystemProfile(5, {2, 2}), SystemProfile(8, {1, 2, 3}), SystemProfile(4, {1, 1, 1, 1}),
                    SystemProfile(6, {3, 3})};
        }
    } // namespace detail

    /// Runs the invariant suite at the configured trial counts.
    inline ValidationReport run_validation(const ExperimentConfig &config)
    {
        ValidationReport rep;
        auto add = [&](std::string name, double measured, double threshold, bool at_least = false) {
            rep.properties.push_back({std::move(name), measured, threshold, at_least});
        };
        const auto configured = config.profile();
        const auto profiles = detail::validation_profiles(configured);

        // closed forms
        double table_dev = 0.0;
        for (const auto &cell : reproduce_rate_loss_table())
            if (cell.value)
                table_dev = std::max(table_dev, std::abs(*cell.value - *tabulated_rate_loss(cell.antennas,
                                                                                           cell.base_antennas)));
        add("rate_loss_table_max_deviation", table_dev, 5e-4);

        double equal_dev = 0.0, single_dev = 0.0;
        for (int k = 1; k <= 4; ++k)
            for (int rb = 1; rb <= 3; ++rb)
                for (int n = k * rb; n <= 14; ++n)
                {
                    const double general = ergodic_rate_loss(SystemProfile(n, std::vector<int>(k, rb)));
                    equal_dev = std::max(equal_dev, std::abs(ergodic_rate_loss_equal(k, rb, n) - general));
                    if (rb == 1)
                        single_dev = std::max(single_dev, std::abs(ergodic_rate_loss_single(k, n) -
                                                                   ergodic_rate_loss_equal(k, 1, n)));
                }
        add("equal_antenna_formula_deviation", equal_dev, 1e-12);
        add("single_antenna_formula_deviation", single_dev, 0.0);
        add("fewer_users_ratio_deviation",
            std::abs(ergodic_rate_loss_equal(2, 3, 6) / ergodic_rate_loss_equal(3, 2, 6) - 0.65), 0.01);

        // Monte Carlo against the closed form, including N = r stress profiles
        std::vector<SystemProfile> mc_profiles{configured, SystemProfile(2, {1, 1}), SystemProfile(4, {2, 2})};
        for (const auto &p : mc_profiles)
        {
            const auto est = monte_carlo_rate_loss(p, CorrelationModel::identity(p),
                                                   monte_carlo_trials(p, config.trials * 10), config.seed,
                                                   config.threads);
            add("mc_rate_loss_zscore[" + profile_label(p.antennas()) + ",N=" + std::to_string(p.base_antennas()) +
                    "]",
                est.z_score(ergodic_rate_loss(p)), 3.0);
        }

        // per-realization structure
        const double power = 10.0;
        double form_dev = 0.0, min_loss = std::numeric_limits<double>::infinity(), corr_dev = 0.0;
        double bd_res = 0.0, norm_dev = 0.0, spec_dev = 0.0, trace_dev = 0.0, idem_dev = 0.0, eig_slack = 0.0;
        std::size_t checked = 0;
        for (const auto &p : profiles)
        {
            std::mt19937_64 engine(splitmix64(config.seed));
            std::vector<CMatrix> cblocks;
            for (int rk : p.antennas())
            {
                const CMatrix a = complex_gaussian(rk, rk, engine);
                cblocks.push_back(a * a.adjoint() + CMatrix::Identity(rk, rk) * 0.5);
            }
            const CorrelationModel corr(cblocks);
            for (std::size_t i = 0; i < config.trials; ++i)
            {
                const auto plain = sample_channel(p, trial_seed(config.seed, i));
                CMatrix correlated = plain.composite();
                for (std::size_t k = 0; k < p.users(); ++k)
                {
                    const auto b = p.block(k);
                    correlated.middleCols(b.offset, b.size) = plain.user(k) * corr.sqrt_block(k);
                }
                const ChannelRealization ch(p, correlated);
                GramInverse gram(plain);
                ++checked;

                // determinant forms with random PSD factors
                std::vector<CMatrix> factors;
                for (int rk : p.antennas())
                    factors.push_back(complex_gaussian(rk, rk, engine));
                const auto set = MacCovarianceSet::from_factors(factors);
                for (std::size_t k = 0; k < p.users(); ++k)
                    form_dev = std::max(form_dev, std::abs(exact_user_rate(plain, set, k) -
                                                           exact_user_rate_gram_form(plain, factors, k)));

                const double loss = instantaneous_rate_loss(gram, p);
                min_loss = std::min(min_loss, loss);
                corr_dev = std::max(corr_dev, std::abs(instantaneous_rate_loss(ch) - loss));

                const auto sol = solve_bc(gram, plain, power);
                const double r = p.total_antennas();
                double total_trace = 0.0;
                for (std::size_t k = 0; k < p.users(); ++k)
                {
                    const auto &pk = sol.precoders[k];
                    for (std::size_t l = 0; l < p.users(); ++l)
                        if (l != k)
                            bd_res = std::max(bd_res, (plain.user(l).adjoint() * pk).norm() /
                                                          (plain.user(l).norm() * pk.norm()));
                    for (Eigen::Index c = 0; c < pk.cols(); ++c)
                        norm_dev = std::max(norm_dev, std::abs(pk.col(c).norm() - std::sqrt(power / r)));
                    const CMatrix s = bc_covariance(gram, plain, power, k);
                    Eigen::SelfAdjointEigenSolver<CMatrix> es(s, Eigen::EigenvaluesOnly);
                    const auto ev = es.eigenvalues();
                    const Eigen::Index zeros = ev.size() - p.antennas(k);
                    for (Eigen::Index e = 0; e < ev.size(); ++e)
                        spec_dev = std::max(spec_dev, std::abs(ev(e) - (e < zeros ? 0.0 : power / r)));
                    total_trace += s.trace().real();
                    const CMatrix proj = s * (r / power);
                    idem_dev = std::max(idem_dev, (proj * proj - proj).cwiseAbs().maxCoeff());
                    if (i == 0)
                        eig_slack = std::min(eig_slack, eigenbasis_optimality_check(gram, k, 100, config.seed).min_slack);
                }
                trace_dev = std::max(trace_dev, std::abs(total_trace - power));
            }
        }
        add("determinant_form_deviation", form_dev, 1e-10);
        add("rate_loss_minimum", min_loss, -1e-10, true);
        add("correlation_invariance_deviation", corr_dev, 1e-9);
        add("bd_relative_residual", bd_res, 1e-9);
        add("precoder_column_norm_deviation", norm_dev, 1e-10);
        add("covariance_spectrum_deviation", spec_dev, 1e-8);
        add("total_power_deviation", trace_dev, 1e-8);
        add("projector_idempotency_deviation", idem_dev, 1e-9);
        add("eigenbasis_min_slack", eig_slack, -1e-9, true);

        // high-SNR convergence of exact BC and MAC sum rates to the asymptotic formula
        const std::vector<double> grid{1e2, 1e3, 1e4, 1e6};
        double worst_final = 0.0, monotone = 1.0;
        for (std::size_t i = 0; i < std::min<std::size_t>(config.trials, 20); ++i)
        {
            const auto ch = sample_channel(configured, trial_seed(config.seed, i));
            const GramInverse gram(ch);
            double prev_bc = std::numeric_limits<double>::infinity(), prev_mac = prev_bc;
            for (double pw : grid)
            {
                const double asym = asymptotic_linear_sum_rate(gram, configured, pw);
                const double gbc = std::abs(solve_bc(gram, ch, pw).sum_rate() - asym);
                const double gmac = std::abs(exact_sum_rate(ch, MacCovarianceSet::uniform(configured, pw)) - asym);
                if (gbc > prev_bc || gmac > prev_mac)
                    monotone = 0.0;
                prev_bc = gbc;
                prev_mac = gmac;
            }
            worst_final = std::max({worst_final, prev_bc, prev_mac});
        }
        add("asymptotic_gap_at_1e6", worst_final, 1e-2);
        add("asymptotic_gap_monotone", monotone, 1.0, true);

        // waterfilling baseline
        double wf_monotone = 1.0, dominance = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < std::min<std::size_t>(config.trials, 50); ++i)
        {
            const auto ch = sample_channel(configured, config.correlation_model(), trial_seed(config.seed, i));
            const GramInverse gram(ch);
            for (double db : {0.0, 20.0, 40.0})
            {
                const auto cap = dual_mac_sum_capacity(ch, db_to_linear(db), config.tolerance, config.max_iterations);
                if (!cap.monotone)
                    wf_monotone = 0.0;
                dominance = std::min(dominance, cap.sum_rate - solve_bc(gram, ch, db_to_linear(db)).sum_rate());
            }
        }
        add("waterfilling_monotone", wf_monotone, 1.0, true);
        add("dpc_minus_linear_minimum", dominance, -1e-9, true);
        return rep;
    }

} // namespace mimobc

#endif
