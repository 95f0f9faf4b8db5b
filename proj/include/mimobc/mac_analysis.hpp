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

#ifndef MIMOBC_MAC_ANALYSIS_HPP
#define MIMOBC_MAC_ANALYSIS_HPP

#include "system_channel.hpp"

#include <span>
#include <vector>

namespace mimobc
{
    // Inverse Gram matrix (H^H H)^{-1} with the per-user block log-determinants that all
    // asymptotic formulas are built from.
    class GramInverse
    {
    public:
        explicit GramInverse(const ChannelRealization &channel) : profile_(channel.profile())
        {
            const double cond = condition_number_hpsd(channel.gram());
            if (!(cond <= max_condition_number))
                throw NumericalRankError("Gram matrix is numerically singular (condition number " +
                                         std::to_string(cond) + " > 1e12)");
            inverse_ = inverse_hpd(channel.gram());
            log2det_gram_ = log2det_hpd(channel.gram());
            block_log2det_.reserve(profile_.users());
            for (std::size_t k = 0; k < profile_.users(); ++k)
                block_log2det_.push_back(log2det_hpd(block(k)));
        }

        const CMatrix &inverse() const { return inverse_; }

        /// E_k^T (H^H H)^{-1} E_k
        CMatrix block(std::size_t k) const { return user_block(inverse_, profile_, k); }

        /// Rows of (H^H H)^{-1} belonging to user k, i.e. E_k^T (H^H H)^{-1}.
        auto rows(std::size_t k) const
        {
            const auto b = profile_.block(k);
            return inverse_.middleRows(b.offset, b.size);
        }

        double log2det_gram() const { return log2det_gram_; }
        double block_log2det(std::size_t k) const { return block_log2det_.at(k); }

    private:
        SystemProfile profile_;
        CMatrix inverse_;
        double log2det_gram_ = 0.0;
        std::vector<double> block_log2det_;
    };

    // Dual-MAC transmit covariances Q_k, optionally carrying the factors T_k with Q_k = T_k T_k^H.
    struct MacCovarianceSet
    {
        std::vector<CMatrix> covariances;
        std::vector<CMatrix> factors;

        static MacCovarianceSet from_covariances(std::vector<CMatrix> q)
        {
            for (std::size_t k = 0; k < q.size(); ++k)
            {
                if (q[k].rows() != q[k].cols())
                    throw ValidationError("covariance " + std::to_string(k) + " is not square");
                const double scale = std::max(1.0, q[k].cwiseAbs().maxCoeff());
                if (hermitian_defect(q[k]) > 1e-12 * scale)
                    throw ValidationError("covariance " + std::to_string(k) + " is not Hermitian");
                Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(q[k]), Eigen::EigenvaluesOnly);
                if (q[k].size() > 0 && es.eigenvalues().minCoeff() < -1e-12 * scale)
                    throw ValidationError("covariance " + std::to_string(k) + " is not positive semi-definite");
            }
            return {std::move(q), {}};
        }

        static MacCovarianceSet from_factors(std::vector<CMatrix> t)
        {
            MacCovarianceSet set;
            for (const auto &tk : t)
                set.covariances.push_back(hermitian_part(tk * tk.adjoint()));
            set.factors = std::move(t);
            return set;
        }

        /// Q_k = lambda_k I
        static MacCovarianceSet scaled_identity(const SystemProfile &profile, std::span<const double> lambdas)
        {
            if (lambdas.size() != profile.users())
                throw ValidationError("one power level per user is required");
            std::vector<CMatrix> t;
            for (std::size_t k = 0; k < lambdas.size(); ++k)
            {
                if (lambdas[k] < 0.0)
                    throw ValidationError("power levels must be nonnegative");
                t.push_back(CMatrix::Identity(profile.antennas(k), profile.antennas(k)) * std::sqrt(lambdas[k]));
            }
            return from_factors(std::move(t));
        }

        static MacCovarianceSet uniform(const SystemProfile &profile, double total_power)
        {
            const std::vector<double> lambdas(profile.users(), total_power / profile.total_antennas());
            return scaled_identity(profile, lambdas);
        }

        double total_power() const
        {
            double p = 0.0;
            for (const auto &q : covariances)
                p += q.trace().real();
            return p;
        }
    };

    // Optimal asymptotic dual-MAC solution: Q_k = lambda_k I with sum_k r_k lambda_k = P_Tx.
    struct MacAsymptoticSolution
    {
        std::vector<double> lambdas;
        double total_power = 0.0;

        MacCovarianceSet covariances(const SystemProfile &profile) const
        {
            return MacCovarianceSet::scaled_identity(profile, lambdas);
        }
    };

    struct RateReport
    {
        std::vector<double> rates;
        double sum = 0.0;
        double weighted_sum = 0.0;
        bool asymptotic = false;
    };

    namespace detail
    {
        inline void check_covariances(const ChannelRealization &channel, const std::vector<CMatrix> &q)
        {
            if (q.size() != channel.users())
                throw ValidationError("expected " + std::to_string(channel.users()) + " covariance matrices, got " +
                                      std::to_string(q.size()));
            for (std::size_t k = 0; k < q.size(); ++k)
            {
                const int rk = channel.profile().antennas(k);
                if (q[k].rows() != rk || q[k].cols() != rk)
                    throw ValidationError("covariance of user " + std::to_string(k) + " must be " +
                                          std::to_string(rk) + " x " + std::to_string(rk));
            }
        }

        // Composite block-diagonal T (r x b) from per-user factors.
        inline CMatrix block_diagonal(const SystemProfile &profile, std::span<const CMatrix> factors)
        {
            if (factors.size() != profile.users())
                throw ValidationError("expected one precoding factor per user");
            CMatrix t = CMatrix::Zero(profile.total_antennas(), profile.total_streams());
            for (std::size_t k = 0; k < factors.size(); ++k)
            {
                const auto b = profile.block(k);
                if (factors[k].rows() != b.size || factors[k].cols() != profile.streams(k))
                    throw ValidationError("precoding factor of user " + std::to_string(k) + " has wrong dimensions");
                t.block(b.offset, b.offset, b.size, b.size) = factors[k];
            }
            return t;
        }
    } // namespace detail

    /// Rate of user k in the dual MAC when all other users are treated as noise:
    /// log2|I + (I + sum_{l != k} H_l Q_l H_l^H)^{-1} H_k Q_k H_k^H|.
    inline double exact_user_rate(const ChannelRealization &channel, const MacCovarianceSet &set, std::size_t k)
    {
        detail::check_covariances(channel, set.covariances);
        channel.profile().block(k);
        const Eigen::Index n = channel.base_antennas();
        CMatrix interference = CMatrix::Identity(n, n);
        for (std::size_t l = 0; l < channel.users(); ++l)
            if (l != k)
                interference += channel.user(l) * set.covariances[l] * channel.user(l).adjoint();
        const CMatrix total = interference + channel.user(k) * set.covariances[k] * channel.user(k).adjoint();
        // |I + X^{-1} A| = |X + A| / |X|
        return std::max(0.0, log2det_hpd(total) - log2det_hpd(interference));
    }

    /// Same rate through the r x r form -log2|E_k^T (I + T^H H^H H T)^{-1} E_k|.
    inline double exact_user_rate_gram_form(const ChannelRealization &channel, std::span<const CMatrix> factors,
                                            std::size_t k)
    {
        const auto &profile = channel.profile();
        const CMatrix t = detail::block_diagonal(profile, factors);
        const auto b = profile.block(k);
        const CMatrix m =
            CMatrix::Identity(profile.total_streams(), profile.total_streams()) + t.adjoint() * channel.gram() * t;
        const CMatrix inv = inverse_hpd(m);
        return -log2det_hpd(inv.block(b.offset, b.offset, b.size, b.size));
    }

    inline RateReport exact_rates(const ChannelRealization &channel, const MacCovarianceSet &set)
    {
        RateReport report;
        for (std::size_t k = 0; k < channel.users(); ++k)
        {
            report.rates.push_back(exact_user_rate(channel, set, k));
            report.sum += report.rates.back();
            report.weighted_sum += channel.profile().weight(k) * report.rates.back();
        }
        return report;
    }

    inline double exact_sum_rate(const ChannelRealization &channel, const MacCovarianceSet &set)
    {
        return exact_rates(channel, set).sum;
    }

    /// High-SNR rate of user k under Q_k = lambda_k I: r_k log2(lambda_k) - log2|E_k^T (H^H H)^{-1} E_k|.
    /// Independent of every other user's covariance.
    inline double asymptotic_user_rate(const GramInverse &gram, const SystemProfile &profile, double lambda,
                                       std::size_t k)
    {
        if (!(lambda > 0.0))
            throw ValidationError("asymptotic rate requires a positive power level");
        return profile.antennas(k) * log2_of(lambda) - gram.block_log2det(k);
    }

    inline double asymptotic_user_rate(const ChannelRealization &channel, double lambda, std::size_t k)
    {
        return asymptotic_user_rate(GramInverse(channel), channel.profile(), lambda, k);
    }

    /// Weighted-sum-rate optimal split: lambda_k = w_k P_Tx / sum_l w_l r_l.
    inline MacAsymptoticSolution optimal_power_split(const SystemProfile &profile, double total_power)
    {
        if (!(total_power > 0.0))
            throw ValidationError("transmit power must be positive");
        double denom = 0.0;
        for (std::size_t k = 0; k < profile.users(); ++k)
            denom += profile.weight(k) * profile.antennas(k);
        if (!(denom > 0.0))
            throw ValidationError("all rate weights are zero");
        MacAsymptoticSolution sol;
        sol.total_power = total_power;
        for (std::size_t k = 0; k < profile.users(); ++k)
            sol.lambdas.push_back(profile.weight(k) * total_power / denom);
        return sol;
    }

    inline RateReport asymptotic_rates(const GramInverse &gram, const SystemProfile &profile,
                                       const MacAsymptoticSolution &solution)
    {
        RateReport report;
        report.asymptotic = true;
        for (std::size_t k = 0; k < profile.users(); ++k)
        {
            const double w = profile.weight(k);
            // users without power have no asymptotic rate; with zero weight they do not count either
            const double rate = solution.lambdas[k] > 0.0
                                    ? asymptotic_user_rate(gram, profile, solution.lambdas[k], k)
                                    : -std::numeric_limits<double>::infinity();
            report.rates.push_back(rate);
            report.sum += rate;
            if (w > 0.0)
                report.weighted_sum += w * rate;
        }
        return report;
    }

    /// Asymptotic weighted sum rate at the optimal power split.
    inline double asymptotic_weighted_sum_rate(const ChannelRealization &channel, double total_power)
    {
        const auto &profile = channel.profile();
        return asymptotic_rates(GramInverse(channel), profile, optimal_power_split(profile, total_power)).weighted_sum;
    }

    /// Equal-weight asymptotic sum rate of linear filtering:
    /// r log2 P - r log2 r - sum_k log2|E_k^T (H^H H)^{-1} E_k|.
    inline double asymptotic_linear_sum_rate(const GramInverse &gram, const SystemProfile &profile, double total_power)
    {
        const double r = profile.total_antennas();
        double acc = r * log2_of(total_power) - r * log2_of(r);
        for (std::size_t k = 0; k < profile.users(); ++k)
            acc -= gram.block_log2det(k);
        return acc;
    }

    /// DPC asymptote r log2 P - r log2 r + log2|H^H H|.
    inline double dpc_asymptotic_sum_rate(const GramInverse &gram, const SystemProfile &profile, double total_power)
    {
        const double r = profile.total_antennas();
        return r * log2_of(total_power) - r * log2_of(r) + gram.log2det_gram();
    }

    inline double dpc_asymptotic_sum_rate(const ChannelRealization &channel, double total_power)
    {
        return dpc_asymptotic_sum_rate(GramInverse(channel), channel.profile(), total_power);
    }

    /// Power-independent rate loss of optimal linear filtering against DPC:
    /// sum_k log2|E_k^T (H^H H)^{-1} E_k| - log2|(H^H H)^{-1}|. Nonnegative by the block Hadamard inequality.
    inline double instantaneous_rate_loss(const GramInverse &gram, const SystemProfile &profile)
    {
        double acc = gram.log2det_gram();
        for (std::size_t k = 0; k < profile.users(); ++k)
            acc += gram.block_log2det(k);
        return acc;
    }

    inline double instantaneous_rate_loss(const ChannelRealization &channel)
    {
        return instantaneous_rate_loss(GramInverse(channel), channel.profile());
    }

} // namespace mimobc

#endif
