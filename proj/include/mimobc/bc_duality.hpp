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

#ifndef MIMOBC_BC_DUALITY_HPP
#define MIMOBC_BC_DUALITY_HPP

#include "mac_analysis.hpp"

#include <optional>
#include <random>
#include <span>
#include <vector>

namespace mimobc
{
    /// Exact MMSE receive filter of user k in the dual MAC:
    /// G_k = E_k^T T^H H^H (I_N + H T T^H H^H)^{-1}, of size r_k x N.
    inline CMatrix mmse_receiver_exact(const ChannelRealization &channel, std::span<const CMatrix> factors,
                                       std::size_t k)
    {
        const auto &profile = channel.profile();
        const CMatrix t = detail::block_diagonal(profile, factors);
        const auto b = profile.block(k);
        const CMatrix ht = channel.composite() * t;
        const Eigen::Index n = channel.base_antennas();
        const CMatrix x = CMatrix::Identity(n, n) + ht * ht.adjoint();
        // X is Hermitian, so T^H H^H X^{-1} = (X^{-1} H T)^H
        Eigen::LLT<CMatrix> llt(hermitian_part(x));
        const CMatrix solved = llt.solve(ht);
        return solved.adjoint().middleRows(b.offset, b.size);
    }

    /// Pseudo-inverse H^+ = (H^H H)^{-1} H^H.
    inline CMatrix pseudo_inverse(const GramInverse &gram, const ChannelRealization &channel)
    {
        return gram.inverse() * channel.composite().adjoint();
    }

    /// High-SNR limit of the MMSE receiver: sqrt(r / P_Tx) E_k^T H^+.
    inline CMatrix asymptotic_receiver(const GramInverse &gram, const ChannelRealization &channel, double total_power,
                                       std::size_t k)
    {
        if (!(total_power > 0.0))
            throw ValidationError("transmit power must be positive");
        const double r = channel.total_antennas();
        return std::sqrt(r / total_power) * (gram.rows(k) * channel.composite().adjoint());
    }

    inline CMatrix asymptotic_receiver(const ChannelRealization &channel, double total_power, std::size_t k)
    {
        return asymptotic_receiver(GramInverse(channel), channel, total_power, k);
    }

    /// Unitary eigenbasis of E_k^T (H^H H)^{-1} E_k, eigenvalues ascending.
    /// Each eigenvector is rotated so that its largest-magnitude entry is real and positive.
    inline CMatrix decorrelation_basis(const GramInverse &gram, std::size_t k)
    {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(gram.block(k));
        if (es.info() != Eigen::Success)
            throw NumericalRankError("decorrelation basis: eigensolver failed for user " + std::to_string(k));
        CMatrix w = es.eigenvectors();
        for (Eigen::Index i = 0; i < w.cols(); ++i)
        {
            Eigen::Index pivot = 0;
            w.col(i).cwiseAbs().maxCoeff(&pivot);
            const Complex c = w(pivot, i);
            w.col(i) *= std::conj(c) / std::abs(c);
            w(pivot, i) = Complex(std::abs(c), 0.0);
        }
        return w;
    }

    inline CMatrix decorrelation_basis(const ChannelRealization &channel, std::size_t k)
    {
        return decorrelation_basis(GramInverse(channel), k);
    }

    /// Diagonal of D_k: [D_k]_ii = sqrt(w_i^H E_k^T (H^H H)^{-1} E_k w_i).
    inline RVector precoder_normalization(const GramInverse &gram, const CMatrix &basis, std::size_t k)
    {
        const CMatrix b = gram.block(k);
        if (basis.rows() != b.rows() || basis.cols() != b.cols())
            throw ValidationError("decorrelation matrix of user " + std::to_string(k) + " has wrong dimensions");
        RVector d(basis.cols());
        for (Eigen::Index i = 0; i < basis.cols(); ++i)
        {
            const double q = (basis.col(i).adjoint() * b * basis.col(i))(0, 0).real();
            if (!(q > 0.0))
                throw DegeneracyError("precoder normalization of user " + std::to_string(k) + " is not positive");
            d(i) = std::sqrt(q);
        }
        return d;
    }

    /// alpha_{k,i} = sqrt(P_Tx / r) / ||i-th row of W_k^H G_k||, with G_k the asymptotic receiver.
    inline RVector scaling_factors(const GramInverse &gram, const ChannelRealization &channel, double total_power,
                                   std::size_t k, const CMatrix &basis)
    {
        const double r = channel.total_antennas();
        const CMatrix g = basis.adjoint() * asymptotic_receiver(gram, channel, total_power, k);
        RVector alpha(g.rows());
        for (Eigen::Index i = 0; i < g.rows(); ++i)
        {
            const double norm = g.row(i).norm();
            if (!(norm > 0.0))
                throw DegeneracyError("scaling factor of user " + std::to_string(k) + ": receive filter row " +
                                      std::to_string(i) + " vanishes");
            alpha(i) = std::sqrt(total_power / r) / norm;
        }
        return alpha;
    }

    inline RVector scaling_factors(const ChannelRealization &channel, double total_power, std::size_t k)
    {
        const GramInverse gram(channel);
        return scaling_factors(gram, channel, total_power, k, decorrelation_basis(gram, k));
    }

    /// Block-diagonalizing BC precoder P_k = sqrt(P_Tx / r) H (H^H H)^{-1} E_k W_k D_k^{-1}.
    /// Every column has norm sqrt(P_Tx / r) and H_l^H P_k = 0 for l != k.
    inline CMatrix bc_precoder(const GramInverse &gram, const ChannelRealization &channel, double total_power,
                               std::size_t k, const CMatrix &basis)
    {
        if (!(total_power > 0.0))
            throw ValidationError("transmit power must be positive");
        const double r = channel.total_antennas();
        const RVector d = precoder_normalization(gram, basis, k);
        const CMatrix dir = channel.composite() * (gram.rows(k).adjoint() * basis);
        return std::sqrt(total_power / r) * dir * d.cwiseInverse().cast<Complex>().asDiagonal();
    }

    inline CMatrix bc_precoder(const ChannelRealization &channel, double total_power, std::size_t k)
    {
        const GramInverse gram(channel);
        return bc_precoder(gram, channel, total_power, k, decorrelation_basis(gram, k));
    }

    /// Closed-form BC covariance, a weighted orthogonal projector that does not depend on W_k:
    /// S_k = (P_Tx / r) H^{+H} E_k (E_k^T (H^H H)^{-1} E_k)^{-1} E_k^T H^+.
    inline CMatrix bc_covariance(const GramInverse &gram, const ChannelRealization &channel, double total_power,
                                 std::size_t k)
    {
        if (!(total_power > 0.0))
            throw ValidationError("transmit power must be positive");
        const double r = channel.total_antennas();
        const CMatrix hp = gram.rows(k) * channel.composite().adjoint();
        return hermitian_part((total_power / r) * hp.adjoint() * inverse_hpd(gram.block(k)) * hp);
    }

    inline CMatrix bc_covariance(const ChannelRealization &channel, double total_power, std::size_t k)
    {
        return bc_covariance(GramInverse(channel), channel, total_power, k);
    }

    /// True BC rate of user k with all other users' signals as noise:
    /// log2|I + (I + sum_{l != k} H_k^H P_l P_l^H H_k)^{-1} H_k^H P_k P_k^H H_k|.
    inline double bc_exact_user_rate(const ChannelRealization &channel, std::span<const CMatrix> precoders,
                                     std::size_t k)
    {
        if (precoders.size() != channel.users())
            throw ValidationError("expected one precoder per user");
        const auto hk = channel.user(k);
        const Eigen::Index rk = hk.cols();
        CMatrix noise = CMatrix::Identity(rk, rk);
        CMatrix signal;
        for (std::size_t l = 0; l < channel.users(); ++l)
        {
            if (precoders[l].rows() != channel.base_antennas())
                throw ValidationError("precoder of user " + std::to_string(l) + " must have N rows");
            const CMatrix hp = hk.adjoint() * precoders[l];
            if (l == k)
                signal = hp * hp.adjoint();
            else
                noise += hp * hp.adjoint();
        }
        return std::max(0.0, log2det_hpd(noise + signal) - log2det_hpd(noise));
    }

    inline double bc_exact_sum_rate(const ChannelRealization &channel, std::span<const CMatrix> precoders)
    {
        double acc = 0.0;
        for (std::size_t k = 0; k < channel.users(); ++k)
            acc += bc_exact_user_rate(channel, precoders, k);
        return acc;
    }

    // BC solution obtained from the asymptotically optimal dual-MAC solution.
    struct BcSolution
    {
        double total_power = 0.0;
        std::vector<CMatrix> precoders;   // P_k, N x r_k
        std::vector<CMatrix> bases;       // W_k
        std::vector<RVector> normalizers; // diagonal of D_k
        std::vector<RVector> scalings;    // alpha_{k,i}
        std::vector<CMatrix> covariances; // S_k
        std::vector<double> rates;        // exact BC rates with these precoders

        double sum_rate() const
        {
            double acc = 0.0;
            for (double r : rates)
                acc += r;
            return acc;
        }
    };

    /// Builds every user's precoder, covariance and rate. `bases` overrides the eigenbasis choice of W_k.
    inline BcSolution solve_bc(const GramInverse &gram, const ChannelRealization &channel, double total_power,
                               std::optional<std::vector<CMatrix>> bases = std::nullopt)
    {
        BcSolution sol;
        sol.total_power = total_power;
        for (std::size_t k = 0; k < channel.users(); ++k)
        {
            CMatrix w = bases ? bases->at(k) : decorrelation_basis(gram, k);
            sol.normalizers.push_back(precoder_normalization(gram, w, k));
            sol.scalings.push_back(scaling_factors(gram, channel, total_power, k, w));
            sol.precoders.push_back(bc_precoder(gram, channel, total_power, k, w));
            sol.covariances.push_back(sol.precoders.back() * sol.precoders.back().adjoint());
            sol.bases.push_back(std::move(w));
        }
        for (std::size_t k = 0; k < channel.users(); ++k)
            sol.rates.push_back(bc_exact_user_rate(channel, sol.precoders, k));
        return sol;
    }

    inline BcSolution solve_bc(const ChannelRealization &channel, double total_power)
    {
        return solve_bc(GramInverse(channel), channel, total_power);
    }

    /// BC rate of user k predicted from the decoupled receive model y_k = sqrt(P/r) W_k D_k^{-1} s_k + n_k.
    inline double bc_decoupled_user_rate(const CMatrix &basis, const RVector &normalizer, double total_power,
                                         Eigen::Index total_antennas)
    {
        const double snr = total_power / static_cast<double>(total_antennas);
        const CMatrix m = CMatrix::Identity(basis.rows(), basis.rows()) +
                          snr * basis * normalizer.cwiseAbs2().cwiseInverse().cast<Complex>().asDiagonal() *
                              basis.adjoint();
        return log2det_hpd(m);
    }

    struct EigenbasisCheck
    {
        bool passed = false;
        double eigenbasis_gap = 0.0; // log2|D_k^2(W_eig)| - log2|block|, ideally 0
        double min_slack = 0.0;      // smallest log2|D_k^2(W)| - log2|block| over random W, must be >= 0
        std::size_t trials = 0;
    };

    /// Checks that the eigenbasis minimizes log2|D_k^2| over random unitary W (Hadamard inequality).
    inline EigenbasisCheck eigenbasis_optimality_check(const GramInverse &gram, std::size_t k, std::size_t trials,
                                                       std::uint64_t seed = 0)
    {
        if (trials < 1)
            throw ValidationError("eigenbasis check needs at least one trial");
        const double reference = gram.block_log2det(k);
        auto slack = [&](const CMatrix &w) {
            const RVector d = precoder_normalization(gram, w, k);
            double acc = 0.0;
            for (Eigen::Index i = 0; i < d.size(); ++i)
                acc += 2.0 * log2_of(d(i));
            return acc - reference;
        };

        EigenbasisCheck check;
        check.trials = trials;
        check.eigenbasis_gap = slack(decorrelation_basis(gram, k));
        check.min_slack = std::numeric_limits<double>::infinity();
        std::mt19937_64 engine(splitmix64(seed));
        const Eigen::Index rk = gram.block(k).rows();
        for (std::size_t t = 0; t < trials; ++t)
            check.min_slack = std::min(check.min_slack, slack(random_unitary(rk, engine)));
        check.passed = std::abs(check.eigenbasis_gap) <= 1e-9 && check.min_slack >= -1e-9;
        return check;
    }

    inline EigenbasisCheck eigenbasis_optimality_check(const ChannelRealization &channel, std::size_t k,
                                                       std::size_t trials, std::uint64_t seed = 0)
    {
        return eigenbasis_optimality_check(GramInverse(channel), k, trials, seed);
    }

} // namespace mimobc

#endif
