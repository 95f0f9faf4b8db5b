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

#ifndef MIMOBC_SYSTEM_CHANNEL_HPP
#define MIMOBC_SYSTEM_CHANNEL_HPP

#include "core.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace mimobc
{
    /// Contiguous range of rows/columns that belongs to one user inside a composite r x r matrix.
    struct BlockRange
    {
        Eigen::Index offset = 0;
        Eigen::Index size = 0;

        bool operator==(const BlockRange &) const = default;
    };

    // Antenna and user configuration of the downlink.
    // Users are indexed from 0. Each user multiplexes as many streams as it has antennas.
    class SystemProfile
    {
    public:
        SystemProfile() = default;

        SystemProfile(int base_antennas, std::vector<int> antennas, std::vector<double> weights = {})
            : base_(base_antennas), antennas_(std::move(antennas)), weights_(std::move(weights))
        {
            if (antennas_.empty())
                throw ValidationError("profile: at least one user is required");
            for (std::size_t k = 0; k < antennas_.size(); ++k)
                if (antennas_[k] < 1)
                    throw ValidationError("profile: antenna count of user " + std::to_string(k) +
                                          " must be positive, got " + std::to_string(antennas_[k]));
            if (base_ < 1)
                throw ValidationError("profile: base-station antenna count must be positive");

            total_ = std::accumulate(antennas_.begin(), antennas_.end(), 0);
            if (base_ < total_)
                throw ConfigError("profile: base station has N = " + std::to_string(base_) +
                                  " antennas but the users have r = " + std::to_string(total_) +
                                  " in sum; N >= r is required");

            if (weights_.empty())
                weights_.assign(antennas_.size(), 1.0);
            if (weights_.size() != antennas_.size())
                throw ValidationError("profile: expected " + std::to_string(antennas_.size()) + " weights, got " +
                                      std::to_string(weights_.size()));
            bool any_positive = false;
            for (double w : weights_)
            {
                if (!(w >= 0.0) || !std::isfinite(w))
                    throw ValidationError("profile: weights must be finite and nonnegative");
                any_positive = any_positive || w > 0.0;
            }
            if (!any_positive)
                throw ValidationError("profile: at least one weight must be positive");

            offsets_.resize(antennas_.size());
            std::exclusive_scan(antennas_.begin(), antennas_.end(), offsets_.begin(), 0);
        }

        int base_antennas() const { return base_; }
        std::size_t users() const { return antennas_.size(); }
        int antennas(std::size_t k) const { return antennas_.at(k); }
        const std::vector<int> &antennas() const { return antennas_; }
        const std::vector<double> &weights() const { return weights_; }
        double weight(std::size_t k) const { return weights_.at(k); }

        // r: total number of user antennas
        int total_antennas() const { return total_; }
        // b: total number of streams, identical to r
        int total_streams() const { return total_; }
        int streams(std::size_t k) const { return antennas(k); }

        bool equal_weights() const
        {
            return std::all_of(weights_.begin(), weights_.end(), [&](double w) { return w == weights_.front(); });
        }

        BlockRange block(std::size_t k) const
        {
            if (k >= antennas_.size())
                throw IndexError("user index " + std::to_string(k) + " out of range for " +
                                 std::to_string(antennas_.size()) + " users");
            return {offsets_[k], antennas_[k]};
        }

    private:
        int base_ = 0;
        std::vector<int> antennas_;
        std::vector<double> weights_;
        std::vector<Eigen::Index> offsets_;
        int total_ = 0;
    };

    inline SystemProfile make_profile(int base_antennas, std::vector<int> antennas,
                                      std::optional<std::vector<double>> weights = std::nullopt)
    {
        return SystemProfile(base_antennas, std::move(antennas), weights.value_or(std::vector<double>{}));
    }

    /// Row/column range selected by the k-th block unit matrix.
    inline BlockRange block_index_range(const SystemProfile &profile, std::size_t k) { return profile.block(k); }

    /// Diagonal block k of a composite r x r matrix.
    inline auto user_block(const CMatrix &m, const SystemProfile &profile, std::size_t k)
    {
        const auto b = profile.block(k);
        return m.block(b.offset, b.offset, b.size, b.size);
    }

    // Per-user receive-side correlation C_k of the near-far channel model H_k = Hbar_k C_k^{1/2}.
    class CorrelationModel
    {
    public:
        CorrelationModel() = default;

        explicit CorrelationModel(std::vector<CMatrix> blocks) : blocks_(std::move(blocks))
        {
            sqrt_.reserve(blocks_.size());
            log2det_.reserve(blocks_.size());
            for (std::size_t k = 0; k < blocks_.size(); ++k)
            {
                const CMatrix &c = blocks_[k];
                if (c.rows() != c.cols() || c.rows() == 0)
                    throw ValidationError("correlation: block " + std::to_string(k) + " must be square and nonempty");
                if (hermitian_defect(c) > 1e-12)
                    throw ValidationError("correlation: block " + std::to_string(k) + " is not Hermitian");
                Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(c), Eigen::EigenvaluesOnly);
                if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0))
                    throw ValidationError("correlation: block " + std::to_string(k) + " is not positive definite");
                blocks_[k] = hermitian_part(c);
                sqrt_.push_back(hermitian_sqrt(blocks_[k]));
                log2det_.push_back(log2det_hpd(blocks_[k]));
            }
        }

        static CorrelationModel identity(const SystemProfile &profile)
        {
            std::vector<CMatrix> blocks;
            for (int rk : profile.antennas())
                blocks.push_back(CMatrix::Identity(rk, rk));
            return CorrelationModel(std::move(blocks));
        }

        /// Pure near-far model C_k = c_k I with inverse path losses c_k > 0.
        static CorrelationModel scalar(const SystemProfile &profile, std::span<const double> gains)
        {
            if (gains.size() != profile.users())
                throw ValidationError("correlation: expected " + std::to_string(profile.users()) + " path gains");
            std::vector<CMatrix> blocks;
            for (std::size_t k = 0; k < gains.size(); ++k)
            {
                if (!(gains[k] > 0.0))
                    throw ValidationError("correlation: path gains must be positive");
                const int rk = profile.antennas(k);
                blocks.push_back(CMatrix::Identity(rk, rk) * gains[k]);
            }
            return CorrelationModel(std::move(blocks));
        }

        std::size_t users() const { return blocks_.size(); }
        const CMatrix &block(std::size_t k) const { return blocks_.at(k); }
        const CMatrix &sqrt_block(std::size_t k) const { return sqrt_.at(k); }
        double log2det(std::size_t k) const { return log2det_.at(k); }

        CMatrix composite() const
        {
            Eigen::Index r = 0;
            for (const auto &b : blocks_)
                r += b.rows();
            CMatrix c = CMatrix::Zero(r, r);
            Eigen::Index off = 0;
            for (const auto &b : blocks_)
            {
                c.block(off, off, b.rows(), b.cols()) = b;
                off += b.rows();
            }
            return c;
        }

        bool matches(const SystemProfile &profile) const
        {
            if (blocks_.size() != profile.users())
                return false;
            for (std::size_t k = 0; k < blocks_.size(); ++k)
                if (blocks_[k].rows() != profile.antennas(k))
                    return false;
            return true;
        }

    private:
        std::vector<CMatrix> blocks_;
        std::vector<CMatrix> sqrt_;
        std::vector<double> log2det_;
    };

    // One channel realization: composite H = [H_1, ..., H_K] (N x r) and its Gram matrix H^H H.
    class ChannelRealization
    {
    public:
        ChannelRealization(SystemProfile profile, CMatrix composite)
            : profile_(std::move(profile)), h_(std::move(composite))
        {
            if (h_.rows() != profile_.base_antennas() || h_.cols() != profile_.total_antennas())
                throw ValidationError("channel: expected a " + std::to_string(profile_.base_antennas()) + " x " +
                                      std::to_string(profile_.total_antennas()) + " composite matrix, got " +
                                      std::to_string(h_.rows()) + " x " + std::to_string(h_.cols()));
            gram_ = hermitian_part(h_.adjoint() * h_);
        }

        static ChannelRealization from_blocks(SystemProfile profile, std::span<const CMatrix> blocks)
        {
            if (blocks.size() != profile.users())
                throw ValidationError("channel: one block per user is required");
            CMatrix h(profile.base_antennas(), profile.total_antennas());
            for (std::size_t k = 0; k < blocks.size(); ++k)
            {
                const auto b = profile.block(k);
                if (blocks[k].rows() != h.rows() || blocks[k].cols() != b.size)
                    throw ValidationError("channel: block " + std::to_string(k) + " has wrong dimensions");
                h.middleCols(b.offset, b.size) = blocks[k];
            }
            return ChannelRealization(std::move(profile), std::move(h));
        }

        const SystemProfile &profile() const { return profile_; }
        const CMatrix &composite() const { return h_; }
        const CMatrix &gram() const { return gram_; }

        auto user(std::size_t k) const
        {
            const auto b = profile_.block(k);
            return h_.middleCols(b.offset, b.size);
        }

        Eigen::Index base_antennas() const { return h_.rows(); }
        Eigen::Index total_antennas() const { return h_.cols(); }
        std::size_t users() const { return profile_.users(); }

    private:
        SystemProfile profile_;
        CMatrix h_;
        CMatrix gram_;
    };

    /// N x m matrix of i.i.d. CN(0,1) entries (real and imaginary parts each of variance 1/2).
    template <class Engine>
    CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, Engine &engine)
    {
        std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
        CMatrix m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i)
            {
                const double re = normal(engine);
                const double im = normal(engine);
                m(i, j) = Complex(re, im);
            }
        return m;
    }

    /// Draws H_k = Hbar_k C_k^{1/2}. Output is a pure function of (profile, correlation, seed).
    inline ChannelRealization sample_channel(const SystemProfile &profile, const CorrelationModel &correlation,
                                             std::uint64_t seed)
    {
        if (!correlation.matches(profile))
            throw ValidationError("sample_channel: correlation blocks do not match the antenna profile");
        std::mt19937_64 engine(splitmix64(seed));
        CMatrix h(profile.base_antennas(), profile.total_antennas());
        for (std::size_t k = 0; k < profile.users(); ++k)
        {
            const auto b = profile.block(k);
            h.middleCols(b.offset, b.size) =
                complex_gaussian(profile.base_antennas(), b.size, engine) * correlation.sqrt_block(k);
        }
        return ChannelRealization(profile, std::move(h));
    }

    inline ChannelRealization sample_channel(const SystemProfile &profile, std::uint64_t seed)
    {
        return sample_channel(profile, CorrelationModel::identity(profile), seed);
    }

    /// Haar-distributed random unitary of size n (QR of a complex Gaussian matrix with phase correction).
    template <class Engine>
    CMatrix random_unitary(Eigen::Index n, Engine &engine)
    {
        const CMatrix z = complex_gaussian(n, n, engine);
        Eigen::HouseholderQR<CMatrix> qr(z);
        CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
        const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const double mag = std::abs(r(i, i));
            if (mag > 0.0)
                q.col(i) *= r(i, i) / mag;
        }
        return q;
    }

} // namespace mimobc

#endif
