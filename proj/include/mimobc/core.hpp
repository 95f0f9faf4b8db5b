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

#ifndef MIMOBC_CORE_HPP
#define MIMOBC_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mimobc
{
    using Complex = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using RVector = Eigen::VectorXd;

    // Error categories. The CLI maps them onto exit codes.
    struct ConfigError : std::invalid_argument
    {
        using std::invalid_argument::invalid_argument;
    };

    struct ValidationError : std::invalid_argument
    {
        using std::invalid_argument::invalid_argument;
    };

    struct IndexError : std::out_of_range
    {
        using std::out_of_range::out_of_range;
    };

    struct DomainError : std::domain_error
    {
        using std::domain_error::domain_error;
    };

    /// Raised when a matrix that must be invertible is numerically rank deficient.
    struct NumericalRankError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    struct DegeneracyError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    // Gram matrices with a larger condition number are rejected.
    inline constexpr double max_condition_number = 1e12;

    inline constexpr double ln2 = std::numbers::ln2;

    inline double log2_of(double x) { return std::log(x) / ln2; }

    inline CMatrix hermitian_part(const CMatrix &m) { return (m + m.adjoint()) * 0.5; }

    inline double hermitian_defect(const CMatrix &m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

    /// log2 of the determinant of a Hermitian positive-definite matrix, via Cholesky.
    inline double log2det_hpd(const CMatrix &m)
    {
        if (m.size() == 0)
            return 0.0;
        Eigen::LLT<CMatrix> llt(hermitian_part(m));
        if (llt.info() != Eigen::Success)
            throw NumericalRankError("log-determinant: matrix is not positive definite");
        const auto diag = llt.matrixLLT().diagonal().real();
        double acc = 0.0;
        for (Eigen::Index i = 0; i < diag.size(); ++i)
        {
            if (!(diag(i) > 0.0))
                throw NumericalRankError("log-determinant: zero pivot in Cholesky factor");
            acc += std::log(diag(i));
        }
        return 2.0 * acc / ln2;
    }

    inline CMatrix inverse_hpd(const CMatrix &m)
    {
        Eigen::LLT<CMatrix> llt(hermitian_part(m));
        if (llt.info() != Eigen::Success)
            throw NumericalRankError("inverse: matrix is not positive definite");
        CMatrix inv = llt.solve(CMatrix::Identity(m.rows(), m.cols()));
        return hermitian_part(inv);
    }

    /// Condition number of a Hermitian positive semi-definite matrix (infinite when singular).
    inline double condition_number_hpsd(const CMatrix &m)
    {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            throw NumericalRankError("condition number: eigensolver failed");
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        if (!(lo > 0.0))
            return std::numeric_limits<double>::infinity();
        return hi / lo;
    }

    /// Principal square root of a Hermitian PSD matrix. Eigenvalues in [-1e-12, 0) are clamped to zero.
    inline CMatrix hermitian_sqrt(const CMatrix &m)
    {
        if (m.rows() != m.cols())
            throw ValidationError("hermitian_sqrt: matrix must be square");
        Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m));
        if (es.info() != Eigen::Success)
            throw NumericalRankError("hermitian_sqrt: eigensolver failed");
        RVector ev = es.eigenvalues();
        for (Eigen::Index i = 0; i < ev.size(); ++i)
        {
            if (ev(i) < -1e-12)
                throw ValidationError("hermitian_sqrt: matrix is not positive semi-definite (eigenvalue " +
                                      std::to_string(ev(i)) + ")");
            ev(i) = std::sqrt(std::max(ev(i), 0.0));
        }
        const CMatrix &v = es.eigenvectors();
        return hermitian_part(v * ev.cast<Complex>().asDiagonal() * v.adjoint());
    }

    // splitmix64 finalizer, used to turn (seed, index) pairs into well-mixed engine seeds
    inline constexpr std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    /// Seed of the realization drawn for a Monte Carlo trial: master seed XOR trial index.
    inline constexpr std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) { return master ^ trial; }

} // namespace mimobc

#endif
