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

#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace mimobc;
using Catch::Matchers::WithinAbs;

namespace
{
    // Single-user waterfilling over eigenvalues by bisection on the water level.
    double waterfilling_capacity_bisect(const RVector &gains, double power)
    {
        double lo = 0.0, hi = power + 1.0 / gains.minCoeff() + 1.0;
        for (int it = 0; it < 300; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            double used = 0.0;
            for (Eigen::Index i = 0; i < gains.size(); ++i)
                used += std::max(0.0, mid - 1.0 / gains(i));
            (used > power ? hi : lo) = mid;
        }
        double rate = 0.0;
        for (Eigen::Index i = 0; i < gains.size(); ++i)
            rate += std::log2(1.0 + std::max(0.0, lo - 1.0 / gains(i)) * gains(i));
        return rate;
    }
} // namespace

TEST_CASE("waterfill - levels and inactive channels")
{
    const auto p = waterfill({4.0, 1.0, 0.25}, 2.0);
    // mu = (2 + 1/4 + 1) / 2 = 1.625 > 1, third channel (1/g = 4) inactive
    CHECK_THAT(p[0], WithinAbs(1.375, 1e-14));
    CHECK_THAT(p[1], WithinAbs(0.625, 1e-14));
    CHECK(p[2] == 0.0);
    const auto z = waterfill({0.0, 2.0}, 1.0);
    CHECK(z[0] == 0.0);
    CHECK_THAT(z[1], WithinAbs(1.0, 1e-14));
}

TEST_CASE("dual_mac_sum_capacity - single user equals eigenvalue waterfilling")
{
    const auto p = make_profile(5, {3});
    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        const auto ch = sample_channel(p, seed);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(ch.gram(), Eigen::EigenvaluesOnly);
        for (double pw : {0.1, 1.0, 10.0, 1000.0})
        {
            const auto res = dual_mac_sum_capacity(ch, pw);
            CHECK(res.converged);
            CHECK_THAT(res.sum_rate, WithinAbs(waterfilling_capacity_bisect(es.eigenvalues(), pw), 1e-8));
        }
    }
}

TEST_CASE("dual_mac_sum_capacity - feasibility, monotonicity and bounds")
{
    const auto p = make_profile(5, {2, 2});
    const auto c = CorrelationModel::scalar(p, std::vector<double>{1.0, 2.0});
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        const auto ch = sample_channel(p, c, seed);
        const GramInverse gram(ch);
        for (double db : {-10.0, 0.0, 10.0, 20.0, 30.0})
        {
            const double pw = db_to_linear(db);
            const auto res = dual_mac_sum_capacity(ch, pw);
            CHECK(res.converged);
            CHECK(res.monotone);
            for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
                CHECK(res.objective_trace[i] >= res.objective_trace[i - 1] - 1e-12);

            double used = 0.0;
            for (const auto &q : res.covariances)
            {
                used += q.trace().real();
                Eigen::SelfAdjointEigenSolver<CMatrix> es(q, Eigen::EigenvaluesOnly);
                CHECK(es.eigenvalues().minCoeff() >= -1e-9 * pw);
            }
            CHECK(used <= pw * (1 + 1e-9));

            const CMatrix coop =
                CMatrix::Identity(5, 5) + (pw / 4) * ch.composite() * ch.composite().adjoint();
            CHECK(res.sum_rate >= test::log2det_lu(coop) - 1e-8);
            CHECK(res.sum_rate >= solve_bc(gram, ch, pw).sum_rate() - 1e-9);
        }
    }
}

TEST_CASE("dual_mac_sum_capacity - KKT conditions at convergence")
{
    const auto p = make_profile(6, {2, 1, 2});
    const auto ch = sample_channel(p, 41);
    const double pw = 5.0;
    const auto res = dual_mac_sum_capacity(ch, pw, 1e-13, 5000);
    REQUIRE(res.converged);
    CMatrix x = CMatrix::Identity(6, 6);
    for (std::size_t k = 0; k < 3; ++k)
        x += ch.user(k) * res.covariances[k] * ch.user(k).adjoint();
    const CMatrix xinv = test::lu_inverse(x);
    double nu = 0.0;
    std::vector<CMatrix> grads;
    for (std::size_t k = 0; k < 3; ++k)
    {
        grads.push_back(ch.user(k).adjoint() * xinv * ch.user(k));
        Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(grads.back()), Eigen::EigenvaluesOnly);
        nu = std::max(nu, es.eigenvalues().maxCoeff());
    }
    for (std::size_t k = 0; k < 3; ++k)
    {
        const int rk = p.antennas(k);
        // (nu I - grad_k) Q_k = 0 on the support of Q_k
        const CMatrix slack = (nu * CMatrix::Identity(rk, rk) - grads[k]) * res.covariances[k];
        CHECK(slack.norm() < 1e-3 * nu * pw);
    }
}

TEST_CASE("dual_mac_sum_capacity - high power approaches the DPC asymptote")
{
    const auto p = make_profile(5, {2, 2});
    const auto ch = sample_channel(p, 8);
    const auto res = dual_mac_sum_capacity(ch, 1e6);
    CHECK(std::abs(res.sum_rate - dpc_asymptotic_sum_rate(ch, 1e6)) < 1e-2);
}

TEST_CASE("dual_mac_sum_capacity - iteration cap and argument checks")
{
    const auto p = make_profile(5, {2, 2});
    const auto ch = sample_channel(p, 8);
    const auto capped = dual_mac_sum_capacity(ch, 1.0, 1e-14, 1);
    CHECK_FALSE(capped.converged);
    CHECK(capped.iterations == 1);
    CHECK_THROWS_AS(dual_mac_sum_capacity(ch, 0.0), ValidationError);
    CHECK_THROWS_AS(dual_mac_sum_capacity(ch, 1.0, -1.0), ValidationError);
}

TEST_CASE("generate_curves - structure of the ergodic curves")
{
    const auto p = make_profile(5, {2, 2});
    const auto c = CorrelationModel::scalar(p, std::vector<double>{1.0, 2.0});
    const std::vector<double> grid{0, 10, 20, 30, 40};
    const auto curves = generate_curves(p, c, grid, 40, 3);
    REQUIRE(curves.points.size() == grid.size());
    CHECK(curves.nonconverged == 0);
    CHECK(curves.dominance_violations == 0);

    const double loss = ergodic_rate_loss(p);
    const double slope = 4 * std::log2(10.0) / 10.0;
    for (std::size_t g = 0; g < grid.size(); ++g)
    {
        const auto &pt = curves.points[g];
        CHECK(pt.dpc_sum_capacity >= pt.linear_bd_sum_rate - 1e-9);
        CHECK_THAT(pt.dpc_affine - pt.linear_affine, WithinAbs(loss, 1e-12));
        if (g > 0)
        {
            const auto &prev = curves.points[g - 1];
            CHECK(pt.dpc_sum_capacity > prev.dpc_sum_capacity);
            CHECK(pt.linear_bd_sum_rate > prev.linear_bd_sum_rate);
            CHECK_THAT((pt.dpc_affine - prev.dpc_affine) / 10.0, WithinAbs(slope, 1e-12));
            CHECK_THAT((pt.linear_affine - prev.linear_affine) / 10.0, WithinAbs(slope, 1e-12));
        }
    }
    // multiplexing gain r: slope between 30 and 40 dB within 5%
    const double measured = (curves.points[4].dpc_sum_capacity - curves.points[3].dpc_sum_capacity) / 10.0;
    CHECK(std::abs(measured - slope) < 0.05 * slope);
    const double lin = (curves.points[4].linear_bd_sum_rate - curves.points[3].linear_bd_sum_rate) / 10.0;
    CHECK(std::abs(lin - slope) < 0.05 * slope);

    CHECK_THROWS_AS(generate_curves(p, c, {}, 10, 1), ValidationError);
    CHECK_THROWS_AS(generate_curves(p, c, {10, 0}, 10, 1), ValidationError);
}
