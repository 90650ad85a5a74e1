// Copyright (c) 2026 arxnet contributors
// SPDX-License-Identifier: MIT

#ifndef ARXNET_TESTS_TEST_SUPPORT_HPP
#define ARXNET_TESTS_TEST_SUPPORT_HPP

// Independent reference computations used by the unit and acceptance tests.
// These deliberately avoid the library's fast paths: matrix powers by plain
// repeated multiplication, smallest eigenvalues by inverse power iteration,
// the fit statistic by its explicit double sum, and the information matrix
// by its weighted expansion.  Test fixtures for random stable systems and
// random connected topologies live here as well.

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "arxnet/arx.hpp"
#include "arxnet/common.hpp"
#include "arxnet/graph.hpp"

namespace arxnet::testing {

/// Plain repeated multiplication, the oracle for the library's fast power.
inline Eigen::MatrixXd naive_matrix_power(const Eigen::MatrixXd& a, int l) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    for (int k = 0; k < l; ++k) out = out * a;
    return out;
}

/// Smallest eigenvalue of an SPD matrix by inverse power iteration with a
/// Rayleigh-quotient readout — an algorithmically independent route from the
/// library's tridiagonalization-based solver.
inline double inverse_power_lambda_min(const Eigen::MatrixXd& m, int iterations = 500) {
    const Eigen::Index d = m.rows();
    if (d == 0) return 0.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    Eigen::VectorXd x(d);
    for (Eigen::Index k = 0; k < d; ++k) x(k) = 1.0 + 0.01 * static_cast<double>(k);
    x.normalize();
    for (int it = 0; it < iterations; ++it) {
        x = lu.solve(x);
        x.normalize();
    }
    return x.dot(m * x);
}

/// Cached sequence of weight-matrix powers A^0..A^t by repeated multiplication.
inline std::vector<Eigen::MatrixXd> power_table(const Eigen::MatrixXd& a, long t) {
    std::vector<Eigen::MatrixXd> powers(static_cast<std::size_t>(t) + 1);
    powers[0] = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    for (long l = 1; l <= t; ++l)
        powers[static_cast<std::size_t>(l)] = powers[static_cast<std::size_t>(l - 1)] * a;
    return powers;
}

/// Explicit double sum for the fit statistic at sensor i and time t:
/// sum_j sum_{k=0..t-1} a^{(t-k)}_{ij} (y_{k+1,j} - beta' phi_{k,j})^2.
inline double sigma_double_sum(const SensorTraces& traces, const Topology& topo,
                               const std::vector<Eigen::MatrixXd>& powers, int i, long t, int p,
                               int q, const Eigen::VectorXd& beta) {
    double total = 0.0;
    for (int j = 0; j < topo.n; ++j)
        for (long k = 0; k < t; ++k) {
            const double resid = traces.y[static_cast<std::size_t>(j)](k + 1) -
                                 beta.dot(traces.regressor(j, k, p, q));
            total += powers[static_cast<std::size_t>(t - k)](i, j) * resid * resid;
        }
    return total;
}

/// Weighted expansion of the information matrix at sensor i and time t:
/// sum_j sum_{l<t} a^{(t-l)}_{ij} phi phi' + sum_j a^{(t)}_{ij} (1/gamma) I.
inline Eigen::MatrixXd pinv_expansion(const SensorTraces& traces, const Topology& topo,
                                      const std::vector<Eigen::MatrixXd>& powers, int i, long t,
                                      int p, int q, double gamma) {
    const int d = p + q;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
    for (int j = 0; j < topo.n; ++j) {
        for (long l = 0; l < t; ++l) {
            const Eigen::VectorXd phi = traces.regressor(j, l, p, q);
            out += powers[static_cast<std::size_t>(t - l)](i, j) * (phi * phi.transpose());
        }
        out += powers[static_cast<std::size_t>(t)](i, j) * (1.0 / gamma) *
               Eigen::MatrixXd::Identity(d, d);
    }
    return out;
}

/// Random stable system: AR characteristic roots drawn with magnitude in
/// [0.2, 0.85] (so the leading coefficient is bounded away from zero), input
/// coefficients with magnitude in [0.3, 1.5].
inline ArxSystem random_stable_system(int p0, int q0, RandomStream& rng) {
    ArxSystem sys;
    sys.p0 = p0;
    sys.q0 = q0;

    std::vector<double> roots(static_cast<std::size_t>(p0));
    for (auto& r : roots) {
        const double mag = rng.uniform(0.2, 0.85);
        r = rng.uniform01() < 0.5 ? -mag : mag;
    }
    // Expand prod (z - r_k) = z^p0 + a_1 z^{p0-1} + ... + a_p0; then b_k = -a_k.
    std::vector<double> poly{1.0};
    for (double r : roots) {
        std::vector<double> next(poly.size() + 1, 0.0);
        for (std::size_t k = 0; k < poly.size(); ++k) {
            next[k] += poly[k];
            next[k + 1] -= r * poly[k];
        }
        poly = std::move(next);
    }
    sys.b = Eigen::VectorXd(p0);
    for (int k = 0; k < p0; ++k) sys.b(k) = -poly[static_cast<std::size_t>(k + 1)];

    sys.c = Eigen::VectorXd(q0);
    for (int k = 0; k < q0; ++k) {
        const double mag = rng.uniform(0.3, 1.5);
        sys.c(k) = rng.uniform01() < 0.5 ? -mag : mag;
    }
    sys.validate();
    return sys;
}

/// Random connected topology: one of the named families, or a geometric
/// sample (which retries until connected on its own).
inline Topology random_connected_topology(int n, RandomStream& rng) {
    const double pick = rng.uniform01();
    const std::uint64_t placement_seed = static_cast<std::uint64_t>(rng.uniform01() * 1e9);
    if (n >= 3 && pick < 0.25) return build_topology(GraphKind::ring, n);
    if (n >= 2 && pick < 0.45) return build_topology(GraphKind::star, n);
    if (n >= 2 && pick < 0.65) return build_topology(GraphKind::path, n);
    if (pick < 0.85) return build_topology(GraphKind::complete, n);
    return build_topology(GraphKind::random_geometric, n, placement_seed, 0, 0, 0.7);
}

/// Gaussian input / Gaussian noise signal bundle shared by many fixtures.
inline SignalModels gaussian_signals(double sigma_u, double sigma_w) {
    SignalModels sig;
    InputModel in;
    in.kind = InputModel::Kind::iid_gaussian;
    in.sigma_u = sigma_u;
    NoiseModel no;
    no.kind = NoiseModel::Kind::iid_gaussian;
    no.sigma_w = sigma_w;
    sig.inputs.push_back(in);
    sig.noises.push_back(no);
    return sig;
}

}  // namespace arxnet::testing

#endif  // ARXNET_TESTS_TEST_SUPPORT_HPP
