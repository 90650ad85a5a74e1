// Copyright (c) 2026 arxnet contributors
// SPDX-License-Identifier: MIT

#ifndef ARXNET_DLS_HPP
#define ARXNET_DLS_HPP

/** @file
 * Diffusion least squares: per-sensor adaptation followed by neighbourhood
 * fusion of inverse covariance matrices and information vectors.
 *
 * One synchronous round (time t -> t+1):
 *
 *   Adaptation, per sensor i on data (phi_{t,i}, y_{t+1,i}):
 *     d       = 1 / (1 + phi' P phi)
 *     theta~  = theta + d P phi (y - phi' theta)
 *     Pbar    = P - d (P phi)(P phi)'
 *     Pbar^-1 = P^-1 + phi phi'            (exact rank-one information add)
 *
 *   Diffusion, per sensor i over its closed neighbourhood N_i:
 *     P^-1_new   = sum_{j in N_i} a_ij Pbar^-1_j
 *     theta_new  = P_new * sum_{j in N_i} a_ij Pbar^-1_j theta~_j
 *     P_new      = (P^-1_new)^-1
 *
 * Each state keeps P and P^-1 in lockstep: P^-1 is the authoritative quantity
 * (it evolves by exact rank-one adds and convex sums), while P is recovered
 * by a Cholesky solve plus one Newton refinement step, which drives the
 * inversion residual to the order of the square of the rounding error and
 * keeps the pair consistent far inside the 1e-9 contract.
 */

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "arxnet/arx.hpp"
#include "arxnet/common.hpp"
#include "arxnet/graph.hpp"

namespace arxnet {

namespace detail {

/// Inverse of a small symmetric positive definite matrix: LLT solve followed
/// by one Newton refinement step X <- X (2I - M X).
inline Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* what) {
    const Eigen::Index d = m.rows();
    if (d == 0) return Eigen::MatrixXd(0, 0);
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw NumericError(std::string(what) + ": matrix lost positive definiteness");
    Eigen::MatrixXd x = llt.solve(Eigen::MatrixXd::Identity(d, d));
    x = x * (2.0 * Eigen::MatrixXd::Identity(d, d) - m * x);
    return ((x + x.transpose()) * 0.5).eval();
}

}  // namespace detail

/// Per-(sensor, candidate order) estimator state.
struct LsState {
    Eigen::VectorXd theta;  ///< parameter estimate, dim p+q
    Eigen::MatrixXd P;      ///< covariance-like gain matrix
    Eigen::MatrixXd Pinv;   ///< its inverse, kept in lockstep

    /// Diffuse prior: theta = 0, P = gamma I.
    static LsState initial(int dim, double gamma) {
        if (dim < 0) throw ValidationError("LsState: dimension must be nonnegative");
        if (!(gamma > 0.0)) throw ValidationError("LsState: gamma must be positive");
        LsState s;
        s.theta = Eigen::VectorXd::Zero(dim);
        s.P = gamma * Eigen::MatrixXd::Identity(dim, dim);
        s.Pinv = (1.0 / gamma) * Eigen::MatrixXd::Identity(dim, dim);
        return s;
    }

    int dim() const { return static_cast<int>(theta.size()); }

    /// Max-entry residual of P * Pinv - I (the lockstep contract is 1e-9).
    double lockstep_residual() const {
        if (dim() == 0) return 0.0;
        return (P * Pinv - Eigen::MatrixXd::Identity(dim(), dim())).cwiseAbs().maxCoeff();
    }
};

/// Post-adaptation, pre-diffusion quantities of one sensor.
struct IntermediateState {
    Eigen::VectorXd theta_bar;
    Eigen::MatrixXd Pbar;
    Eigen::MatrixXd Pbar_inv;
};

/// Adaptation step of one sensor on the data pair (phi, y_next).
inline IntermediateState adapt(const LsState& state, const Eigen::VectorXd& phi, double y_next) {
    if (phi.size() != state.theta.size())
        throw ValidationError("adapt: regressor dimension does not match state dimension");
    if (!phi.allFinite() || !std::isfinite(y_next))
        throw NumericError("adapt: nonfinite input data");

    IntermediateState out;
    if (state.dim() == 0) {
        out.theta_bar = state.theta;
        out.Pbar = state.P;
        out.Pbar_inv = state.Pinv;
        return out;
    }
    const Eigen::VectorXd pphi = state.P * phi;
    const double d = 1.0 / (1.0 + phi.dot(pphi));
    const double innovation = y_next - phi.dot(state.theta);
    out.theta_bar = state.theta + d * innovation * pphi;
    out.Pbar = state.P - d * (pphi * pphi.transpose());
    out.Pbar = ((out.Pbar + out.Pbar.transpose()) * 0.5).eval();
    out.Pbar_inv = state.Pinv + phi * phi.transpose();
    return out;
}

/// Fusion step: convex combination of neighbour information.  `neighbors`
/// must already be in the caller's fixed iteration order.
inline LsState diffuse(const std::vector<std::pair<double, const IntermediateState*>>& neighbors) {
    if (neighbors.empty()) throw ValidationError("diffuse: empty neighbourhood");
    const Eigen::Index d = neighbors.front().second->theta_bar.size();
    LsState out;
    if (d == 0) {
        out.theta = Eigen::VectorXd(0);
        out.P = Eigen::MatrixXd(0, 0);
        out.Pinv = Eigen::MatrixXd(0, 0);
        return out;
    }
    Eigen::MatrixXd pinv_new = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd info = Eigen::VectorXd::Zero(d);
    for (const auto& [weight, inter] : neighbors) {
        if (inter->theta_bar.size() != d)
            throw ValidationError("diffuse: neighbour state dimension mismatch");
        if (!(weight > 0.0)) throw ValidationError("diffuse: weights must be positive");
        pinv_new += weight * inter->Pbar_inv;
        info += weight * (inter->Pbar_inv * inter->theta_bar);
    }
    pinv_new = ((pinv_new + pinv_new.transpose()) * 0.5).eval();

    Eigen::LLT<Eigen::MatrixXd> llt(pinv_new);
    if (llt.info() != Eigen::Success)
        throw NumericError("diffuse: fused information matrix lost positive definiteness");
    out.theta = llt.solve(info);
    out.Pinv = pinv_new;
    out.P = detail::spd_inverse(pinv_new, "diffuse");
    return out;
}

/**
 * One synchronous network round for a single candidate order: every sensor
 * adapts on (phis[i], ys[i]), then every sensor fuses over its closed
 * neighbourhood in ascending index order.
 */
inline void step_network(std::vector<LsState>& states, const Topology& topo,
                         const std::vector<Eigen::VectorXd>& phis, const Eigen::VectorXd& ys) {
    const int n = topo.n;
    if (static_cast<int>(states.size()) != n || static_cast<int>(phis.size()) != n ||
        ys.size() != n)
        throw ValidationError("step_network: sensor count mismatch");

    std::vector<IntermediateState> inter(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        inter[static_cast<std::size_t>(i)] =
            adapt(states[static_cast<std::size_t>(i)], phis[static_cast<std::size_t>(i)], ys(i));

    std::vector<LsState> next(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<double, const IntermediateState*>> nb;
        nb.reserve(topo.closed_neighbourhoods[static_cast<std::size_t>(i)].size());
        for (int j : topo.closed_neighbourhoods[static_cast<std::size_t>(i)])
            nb.emplace_back(topo.weights(i, j), &inter[static_cast<std::size_t>(j)]);
        next[static_cast<std::size_t>(i)] = diffuse(nb);
    }
    states = std::move(next);
}

// ---------------------------------------------------------------------------
// Reference implementations (test support)
// ---------------------------------------------------------------------------

/// Trajectory point of the classical recursive least squares reference.
struct RlsPoint {
    Eigen::VectorXd theta;
    Eigen::MatrixXd P;
};

/**
 * Classical single-sensor recursive least squares over a data stream,
 * starting from (theta0, gamma I).  Reference implementation used by tests
 * to pin the n = 1 reduction of the network algorithm.
 */
inline std::vector<RlsPoint> rls_oracle(const std::vector<Eigen::VectorXd>& phis,
                                        const Eigen::VectorXd& ys,
                                        const Eigen::VectorXd& theta0, double gamma) {
    if (phis.size() != static_cast<std::size_t>(ys.size()))
        throw ValidationError("rls_oracle: stream length mismatch");
    const Eigen::Index d = theta0.size();
    std::vector<RlsPoint> traj;
    traj.reserve(phis.size() + 1);
    RlsPoint cur{theta0, gamma * Eigen::MatrixXd::Identity(d, d)};
    traj.push_back(cur);
    for (std::size_t k = 0; k < phis.size(); ++k) {
        const Eigen::VectorXd& phi = phis[k];
        const Eigen::VectorXd pphi = cur.P * phi;
        const double dgain = 1.0 / (1.0 + phi.dot(pphi));
        cur.theta = cur.theta + dgain * (ys(static_cast<Eigen::Index>(k)) - phi.dot(cur.theta)) * pphi;
        cur.P = cur.P - dgain * (pphi * pphi.transpose());
        cur.P = ((cur.P + cur.P.transpose()) * 0.5).eval();
        traj.push_back(cur);
    }
    return traj;
}

/// Batch regularized least squares:
/// theta = (P0^-1 + sum phi phi')^-1 (P0^-1 theta0 + sum phi y).
inline Eigen::VectorXd batch_ls(const std::vector<Eigen::VectorXd>& phis, const Eigen::VectorXd& ys,
                                const Eigen::VectorXd& theta0, double gamma) {
    const Eigen::Index d = theta0.size();
    Eigen::MatrixXd m = (1.0 / gamma) * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd v = (1.0 / gamma) * theta0;
    for (std::size_t k = 0; k < phis.size(); ++k) {
        m += phis[k] * phis[k].transpose();
        v += phis[k] * ys(static_cast<Eigen::Index>(k));
    }
    return m.llt().solve(v);
}

}  // namespace arxnet

#endif  // ARXNET_DLS_HPP
