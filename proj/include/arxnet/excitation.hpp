// Copyright (c) 2026 arxnet contributors
// SPDX-License-Identifier: MIT

#ifndef ARXNET_EXCITATION_HPP
#define ARXNET_EXCITATION_HPP

/** @file
 * Computable diagnostics for the cooperative excitation conditions.
 *
 * For a candidate order (p, q) the two primitive quantities are
 *
 *     r_t(p,q)          = lambda_max(P0^-1) + sum_i sum_{k=0..t} |phi_{k,i}|^2
 *     lambda^{p,q}_min(t) = lambda_min( sum_j P0_j^-1
 *                            + sum_j sum_{k=0..t-offset} phi_{k,j} phi_{k,j}' )
 *
 * where the lag offset keeps the Gram window one graph diameter behind the
 * present (default D_G + 1 for the known-bound condition, D_G for the
 * unknown-bound one; the source statements differ by one and the offset is
 * configurable).
 *
 * The known-bound condition tracks ratio1 = log r_t(p*,q*) / a_t and
 * ratio2 = a_t / lambda^{p,q}_min(t) over the probe orders; the unknown-bound
 * condition tracks ratio1 = (h_t log t + [eta(t) log log t]^2) / abar_t and
 * ratio2 = abar_t / lambda^0_min(t) at the true maximal order.  Both are
 * satisfied asymptotically when the ratios decay to zero; the report grades
 * that with a least-squares slope of log(ratio) against log(t) over the last
 * half of the horizon — a clearly-labelled heuristic, not a proof.
 */

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "arxnet/arx.hpp"
#include "arxnet/common.hpp"
#include "arxnet/graph.hpp"
#include "arxnet/lic.hpp"

namespace arxnet {

namespace detail {

/// Smallest eigenvalue of a symmetric matrix, clamped to 0 when within
/// -1e-12 of zero; further below is a numeric error.
inline double symmetric_lambda_min(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericError("symmetric eigenvalue solve failed");
    const double lam = solver.eigenvalues()(0);
    if (lam < -1e-12)
        throw NumericError("Gram matrix eigenvalue " + format_double(lam) +
                           " below the clamp tolerance");
    return lam < 0.0 ? 0.0 : lam;
}

}  // namespace detail

/// One-shot r_t(p,q) for P0 = gamma I at every sensor.
inline double excitation_r(const SensorTraces& traces, int p, int q, double gamma, long t) {
    if (!(gamma > 0.0)) throw ValidationError("excitation_r: gamma must be positive");
    if (t < 0 || t > traces.horizon) throw ValidationError("excitation_r: t out of range");
    double r = 1.0 / gamma;
    for (int i = 0; i < traces.n; ++i)
        for (long k = 0; k <= t; ++k) r += traces.regressor(i, k, p, q).squaredNorm();
    return r;
}

/// One-shot network lambda^{p,q}_min(t) with Gram terms up to k = t - offset.
inline double lambda_min_pq(const SensorTraces& traces, const Topology& topo, int p, int q,
                            long t, double gamma, int offset) {
    if (!(gamma > 0.0)) throw ValidationError("lambda_min_pq: gamma must be positive");
    if (t < 0 || t > traces.horizon) throw ValidationError("lambda_min_pq: t out of range");
    const int d = p + q;
    Eigen::MatrixXd m =
        (static_cast<double>(topo.n) / gamma) * Eigen::MatrixXd::Identity(d, d);
    const long cutoff = t - offset;
    for (int j = 0; j < topo.n; ++j)
        for (long k = 0; k <= cutoff; ++k) {
            const Eigen::VectorXd phi = traces.regressor(j, k, p, q);
            m += phi * phi.transpose();
        }
    return detail::symmetric_lambda_min(m);
}

/// One sampled time step of the diagnostic series at one probe order.
struct ExcitationRow {
    long t = 0;
    int p = 0;
    int q = 0;
    double r = 0.0;           ///< r_t(p,q)
    double lambda_min = 0.0;  ///< network lambda^{p,q}_min(t)
    double ratio1 = 0.0;
    double ratio2 = 0.0;
    bool warm_up = false;  ///< Gram window still empty (t <= offset)
    std::vector<double> per_sensor_lambda_min;
};

/// Trend grade of one probe's ratio series.
struct ExcitationVerdict {
    int p = 0;
    int q = 0;
    double slope1 = 0.0;  ///< d log(ratio1) / d log(t) over the last half
    double slope2 = 0.0;
    bool trending1 = false;  ///< slope strictly negative
    bool trending2 = false;
    bool enough_data = false;  ///< at least 3 usable points per series
};

/// Full diagnostic time series for a set of probe orders.
struct ExcitationReport {
    std::vector<ExcitationRow> rows;
    std::vector<ExcitationVerdict> verdicts;

    /// CSV schema: t,p,q,r_t,lambda_min,ratio1,ratio2,warm_up, then one
    /// sensor_<i>_lambda_min column per sensor.
    void to_csv(std::ostream& os, int n_sensors) const {
        CsvWriter csv(os);
        std::vector<std::string> head{"t",      "p",      "q",      "r_t",
                                      "lambda_min", "ratio1", "ratio2", "warm_up"};
        for (int i = 0; i < n_sensors; ++i)
            head.push_back("sensor_" + std::to_string(i + 1) + "_lambda_min");
        csv.header(head);
        for (const auto& row : rows) {
            csv.cell(row.t)
                .cell(row.p)
                .cell(row.q)
                .cell(row.r)
                .cell(row.lambda_min)
                .cell(row.ratio1)
                .cell(row.ratio2)
                .cell(row.warm_up ? 1 : 0);
            for (double v : row.per_sensor_lambda_min) csv.cell(v);
            csv.end_row();
        }
    }
};

namespace detail {

/// Incremental Gram accumulators for one probe order.
struct ProbeAccumulator {
    int p = 0, q = 0;
    double r_sum = 0.0;               ///< sum of |phi|^2 over k <= r_cursor
    long r_cursor = -1;               ///< last k folded into r_sum
    Eigen::MatrixXd net_gram;         ///< network Gram including prior term
    std::vector<Eigen::MatrixXd> sensor_gram;  ///< per-sensor Gram incl prior
    long gram_cursor = -1;            ///< last k folded into the Grams
};

/// Least-squares slope of log(series) against log(t) over rows with t in the
/// last half of the horizon and positive series values.
inline std::pair<double, int> log_trend_slope(const std::vector<std::pair<long, double>>& series,
                                              long horizon) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int used = 0;
    for (const auto& [t, v] : series) {
        if (t * 2 < horizon || !(v > 0.0)) continue;
        const double x = std::log(static_cast<double>(t));
        const double y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += y * x;
        ++used;
    }
    if (used < 3) return {0.0, used};
    const double denom = sxx - sx * sx / used;
    if (!(denom > 0.0)) return {0.0, 0};
    return {(sxy - sx * sy / used) / denom, used};
}

template <typename RatioFn>
ExcitationReport assemble_report(const SensorTraces& traces, const Topology& topo,
                                 const std::vector<std::pair<int, int>>& probes, double gamma,
                                 int offset, long stride, RatioFn&& ratios) {
    if (probes.empty()) throw ValidationError("condition report: probe set is empty");
    if (stride < 1) throw ValidationError("condition report: stride must be >= 1");
    if (offset < 0) throw ValidationError("condition report: offset must be >= 0");

    std::vector<ProbeAccumulator> acc;
    for (const auto& [p, q] : probes) {
        ProbeAccumulator a;
        a.p = p;
        a.q = q;
        const int d = p + q;
        a.net_gram = (static_cast<double>(topo.n) / gamma) * Eigen::MatrixXd::Identity(d, d);
        a.sensor_gram.assign(static_cast<std::size_t>(topo.n),
                             (1.0 / gamma) * Eigen::MatrixXd::Identity(d, d));
        acc.push_back(std::move(a));
    }

    ExcitationReport report;
    for (long t = 1; t <= traces.horizon; ++t) {
        const bool emit = (t % stride == 0) || t == traces.horizon;
        if (!emit) continue;
        for (auto& a : acc) {
            // r_t folds |phi_k|^2 up to k = t (no lag).
            while (a.r_cursor < t) {
                ++a.r_cursor;
                for (int i = 0; i < topo.n; ++i)
                    a.r_sum += traces.regressor(i, a.r_cursor, a.p, a.q).squaredNorm();
            }
            // The Gram window lags by `offset`.
            const long cutoff = t - offset;
            while (a.gram_cursor < cutoff) {
                ++a.gram_cursor;
                for (int j = 0; j < topo.n; ++j) {
                    const Eigen::VectorXd phi = traces.regressor(j, a.gram_cursor, a.p, a.q);
                    a.net_gram += phi * phi.transpose();
                    a.sensor_gram[static_cast<std::size_t>(j)] += phi * phi.transpose();
                }
            }

            ExcitationRow row;
            row.t = t;
            row.p = a.p;
            row.q = a.q;
            row.r = 1.0 / gamma + a.r_sum;
            row.lambda_min = symmetric_lambda_min(a.net_gram);
            row.warm_up = cutoff < 0;
            for (int j = 0; j < topo.n; ++j)
                row.per_sensor_lambda_min.push_back(
                    symmetric_lambda_min(a.sensor_gram[static_cast<std::size_t>(j)]));
            ratios(row);
            report.rows.push_back(std::move(row));
        }
    }

    // Trend verdicts per probe over the emitted rows.
    for (const auto& [p, q] : probes) {
        std::vector<std::pair<long, double>> s1, s2;
        for (const auto& row : report.rows)
            if (row.p == p && row.q == q) {
                s1.emplace_back(row.t, row.ratio1);
                s2.emplace_back(row.t, row.ratio2);
            }
        ExcitationVerdict v;
        v.p = p;
        v.q = q;
        const auto [slope1, used1] = log_trend_slope(s1, traces.horizon);
        const auto [slope2, used2] = log_trend_slope(s2, traces.horizon);
        v.slope1 = slope1;
        v.slope2 = slope2;
        v.enough_data = used1 >= 3 && used2 >= 3;
        v.trending1 = v.enough_data && slope1 < 0.0;
        v.trending2 = v.enough_data && slope2 < 0.0;
        report.verdicts.push_back(v);
    }
    return report;
}

}  // namespace detail

/**
 * Known-bound condition report.  ratio1 uses r_t at the maximal order
 * (p_star, q_star) regardless of the probe; ratio2 uses each probe's own
 * lambda^{p,q}_min.  Default probes are {(p0,q*), (p*,q0)} — pass them in.
 */
inline ExcitationReport condition_report_case1(const SensorTraces& traces, const Topology& topo,
                                               const std::vector<std::pair<int, int>>& probes,
                                               int p_star, int q_star,
                                               const GainSchedule& schedule, double gamma,
                                               int offset, long stride = 1) {
    schedule.validate();
    if (p_star < 1 || q_star < 1)
        throw ValidationError("condition report: bounds must satisfy p*, q* >= 1");

    // Running r_t at the maximal order, folded alongside the probe rows.
    double r_max_sum = 0.0;
    long r_max_cursor = -1;
    auto r_max_at = [&](long t) {
        while (r_max_cursor < t) {
            ++r_max_cursor;
            for (int i = 0; i < topo.n; ++i)
                r_max_sum += traces.regressor(i, r_max_cursor, p_star, q_star).squaredNorm();
        }
        return 1.0 / gamma + r_max_sum;
    };

    return detail::assemble_report(traces, topo, probes, gamma, offset, stride,
                                   [&](ExcitationRow& row) {
                                       const double a_t = schedule.at(row.t);
                                       row.ratio1 = std::log(r_max_at(row.t)) / a_t;
                                       row.ratio2 = row.lambda_min > 0.0
                                                        ? a_t / row.lambda_min
                                                        : std::numeric_limits<double>::infinity();
                                   });
}

/**
 * Unknown-bound condition report at the true maximal order (m0, m0):
 * ratio1 = (h_t log t + [eta(t) log log t]^2) / abar_t (natural logs,
 * evaluated from t = 3 up; earlier rows reuse the t = 3 value of the
 * log-log term), ratio2 = abar_t / lambda^0_min(t).
 */
inline ExcitationReport condition_report_case2(const SensorTraces& traces, const Topology& topo,
                                               int m0, const GainSchedule& abar,
                                               const HSchedule& h, const EtaSchedule& eta,
                                               double gamma, int offset, long stride = 1) {
    abar.validate();
    h.validate();
    eta.validate();
    if (m0 < 1) throw ValidationError("condition report: m0 must be >= 1");

    const std::vector<std::pair<int, int>> probes{{m0, m0}};
    return detail::assemble_report(
        traces, topo, probes, gamma, offset, stride, [&](ExcitationRow& row) {
            const double abar_t = abar.at(row.t);
            const double tt = static_cast<double>(row.t < 3 ? 3 : row.t);
            const double loglog = std::log(std::log(tt));
            const double numerator = static_cast<double>(h.at(row.t)) * std::log(tt) +
                                     std::pow(eta.at(row.t) * loglog, 2.0);
            row.ratio1 = numerator / abar_t;
            row.ratio2 = row.lambda_min > 0.0 ? abar_t / row.lambda_min
                                              : std::numeric_limits<double>::infinity();
        });
}

}  // namespace arxnet

#endif  // ARXNET_EXCITATION_HPP
