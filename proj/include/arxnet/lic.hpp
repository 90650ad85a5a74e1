// Copyright (c) 2026 arxnet contributors
// SPDX-License-Identifier: MIT

#ifndef ARXNET_LIC_HPP
#define ARXNET_LIC_HPP

/** @file
 * Local information criterion: recursive fit statistics, penalty schedules,
 * and the order-selection rules for both the known-bound search (joint grid
 * or decoupled axis scans) and the unknown-bound search with its growing
 * candidate range.
 *
 * The fit term sigma_{t,i}(p,q,beta) obeys the network recursion
 *
 *     sigma_{t,i} = sum_j a_ij ( sigma_{t-1,j} + [y_{t,j} - beta' phi_{t-1,j}]^2 )
 *
 * for a FIXED beta.  Because the squared residual is a quadratic form in
 * beta, the whole family over all beta is carried by three sufficient
 * statistics per sensor — a scalar c, a vector b and a Gram matrix G, each
 * diffused with the same recursion — and evaluated as
 *
 *     sigma_{t,i}(p,q,beta) = c - 2 beta' b[idx] + beta' G[idx,idx] beta,
 *
 * where idx projects the maximal-order window onto candidate (p,q).  The
 * criterion is L_{t,i}(p,q) = sigma_{t,i}(p,q, theta_{t,i}(p,q)) + (p+q) a_t.
 */

#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "arxnet/common.hpp"
#include "arxnet/graph.hpp"

namespace arxnet {

// ---------------------------------------------------------------------------
// Penalty and lag schedules
// ---------------------------------------------------------------------------

/**
 * Penalty sequence a_t (or its unknown-bound analogue).  Kinds:
 *   - power:   a_t = t^rho with 0 < rho < 1
 *   - loglog:  a_t = log(log(t + 3)) (shifted so a_1 > 0)
 *   - polylog: a_t = (log_base(t))^exponent, evaluated at max(t, 2)
 *   - table:   explicit values a_1..a_K (t beyond the table is an error)
 * All kinds are positive, nondecreasing and diverge; constant schedules are
 * rejected at validation.
 */
struct GainSchedule {
    enum class Kind { power, loglog, polylog, table } kind = Kind::power;
    double rho = 0.6;         ///< power kind
    double exponent = 3.5;    ///< polylog kind
    double log_base = 10.0;   ///< polylog kind
    std::vector<double> table;

    void validate() const {
        switch (kind) {
            case Kind::power:
                if (!(rho > 0.0 && rho < 1.0))
                    throw ValidationError("power schedule needs 0 < rho < 1");
                return;
            case Kind::loglog:
                return;
            case Kind::polylog:
                if (!(exponent > 0.0)) throw ValidationError("polylog schedule needs exponent > 0");
                if (!(log_base > 1.0)) throw ValidationError("polylog schedule needs log_base > 1");
                return;
            case Kind::table: {
                if (table.size() < 2)
                    throw ValidationError("table schedule needs at least two values");
                for (std::size_t k = 0; k < table.size(); ++k) {
                    if (!(table[k] > 0.0) || !std::isfinite(table[k]))
                        throw ValidationError("table schedule values must be positive and finite");
                    if (k > 0 && table[k] < table[k - 1])
                        throw ValidationError("table schedule must be nondecreasing");
                }
                if (!(table.back() > table.front()))
                    throw ValidationError("table schedule must not be constant (a_t must diverge)");
                return;
            }
        }
        throw ValidationError("unknown gain schedule kind");
    }

    double at(long t) const {
        if (t < 1) throw ValidationError("gain schedule evaluated at t < 1");
        switch (kind) {
            case Kind::power:
                return std::pow(static_cast<double>(t), rho);
            case Kind::loglog:
                return std::log(std::log(static_cast<double>(t) + 3.0));
            case Kind::polylog: {
                const double tt = static_cast<double>(t < 2 ? 2 : t);
                return std::pow(std::log(tt) / std::log(log_base), exponent);
            }
            case Kind::table:
                if (static_cast<std::size_t>(t) > table.size())
                    throw ValidationError("table schedule exhausted at t = " + std::to_string(t));
                return table[static_cast<std::size_t>(t - 1)];
        }
        throw ValidationError("unknown gain schedule kind");
    }
};

/// Candidate-order cap for the unknown-bound search: floor(ln t), natural log.
inline int range_cap(long t) {
    if (t < 1) throw ValidationError("range_cap evaluated at t < 1");
    if (t < 3) return 0;  // ln t < 1.099 for t <= 2
    return static_cast<int>(std::floor(std::log(static_cast<double>(t))));
}

/**
 * Regression-lag cap h_t = ceil((log_base t)^alpha) with alpha > 1, evaluated
 * at max(t, 2) so it stays positive.
 */
struct HSchedule {
    double alpha = 1.5;
    double log_base = 10.0;

    void validate() const {
        if (!(alpha > 1.0)) throw ValidationError("lag schedule needs alpha > 1");
        if (!(log_base > 1.0)) throw ValidationError("lag schedule needs log_base > 1");
    }

    int at(long t) const {
        if (t < 1) throw ValidationError("lag schedule evaluated at t < 1");
        const double tt = static_cast<double>(t < 2 ? 2 : t);
        const double v = std::pow(std::log(tt) / std::log(log_base), alpha);
        return static_cast<int>(std::ceil(v));
    }
};

// ---------------------------------------------------------------------------
// Sufficient statistics for the fit term
// ---------------------------------------------------------------------------

/// Recursive per-sensor sufficient statistics (c, b, G) over a maximal
/// candidate window (p_max, q_max).
class SigmaStats {
public:
    SigmaStats(int n, int p_max, int q_max)
        : n_(n), p_max_(p_max), q_max_(q_max) {
        if (n < 1) throw ValidationError("SigmaStats: need at least one sensor");
        if (p_max < 0 || q_max < 0) throw ValidationError("SigmaStats: negative window");
        const int d = p_max + q_max;
        c_.assign(static_cast<std::size_t>(n), 0.0);
        b_.assign(static_cast<std::size_t>(n), Eigen::VectorXd::Zero(d));
        g_.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(d, d));
    }

    int sensors() const { return n_; }
    int p_max() const { return p_max_; }
    int q_max() const { return q_max_; }
    long t() const { return t_; }

    double c(int i) const { return c_.at(static_cast<std::size_t>(i)); }
    const Eigen::VectorXd& b(int i) const { return b_.at(static_cast<std::size_t>(i)); }
    const Eigen::MatrixXd& G(int i) const { return g_.at(static_cast<std::size_t>(i)); }

    /// Positions of candidate (p,q) inside the maximal window (0-based):
    /// the first p output lags and the first q input lags.
    static std::vector<int> window_index(int p, int q, int p_max) {
        std::vector<int> idx;
        idx.reserve(static_cast<std::size_t>(p + q));
        for (int k = 0; k < p; ++k) idx.push_back(k);
        for (int k = 0; k < q; ++k) idx.push_back(p_max + k);
        return idx;
    }

    /**
     * One network round: each sensor accumulates its increment from the data
     * pair (phis[j], ys[j]) — the maximal-window regressor at the previous
     * time and the current output — then fuses over its closed neighbourhood
     * in ascending index order.
     */
    void update(const Topology& topo, const std::vector<Eigen::VectorXd>& phis,
                const Eigen::VectorXd& ys) {
        if (topo.n != n_ || static_cast<int>(phis.size()) != n_ || ys.size() != n_)
            throw ValidationError("SigmaStats::update: sensor count mismatch");
        const int d = p_max_ + q_max_;

        std::vector<double> c_inc(static_cast<std::size_t>(n_));
        std::vector<Eigen::VectorXd> b_inc(static_cast<std::size_t>(n_));
        std::vector<Eigen::MatrixXd> g_inc(static_cast<std::size_t>(n_));
        for (int j = 0; j < n_; ++j) {
            const Eigen::VectorXd& phi = phis[static_cast<std::size_t>(j)];
            if (phi.size() != d)
                throw ValidationError("SigmaStats::update: regressor must use the maximal window");
            const double y = ys(j);
            c_inc[static_cast<std::size_t>(j)] = c_[static_cast<std::size_t>(j)] + y * y;
            b_inc[static_cast<std::size_t>(j)] = b_[static_cast<std::size_t>(j)] + phi * y;
            g_inc[static_cast<std::size_t>(j)] =
                g_[static_cast<std::size_t>(j)] + phi * phi.transpose();
        }

        std::vector<double> c_new(static_cast<std::size_t>(n_), 0.0);
        std::vector<Eigen::VectorXd> b_new(static_cast<std::size_t>(n_),
                                           Eigen::VectorXd::Zero(d));
        std::vector<Eigen::MatrixXd> g_new(static_cast<std::size_t>(n_),
                                           Eigen::MatrixXd::Zero(d, d));
        for (int i = 0; i < n_; ++i) {
            for (int j : topo.closed_neighbourhoods[static_cast<std::size_t>(i)]) {
                const double a = topo.weights(i, j);
                c_new[static_cast<std::size_t>(i)] += a * c_inc[static_cast<std::size_t>(j)];
                b_new[static_cast<std::size_t>(i)] += a * b_inc[static_cast<std::size_t>(j)];
                g_new[static_cast<std::size_t>(i)] += a * g_inc[static_cast<std::size_t>(j)];
            }
            g_new[static_cast<std::size_t>(i)] =
                ((g_new[static_cast<std::size_t>(i)] + g_new[static_cast<std::size_t>(i)].transpose()) *
                 0.5)
                    .eval();
        }
        c_ = std::move(c_new);
        b_ = std::move(b_new);
        g_ = std::move(g_new);
        ++t_;
    }

    /// Evaluates sigma_{t,i}(p, q, beta) by projecting the maximal window.
    double eval(int i, int p, int q, const Eigen::VectorXd& beta) const {
        if (i < 0 || i >= n_) throw ValidationError("SigmaStats::eval: sensor out of range");
        if (p < 0 || q < 0 || p > p_max_ || q > q_max_)
            throw ValidationError("SigmaStats::eval: candidate exceeds the maximal window");
        if (beta.size() != p + q)
            throw ValidationError("SigmaStats::eval: beta dimension must equal p + q");

        const std::vector<int> idx = window_index(p, q, p_max_);
        const Eigen::VectorXd& bi = b_[static_cast<std::size_t>(i)];
        const Eigen::MatrixXd& gi = g_[static_cast<std::size_t>(i)];
        double value = c_[static_cast<std::size_t>(i)];
        for (std::size_t a = 0; a < idx.size(); ++a) {
            value -= 2.0 * beta(static_cast<Eigen::Index>(a)) * bi(idx[a]);
            for (std::size_t bidx = 0; bidx < idx.size(); ++bidx)
                value += beta(static_cast<Eigen::Index>(a)) * gi(idx[a], idx[bidx]) *
                         beta(static_cast<Eigen::Index>(bidx));
        }
        return value;
    }

private:
    int n_, p_max_, q_max_;
    long t_ = 0;
    std::vector<double> c_;
    std::vector<Eigen::VectorXd> b_;
    std::vector<Eigen::MatrixXd> g_;
};

/// Criterion value: fit term plus complexity penalty.
inline double lic_value(double sigma, int p, int q, double a_t) {
    return sigma + static_cast<double>(p + q) * a_t;
}

// ---------------------------------------------------------------------------
// Order selection
// ---------------------------------------------------------------------------

enum class SearchMode { joint, decoupled };

/// Outcome of one selection pass at a fixed time.
struct OrderEstimate {
    int p_hat = 0;
    int q_hat = 0;
    int m_hat = -1;     ///< unknown-bound search only; -1 when not applicable
    bool warm_up = false;  ///< unknown-bound search with an empty range beyond s = 0
    double l_selected = 0.0;
    /// Every (p, q, L) the selection examined, in scan order.
    std::vector<std::tuple<int, int, double>> criterion_values;
};

namespace detail {

/// Tie-break: strictly smaller L wins; on exact ties prefer smaller p+q,
/// then smaller p.
inline bool improves(double l_cand, int p_cand, int q_cand, double l_best, int p_best,
                     int q_best) {
    if (l_cand < l_best) return true;
    if (l_cand > l_best) return false;
    const int sum_cand = p_cand + q_cand;
    const int sum_best = p_best + q_best;
    if (sum_cand != sum_best) return sum_cand < sum_best;
    return p_cand < p_best;
}

}  // namespace detail

/**
 * Known-bound selection over M = {0..p_star} x {0..q_star}.
 *
 * joint mode scans the full grid; decoupled mode scans the two axis slices
 * p in 1..p_star at fixed q_star and q in 1..q_star at fixed p_star.
 * `criterion` is any callable double(int p, int q).
 */
template <typename CriterionFn>
OrderEstimate select_order_case1(int p_star, int q_star, CriterionFn&& criterion,
                                 SearchMode mode) {
    if (p_star < 1 || q_star < 1)
        throw ValidationError("select_order_case1: bounds must satisfy p*, q* >= 1");

    OrderEstimate est;
    if (mode == SearchMode::joint) {
        bool first = true;
        double l_best = 0.0;
        for (int p = 0; p <= p_star; ++p)
            for (int q = 0; q <= q_star; ++q) {
                const double l = criterion(p, q);
                est.criterion_values.emplace_back(p, q, l);
                if (first || detail::improves(l, p, q, l_best, est.p_hat, est.q_hat)) {
                    first = false;
                    l_best = l;
                    est.p_hat = p;
                    est.q_hat = q;
                }
            }
        est.l_selected = l_best;
        return est;
    }

    // Decoupled: p-axis at fixed q_star, then q-axis at fixed p_star.
    double l_best_p = 0.0;
    for (int p = 1; p <= p_star; ++p) {
        const double l = criterion(p, q_star);
        est.criterion_values.emplace_back(p, q_star, l);
        if (p == 1 || l < l_best_p) {
            l_best_p = l;
            est.p_hat = p;
        }
    }
    double l_best_q = 0.0;
    for (int q = 1; q <= q_star; ++q) {
        const double l = criterion(p_star, q);
        est.criterion_values.emplace_back(p_star, q, l);
        if (q == 1 || l < l_best_q) {
            l_best_q = l;
            est.q_hat = q;
        }
    }
    est.l_selected = criterion(est.p_hat, est.q_hat);
    return est;
}

/**
 * Unknown-bound selection at time t.  The candidate range is 0..range_cap(t);
 * stage one picks m_hat on the diagonal, stage two picks p_hat on the row
 * (p, m_hat) for 0 <= p <= m_hat, stage three picks q_hat on (p_hat, q) for
 * 0 <= q <= m_hat.  Ties prefer the smaller index at every stage.
 */
template <typename CriterionFn>
OrderEstimate select_order_case2(long t, CriterionFn&& criterion) {
    const int cap = range_cap(t);

    OrderEstimate est;
    est.warm_up = (cap == 0);

    int m_hat = 0;
    double l_m = 0.0;
    for (int s = 0; s <= cap; ++s) {
        const double l = criterion(s, s);
        est.criterion_values.emplace_back(s, s, l);
        if (s == 0 || l < l_m) {
            l_m = l;
            m_hat = s;
        }
    }
    est.m_hat = m_hat;

    int p_hat = 0;
    double l_p = 0.0;
    for (int p = 0; p <= m_hat; ++p) {
        const double l = criterion(p, m_hat);
        est.criterion_values.emplace_back(p, m_hat, l);
        if (p == 0 || l < l_p) {
            l_p = l;
            p_hat = p;
        }
    }
    est.p_hat = p_hat;

    int q_hat = 0;
    double l_q = 0.0;
    for (int q = 0; q <= m_hat; ++q) {
        const double l = criterion(p_hat, q);
        est.criterion_values.emplace_back(p_hat, q, l);
        if (q == 0 || l < l_q) {
            l_q = l;
            q_hat = q;
        }
    }
    est.q_hat = q_hat;
    est.l_selected = l_q;
    return est;
}

}  // namespace arxnet

#endif  // ARXNET_LIC_HPP
