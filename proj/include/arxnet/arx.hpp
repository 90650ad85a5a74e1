// Copyright (c) 2026 arxnet contributors
// SPDX-License-Identifier: MIT

#ifndef ARXNET_ARX_HPP
#define ARXNET_ARX_HPP

/** @file
 * ARX system description, exogenous input / noise models, and the
 * network simulator producing per-sensor signal traces.
 *
 * Every sensor observes the same underlying ARX dynamics
 *
 *     y_{t+1,i} = b_1 y_{t,i} + ... + b_p0 y_{t+1-p0,i}
 *               + c_1 u_{t,i} + ... + c_q0 u_{t+1-q0,i} + w_{t+1,i}
 *
 * driven by its own input u_{.,i} and noise w_{.,i}.  Outputs are stored for
 * t = 0..T with y_0 = 0; references to negative time indices are zero.  The
 * regression vector of a candidate order pair (p, q) stacks the last p
 * outputs over the last q inputs with the same zero padding.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arxnet/common.hpp"

namespace arxnet {

// ---------------------------------------------------------------------------
// System
// ---------------------------------------------------------------------------

/// True plant: orders (p0, q0) >= (1, 1) and coefficient vectors b, c.
struct ArxSystem {
    int p0 = 0;
    int q0 = 0;
    Eigen::VectorXd b;  ///< output coefficients b_1..b_p0
    Eigen::VectorXd c;  ///< input coefficients c_1..c_q0

    void validate() const {
        if (p0 < 1 || q0 < 1) throw ValidationError("system orders must satisfy p0, q0 >= 1");
        if (b.size() != p0) throw ValidationError("b must have exactly p0 coefficients");
        if (c.size() != q0) throw ValidationError("c must have exactly q0 coefficients");
        if (!b.allFinite() || !c.allFinite())
            throw ValidationError("system coefficients must be finite");
        if (b(p0 - 1) == 0.0)
            throw ValidationError("leading-lag output coefficient b_p0 must be nonzero");
        if (c(q0 - 1) == 0.0)
            throw ValidationError("leading-lag input coefficient c_q0 must be nonzero");
    }
};

// ---------------------------------------------------------------------------
// Truncation growth schedules (bounds for heavy-tailed noise clamping)
// ---------------------------------------------------------------------------

/// Growth bound eta_i(t) used to clamp heavy-tailed noise draws.
struct EtaSchedule {
    enum class Kind { constant, power, sqrt_log } kind = Kind::constant;
    double value = 1.0;     ///< constant level or power/sqrt_log scale
    double exponent = 0.5;  ///< power kind only

    double at(long t) const {
        const double tt = static_cast<double>(t < 1 ? 1 : t);
        switch (kind) {
            case Kind::constant: return value;
            case Kind::power: return value * std::pow(tt, exponent);
            case Kind::sqrt_log: return value * std::sqrt(std::log(tt + 1.0));
        }
        throw ValidationError("unknown eta schedule kind");
    }

    void validate() const {
        if (!(value > 0.0)) throw ValidationError("eta schedule needs a positive scale");
        if (kind == Kind::power && !(exponent > 0.0))
            throw ValidationError("eta power schedule needs a positive exponent");
    }
};

// ---------------------------------------------------------------------------
// Input and noise models
// ---------------------------------------------------------------------------

/// Per-sensor exogenous input generator.
struct InputModel {
    enum class Kind { iid_gaussian, subspace_excited, constant, zero } kind = Kind::iid_gaussian;
    double sigma_u = 1.0;        ///< std dev (iid_gaussian) or pulse amplitude (subspace_excited)
    int modulus = 0;             ///< subspace_excited: period of the residue pattern
    std::vector<int> residues;   ///< subspace_excited: residues firing a pulse
    double value = 0.0;          ///< constant kind

    void validate() const {
        switch (kind) {
            case Kind::iid_gaussian:
                if (!(sigma_u > 0.0)) throw ValidationError("iid_gaussian input needs sigma_u > 0");
                return;
            case Kind::subspace_excited: {
                if (modulus < 1) throw ValidationError("subspace_excited input needs modulus >= 1");
                if (residues.empty())
                    throw ValidationError("subspace_excited input needs at least one residue");
                for (int r : residues)
                    if (r < 0 || r >= modulus)
                        throw ValidationError("subspace_excited residues must lie in [0, modulus)");
                if (!(sigma_u != 0.0))
                    throw ValidationError("subspace_excited input needs a nonzero amplitude");
                return;
            }
            case Kind::constant:
                if (!std::isfinite(value)) throw ValidationError("constant input must be finite");
                return;
            case Kind::zero:
                return;
        }
        throw ValidationError("unknown input model kind");
    }

    /// Draws u_t; deterministic kinds ignore the stream.
    double sample(long t, RandomStream& rng) const {
        switch (kind) {
            case Kind::iid_gaussian:
                return sigma_u * rng.gaussian();
            case Kind::subspace_excited: {
                const int r = static_cast<int>(t % modulus);
                for (int want : residues)
                    if (r == want) return sigma_u;
                return 0.0;
            }
            case Kind::constant:
                return value;
            case Kind::zero:
                return 0.0;
        }
        throw ValidationError("unknown input model kind");
    }
};

/// Per-sensor observation noise generator.
struct NoiseModel {
    enum class Kind { iid_gaussian, bounded_uniform, heavy_tailed_truncated } kind =
        Kind::iid_gaussian;
    double sigma_w = 1.0;  ///< std dev (iid_gaussian)
    double beta = 1.0;     ///< half-width (bounded_uniform)
    int dof = 3;           ///< degrees of freedom (heavy_tailed_truncated)
    EtaSchedule eta;       ///< clamp bound (heavy_tailed_truncated)

    void validate() const {
        switch (kind) {
            case Kind::iid_gaussian:
                if (!(sigma_w >= 0.0)) throw ValidationError("iid_gaussian noise needs sigma_w >= 0");
                return;
            case Kind::bounded_uniform:
                if (!(beta > 0.0)) throw ValidationError("bounded_uniform noise needs beta > 0");
                return;
            case Kind::heavy_tailed_truncated:
                if (dof < 1) throw ValidationError("heavy_tailed_truncated noise needs dof >= 1");
                eta.validate();
                return;
        }
        throw ValidationError("unknown noise model kind");
    }

    double sample(long t, RandomStream& rng) const {
        switch (kind) {
            case Kind::iid_gaussian:
                return sigma_w * rng.gaussian();
            case Kind::bounded_uniform:
                return rng.uniform(-beta, beta);
            case Kind::heavy_tailed_truncated: {
                const double bound = eta.at(t);
                return std::clamp(rng.student_t(dof), -bound, bound);
            }
        }
        throw ValidationError("unknown noise model kind");
    }
};

/// Bundle of per-sensor input and noise models.  A single model entry is
/// broadcast to every sensor; otherwise one entry per sensor is required.
struct SignalModels {
    std::vector<InputModel> inputs;
    std::vector<NoiseModel> noises;

    void validate(int n) const {
        if (inputs.empty() || noises.empty())
            throw ValidationError("signal models need at least one input and one noise entry");
        if (inputs.size() != 1 && inputs.size() != static_cast<std::size_t>(n))
            throw ValidationError("input models: provide one entry or one per sensor");
        if (noises.size() != 1 && noises.size() != static_cast<std::size_t>(n))
            throw ValidationError("noise models: provide one entry or one per sensor");
        for (const auto& m : inputs) m.validate();
        for (const auto& m : noises) m.validate();
    }

    const InputModel& input_for(int i) const {
        return inputs.size() == 1 ? inputs.front() : inputs[static_cast<std::size_t>(i)];
    }
    const NoiseModel& noise_for(int i) const {
        return noises.size() == 1 ? noises.front() : noises[static_cast<std::size_t>(i)];
    }
};

// ---------------------------------------------------------------------------
// Simulated traces
// ---------------------------------------------------------------------------

/**
 * Per-sensor signal histories y, u, w over t = 0..T.
 *
 * y[i](0) = 0 always; w[i](0) is unused and stored as 0; u[i](t) is defined
 * for t = 0..T (the final input is generated for completeness even though
 * only u_0..u_{T-1} can influence y_1..y_T).
 */
struct SensorTraces {
    int n = 0;
    long horizon = 0;
    std::vector<Eigen::VectorXd> y, u, w;

    /**
     * Regression vector phi_{t,i}(p, q) = [y_t, ..., y_{t+1-p},
     * u_t, ..., u_{t+1-q}] with zeros for negative time indices.
     */
    Eigen::VectorXd regressor(int i, long t, int p, int q) const {
        Eigen::VectorXd phi = Eigen::VectorXd::Zero(p + q);
        const auto& yi = y[static_cast<std::size_t>(i)];
        const auto& ui = u[static_cast<std::size_t>(i)];
        for (int k = 0; k < p; ++k) {
            const long idx = t - k;
            phi(k) = idx >= 0 ? yi(idx) : 0.0;
        }
        for (int k = 0; k < q; ++k) {
            const long idx = t - k;
            phi(p + k) = idx >= 0 ? ui(idx) : 0.0;
        }
        return phi;
    }

    /// Simulates every sensor for `horizon` steps from the zero state.
    ///
    /// Stream layout: sensor i draws inputs from stream i and noise from
    /// stream n + i, so traces are reproducible per sensor regardless of the
    /// evaluation order.
    static SensorTraces simulate(const ArxSystem& system, const SignalModels& signals, int n,
                                 long horizon, std::uint64_t seed) {
        system.validate();
        signals.validate(n);
        if (n < 1) throw ValidationError("simulate needs at least one sensor");
        if (horizon < 1) throw ValidationError("simulate needs horizon >= 1");

        SensorTraces tr;
        tr.n = n;
        tr.horizon = horizon;
        tr.y.assign(static_cast<std::size_t>(n), Eigen::VectorXd::Zero(horizon + 1));
        tr.u.assign(static_cast<std::size_t>(n), Eigen::VectorXd::Zero(horizon + 1));
        tr.w.assign(static_cast<std::size_t>(n), Eigen::VectorXd::Zero(horizon + 1));

        for (int i = 0; i < n; ++i) {
            RandomStream input_rng(seed, static_cast<std::uint64_t>(i));
            RandomStream noise_rng(seed, static_cast<std::uint64_t>(n + i));
            auto& yi = tr.y[static_cast<std::size_t>(i)];
            auto& ui = tr.u[static_cast<std::size_t>(i)];
            auto& wi = tr.w[static_cast<std::size_t>(i)];
            const InputModel& input = signals.input_for(i);
            const NoiseModel& noise = signals.noise_for(i);

            for (long t = 0; t <= horizon; ++t) ui(t) = input.sample(t, input_rng);
            for (long t = 1; t <= horizon; ++t) wi(t) = noise.sample(t, noise_rng);

            for (long t = 0; t < horizon; ++t) {
                double next = wi(t + 1);
                for (int k = 0; k < system.p0; ++k) {
                    const long idx = t - k;
                    if (idx >= 0) next += system.b(k) * yi(idx);
                }
                for (int k = 0; k < system.q0; ++k) {
                    const long idx = t - k;
                    if (idx >= 0) next += system.c(k) * ui(idx);
                }
                if (!std::isfinite(next))
                    throw NumericError("simulation diverged at sensor " + std::to_string(i + 1) +
                                       ", time " + std::to_string(t + 1));
                yi(t + 1) = next;
            }
        }
        return tr;
    }

    /// Writes all traces as CSV (header: sensor,t,y,u,w; sensors are 1-based).
    void to_csv(std::ostream& os) const {
        CsvWriter csv(os);
        csv.header({"sensor", "t", "y", "u", "w"});
        for (int i = 0; i < n; ++i)
            for (long t = 0; t <= horizon; ++t)
                csv.cell(i + 1)
                    .cell(t)
                    .cell(y[static_cast<std::size_t>(i)](t))
                    .cell(u[static_cast<std::size_t>(i)](t))
                    .cell(w[static_cast<std::size_t>(i)](t))
                    .end_row();
    }
};

}  // namespace arxnet

#endif  // ARXNET_ARX_HPP
