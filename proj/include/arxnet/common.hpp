// Copyright (c) 2026 arxnet contributors
// SPDX-License-Identifier: MIT

#ifndef ARXNET_COMMON_HPP
#define ARXNET_COMMON_HPP

/** @file
 * Shared infrastructure for the arxnet library: error taxonomy, deterministic
 * random number generation, and CSV formatting helpers.
 *
 * Everything in arxnet is deterministic given a configuration and a seed:
 * random draws come from fixed-stream mt19937_64 engines with explicitly
 * constructed transforms, and all floating-point output is rendered with
 * shortest round-trip formatting.  Two runs of the same build with the same
 * inputs produce byte-identical artifacts.
 */

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace arxnet {

/// Configuration or precondition violation (maps to process exit code 1).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numeric breakdown at runtime: non-finite signals, loss of positive
/// definiteness, eigenvalues below the clamp tolerance (exit code 2).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A redundant consistency check disagreed with the primary computation
/// beyond its pinned tolerance (exit code 3).
class OracleMismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic random number generation
// ---------------------------------------------------------------------------

/// splitmix64 step; used to derive independent stream seeds from (seed, id).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/**
 * Deterministic random stream.
 *
 * mt19937_64 supplies the bits; the uniform and Gaussian transforms are
 * spelled out here rather than taken from `<random>` distributions because
 * the standard leaves distribution algorithms implementation-defined and the
 * library promises byte-identical output across standard libraries.
 */
class RandomStream {
public:
    /// Stream `stream_id` of the experiment-level seed.
    RandomStream(std::uint64_t seed, std::uint64_t stream_id)
        : engine_(splitmix64(seed ^ splitmix64(stream_id))) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller on explicit uniforms.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // 1 - uniform01() lies in (0, 1], keeping the logarithm finite.
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Student-t with `dof` degrees of freedom (heavy-tailed draws).
    double student_t(int dof) {
        double s = 0.0;
        for (int k = 0; k < dof; ++k) {
            const double z = gaussian();
            s += z * z;
        }
        return gaussian() / std::sqrt(s / dof);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// CSV formatting
// ---------------------------------------------------------------------------

/// Shortest round-trip decimal rendering of a double (deterministic).
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw NumericError("format_double: conversion failed");
    return std::string(buf, ptr);
}

/// Minimal CSV row writer: mandatory header first, then typed cells.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(const std::vector<std::string>& names) {
        write_row_(names);
    }

    CsvWriter& cell(const std::string& s) {
        row_.push_back(s);
        return *this;
    }
    CsvWriter& cell(double v) { return cell(format_double(v)); }
    CsvWriter& cell(int v) { return cell(std::to_string(v)); }
    CsvWriter& cell(long v) { return cell(std::to_string(v)); }
    CsvWriter& cell(std::size_t v) { return cell(std::to_string(v)); }

    void end_row() {
        write_row_(row_);
        row_.clear();
    }

private:
    void write_row_(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) os_ << ',';
            os_ << cells[k];
        }
        os_ << '\n';
    }

    std::ostream& os_;
    std::vector<std::string> row_;
};

/// Relative discrepancy used by the runtime identity checks:
/// |a-b| scaled by 1 + max magnitude, so it behaves absolutely near zero.
inline double relative_gap(double a, double b) {
    return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace arxnet

#endif  // ARXNET_COMMON_HPP
