#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "mimo_radar/array_math.hpp"

namespace mimo_radar {

/// FMCW timing of one radar. Times in seconds, rates in Hz/s.
struct ChirpParams {
    double beta = 15e12;            // chirp rate
    double duration = 30.7e-6;      // T, active chirp
    double pri = 37.7e-6;           // T_PRI
    double carrier = kSpeedOfLight / 3.9e-3;
    double lpf_cutoff = 15e6;       // f_L
    double sample_interval = 60e-9; // complex ADC interval
    long samples = 512;             // L, fast-time samples per pulse
    long pulses = 256;              // K, pulses per CPI

    double bandwidth() const { return beta * duration; }
    double wavelength() const { return kSpeedOfLight / carrier; }
};

inline void validate(const ChirpParams& p, const std::string& who = "chirp") {
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgumentError(who + "." + name + " must be positive");
    };
    positive(p.beta, "beta");
    positive(p.duration, "duration");
    positive(p.pri, "pri");
    positive(p.carrier, "carrier");
    positive(p.lpf_cutoff, "lpf_cutoff");
    positive(p.sample_interval, "sample_interval");
    if (p.samples < 1) throw InvalidArgumentError(who + ".samples must be >= 1");
    if (p.pulses < 1) throw InvalidArgumentError(who + ".pulses must be >= 1");
    if (p.duration > p.pri) throw InvalidArgumentError(who + ": duration exceeds pri");
    if (static_cast<double>(p.samples) * p.sample_interval > p.pri)
        throw InvalidArgumentError(who + ": samples * sample_interval exceeds pri");
}

struct ArrayGeometry {
    long tx = 4;                 // M
    long rx = 8;                 // N
    double tx_spacing = 15.6e-3; // d_t
    double rx_spacing = 1.95e-3; // d_r
    double wavelength = 3.9e-3;

    long virtual_size() const { return tx * rx; }
    double tx_frequency(double angle_deg) const { return spatial_frequency(tx_spacing, angle_deg, wavelength); }
    double rx_frequency(double angle_deg) const { return spatial_frequency(rx_spacing, angle_deg, wavelength); }
    SteeringVector tx_steering(double angle_deg) const { return steering(tx, tx_frequency(angle_deg)); }
    SteeringVector rx_steering(double angle_deg) const { return steering(rx, rx_frequency(angle_deg)); }
};

inline void validate(const ArrayGeometry& g, const std::string& who = "array") {
    if (g.tx < 1 || g.rx < 1) throw InvalidArgumentError(who + ": element counts must be >= 1");
    if (!(g.tx_spacing > 0.0) || !(g.rx_spacing > 0.0) || !(g.wavelength > 0.0))
        throw InvalidArgumentError(who + ": spacings and wavelength must be positive");
}

enum class CodeMode { DdmHadamard, DdmChu, Tdm, Phased };

inline const char* to_string(CodeMode mode) {
    switch (mode) {
        case CodeMode::DdmHadamard: return "hadamard";
        case CodeMode::DdmChu: return "chu";
        case CodeMode::Tdm: return "tdm";
        case CodeMode::Phased: return "phased";
    }
    return "?";
}

inline CodeMode code_mode_from_string(const std::string& s) {
    if (s == "hadamard" || s == "ddm_hadamard") return CodeMode::DdmHadamard;
    if (s == "chu" || s == "ddm_chu") return CodeMode::DdmChu;
    if (s == "tdm") return CodeMode::Tdm;
    if (s == "phased") return CodeMode::Phased;
    throw InvalidArgumentError("unknown code mode '" + s + "'");
}

/// Slow-time Tx-pulse codes, K x M (row = pulse, column = Tx antenna).
struct CodeMatrix {
    CodeMode mode = CodeMode::Phased;
    CMatrix entries;

    long pulses() const { return static_cast<long>(entries.rows()); }
    long tx() const { return static_cast<long>(entries.cols()); }
};

inline bool is_power_of_two(long k) { return k > 0 && (k & (k - 1)) == 0; }

/// Zadoff-Chu root for Tx m.
inline long chu_root(long m) { return 2 * m + 1; }

inline CodeMatrix make_codes(CodeMode mode, long k, long m) {
    if (m < 1) throw CodeConstructionError("M must be >= 1");
    if (k < m) throw CodeConstructionError("K = " + std::to_string(k) + " must be >= M = " + std::to_string(m));
    CodeMatrix c{mode, CMatrix::Zero(k, m)};
    switch (mode) {
        case CodeMode::DdmHadamard: {
            if (!is_power_of_two(k))
                throw CodeConstructionError("Hadamard codes need K a power of two, got " + std::to_string(k));
            // Sylvester: H(i, j) = (-1)^popcount(i & j)
            for (long i = 0; i < k; ++i)
                for (long j = 0; j < m; ++j) c.entries(i, j) = (std::popcount(static_cast<unsigned long>(i & j)) % 2) ? -1.0 : 1.0;
            break;
        }
        case CodeMode::DdmChu: {
            for (long j = 0; j < m; ++j) {
                const long u = chu_root(j);
                if (std::gcd(u, k) != 1)
                    throw CodeConstructionError("Chu root " + std::to_string(u) + " is not coprime to K = " +
                                                std::to_string(k));
                for (long i = 0; i < k; ++i) {
                    // exp(j pi u i (i+1) / K); reduce the integer phase mod 2K first
                    const long num = (u * ((i * (i + 1)) % (2 * k))) % (2 * k);
                    c.entries(i, j) = unit_phasor(static_cast<double>(num) / (2.0 * static_cast<double>(k)));
                }
            }
            break;
        }
        case CodeMode::Tdm:
            for (long i = 0; i < k; ++i) c.entries(i, i % m) = 1.0;
            break;
        case CodeMode::Phased:
            c.entries.setOnes();
            break;
    }
    return c;
}

/// 4K uniformly spaced normalized frequencies in [0, 1).
inline std::vector<double> default_crosscorr_grid(long k) {
    std::vector<double> grid(static_cast<std::size_t>(4 * k));
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = static_cast<double>(i) / static_cast<double>(grid.size());
    return grid;
}

/// max over m != m' and f of |sum_k c_{k,m} c*_{k,m'} e^{-j 2 pi f k}| / K.
inline double code_crosscorr(const CodeMatrix& c, const std::vector<double>& f_grid) {
    if (f_grid.empty()) throw InvalidArgumentError("code_crosscorr needs a nonempty frequency grid");
    const long k = c.pulses();
    const long m = c.tx();
    if (m < 2) return 0.0;
    double worst = 0.0;
    CVector product(k);
    for (long a = 0; a < m; ++a) {
        for (long b = 0; b < m; ++b) {
            if (a == b) continue;
            product = c.entries.col(a).cwiseProduct(c.entries.col(b).conjugate());
            for (double f : f_grid) {
                cdouble acc = 0.0;
                for (long i = 0; i < k; ++i) acc += product(i) * unit_phasor(-f * static_cast<double>(i));
                worst = std::max(worst, std::abs(acc) / static_cast<double>(k));
            }
        }
    }
    return worst;
}

inline double code_crosscorr(const CodeMatrix& c) { return code_crosscorr(c, default_crosscorr_grid(c.pulses())); }

/// Source chirp e^{j pi beta t^2} gated to [0, T].
inline cdouble chirp_sample(const ChirpParams& p, double t) {
    if (t < 0.0 || t > p.duration) return 0.0;
    const double phase = std::numbers::pi * p.beta * t * t;
    return {std::cos(phase), std::sin(phase)};
}

}  // namespace mimo_radar
