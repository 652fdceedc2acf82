#pragma once

// Reductions of the general interference model to the coherent, phased
// array and TDM cases. Each validator decodes the interferer through the
// full chain and compares one snapshot against the reduced closed form,
// which is evaluated by direct summation (no FFTs, no factored tensors).

#include <string>

#include "mimo_radar/signal_chain.hpp"

namespace mimo_radar {

enum class SpecialCase { Coherent, Phased, Tdm };

inline const char* to_string(SpecialCase s) {
    switch (s) {
        case SpecialCase::Coherent: return "coherent";
        case SpecialCase::Phased: return "phased";
        case SpecialCase::Tdm: return "tdm";
    }
    return "?";
}

struct SpecialCaseScenario {
    ChirpParams victim;
    ArrayGeometry geom;
    CodeMatrix victim_codes;
    InterfererTruth intf;
    DecodeOptions decode;
    long range_bin = 0;
    long doppler_bin = 0;
};

struct SpecialCaseReport {
    SpecialCase mode = SpecialCase::Coherent;
    double deviation = 0.0;      // max |chain - closed form| / max |closed form|
    double structure = 0.0;      // row spread (phased) or rank-one residual (tdm)
    double tolerance = 1e-6;
    bool passed = false;
    std::string detail;
};

/// alpha~_{l',k,m~}: coded complex interference amplitude at range bin l'
/// for every victim pulse k and interferer Tx m~ (K x M~), by direct sums.
inline CMatrix coded_interference_amplitude(const ChirpParams& victim, const ArrayGeometry& geom,
                                            const InterfererTruth& intf, long range_bin, long range_fft) {
    const InterfererDerived d = derive(victim, geom, intf);
    CMatrix amp = CMatrix::Zero(victim.pulses, intf.tx());
    const double lbin = static_cast<double>(range_bin) / static_cast<double>(range_fft);
    for (long kt = 0; kt < intf.pulses(); ++kt) {
        for (const PulseOverlap& ov : overlap_set(victim, intf, kt)) {
            const double delay = ov.tau_prime + d.tau;
            const double f_range =
                (intf.chirp.beta * delay + intf.velocity / victim.wavelength()) * victim.sample_interval;
            cdouble fast = 0.0;
            for (long l : lpf_gate(victim, intf.chirp, ov.tau_prime, d.tau)) {
                const double t = static_cast<double>(l) * victim.sample_interval;
                const double cycles = 0.5 * (intf.chirp.beta - victim.beta) * t * t - (f_range + lbin) * static_cast<double>(l);
                fast += unit_phasor(cycles);
            }
            const cdouble pulse = fast * unit_phasor(0.5 * intf.chirp.beta * delay * delay - victim.carrier * ov.tau_prime);
            for (long m = 0; m < intf.tx(); ++m) amp(ov.k, m) += intf.codes.entries(kt, m) * pulse;
        }
    }
    return amp * (intf.amplitude * unit_phasor(-victim.carrier * d.tau));
}

/// Closed-form decoded interference Tx signal a~'_t (length M) at (l', k').
inline CVector decoded_interference_tx(const SpecialCaseScenario& s) {
    const InterfererDerived d = derive(s.victim, s.geom, s.intf);
    const CMatrix amp = coded_interference_amplitude(s.victim, s.geom, s.intf, s.range_bin, s.decode.range_fft);
    const long m_count = s.victim_codes.tx();
    CVector tx_sum(s.intf.tx());
    for (long mt = 0; mt < s.intf.tx(); ++mt) {
        const cdouble w = s.intf.tx_weights ? (*s.intf.tx_weights)(mt) : cdouble(1.0);
        tx_sum(mt) = w * unit_phasor(-d.f_tx * static_cast<double>(mt));
    }
    const long used = s.decode.indexing == DopplerIndexing::PerTxSlot ? (s.victim.pulses / m_count) * m_count
                                                                      : s.victim.pulses;
    CVector out = CVector::Zero(m_count);
    for (long m = 0; m < m_count; ++m) {
        for (long k = 0; k < used; ++k) {
            const long p = s.decode.indexing == DopplerIndexing::PerTxSlot ? k / m_count : k;
            const cdouble kernel = std::conj(s.victim_codes.entries(k, m)) *
                                   unit_phasor(-d.f_doppler * static_cast<double>(k) -
                                               static_cast<double>(s.doppler_bin * p) / static_cast<double>(s.decode.doppler_fft));
            out(m) += kernel * (amp.row(k) * tx_sum)(0);
        }
    }
    return out;
}

namespace detail {

inline double relative_deviation(const CVector& got, const CVector& want) {
    const double scale = want.cwiseAbs().maxCoeff();
    const double diff = (got - want).cwiseAbs().maxCoeff();
    return scale > 0.0 ? diff / scale : diff;
}

inline bool same_chirp(const ChirpParams& a, const ChirpParams& b) {
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y)); };
    return close(a.beta, b.beta) && close(a.duration, b.duration) && close(a.pri, b.pri) && a.pulses == b.pulses;
}

inline bool is_one_hot_tdm(const CodeMatrix& c) {
    for (long k = 0; k < c.pulses(); ++k)
        for (long m = 0; m < c.tx(); ++m)
            if (c.entries(k, m) != cdouble(m == k % c.tx() ? 1.0 : 0.0)) return false;
    return true;
}

inline bool is_all_ones(const CodeMatrix& c) { return (c.entries.array() == cdouble(1.0)).all(); }

}  // namespace detail

inline void check_preconditions(SpecialCase mode, const SpecialCaseScenario& s) {
    validate(s.intf);
    if (s.victim_codes.pulses() != s.victim.pulses || s.victim_codes.tx() != s.geom.tx)
        throw InvalidArgumentError("victim codes must be K x M");
    switch (mode) {
        case SpecialCase::Coherent: {
            const InterfererDerived d = derive(s.victim, s.geom, s.intf);
            if (!detail::same_chirp(s.victim, s.intf.chirp)) throw InvalidArgumentError("coherent case needs equal chirp parameters");
            if (s.intf.tau_syn != 0.0) throw InvalidArgumentError("coherent case needs tau_syn = 0");
            if (s.intf.tx() != s.geom.tx || !s.intf.codes.entries.isApprox(s.victim_codes.entries, 0.0))
                throw InvalidArgumentError("coherent case needs the victim's own codes");
            if (s.intf.tx_weights) throw InvalidArgumentError("coherent case takes no Tx beamforming weights");
            const double beat = s.intf.chirp.beta * d.tau;
            if (!(beat > 0.0 && beat < s.victim.lpf_cutoff)) throw InvalidArgumentError("coherent beat must pass the LPF");
            if (s.decode.indexing != DopplerIndexing::Absolute) throw InvalidArgumentError("coherent case uses the full Doppler FFT");
            break;
        }
        case SpecialCase::Phased:
            if (!detail::is_all_ones(s.victim_codes) || !detail::is_all_ones(s.intf.codes))
                throw InvalidArgumentError("phased case needs all-ones codes on both radars");
            if (s.decode.indexing != DopplerIndexing::Absolute) throw InvalidArgumentError("phased case uses the full Doppler FFT");
            break;
        case SpecialCase::Tdm:
            if (!detail::is_one_hot_tdm(s.victim_codes) || !detail::is_one_hot_tdm(s.intf.codes))
                throw InvalidArgumentError("TDM case needs one-hot codes on both radars");
            if (s.decode.indexing != DopplerIndexing::PerTxSlot)
                throw InvalidArgumentError("TDM case needs the per-antenna Doppler FFT");
            break;
    }
}

inline SpecialCaseReport validate_special_case(SpecialCase mode, const SpecialCaseScenario& s, double tolerance = 1e-6) {
    check_preconditions(mode, s);
    const RawComponent raw = interference_component(s.victim, s.geom, s.intf);
    const RangeDopplerCube cube = decode_bins(raw, s.victim_codes, s.decode, {s.range_bin}, {s.doppler_bin});
    const CVector y = snapshot(cube, cube.range_bins.front(), cube.doppler_bins.front()).entries;
    const InterfererDerived d = derive(s.victim, s.geom, s.intf);
    const SteeringVector a_r = steering(s.geom.rx, d.f_rx);
    const long m_count = s.geom.tx;

    SpecialCaseReport rep;
    rep.mode = mode;
    rep.tolerance = tolerance;
    switch (mode) {
        case SpecialCase::Coherent: {
            // b^i e^{-j2pi(f~_t m + f~_r n)}, b^i = alpha~_{l'} sum_k e^{-j2pi(f~_d + k'/K)k}
            const long first = static_cast<long>(std::ceil(d.tau / s.victim.sample_interval));
            const long last = std::min(s.victim.samples - 1,
                                       static_cast<long>(std::floor(s.victim.duration / s.victim.sample_interval)));
            const double f_range = (s.intf.chirp.beta * d.tau + s.intf.velocity / s.victim.wavelength()) * s.victim.sample_interval;
            const double lbin = static_cast<double>(s.range_bin) / static_cast<double>(s.decode.range_fft);
            cdouble fast = 0.0;
            for (long l = first; l <= last; ++l)
                if (static_cast<double>(l) * s.victim.sample_interval > d.tau) fast += unit_phasor(-(f_range + lbin) * static_cast<double>(l));
            const cdouble alpha_l = s.intf.amplitude * unit_phasor(-s.victim.carrier * d.tau) *
                                    unit_phasor(0.5 * s.intf.chirp.beta * d.tau * d.tau) * fast;
            cdouble slow = 0.0;
            for (long k = 0; k < s.victim.pulses; ++k)
                slow += unit_phasor(-(d.f_doppler + static_cast<double>(s.doppler_bin) / static_cast<double>(s.decode.doppler_fft)) *
                                    static_cast<double>(k));
            const CVector want = (alpha_l * slow) * kron(steering(m_count, d.f_tx), a_r);
            rep.deviation = detail::relative_deviation(y, want);
            rep.passed = rep.deviation <= tolerance;
            rep.detail = "object-like structure b^i a_t(f~_t) x a_r(f~_r)";
            break;
        }
        case SpecialCase::Phased: {
            const CVector tx = decoded_interference_tx(s);
            const CVector want = kron(tx, a_r);
            rep.deviation = detail::relative_deviation(y, want);
            const CMatrix rows = reshape_virtual(y, m_count, s.geom.rx);
            double spread = 0.0;
            for (long m = 1; m < m_count; ++m) spread = std::max(spread, max_abs(rows.row(m) - rows.row(0)));
            rep.structure = max_abs(rows) > 0.0 ? spread / max_abs(rows) : spread;
            rep.passed = rep.deviation <= tolerance && rep.structure <= tolerance;
            rep.detail = "Fourier vector a~'_t a~_r, identical rows";
            break;
        }
        case SpecialCase::Tdm: {
            const CVector want = kron(decoded_interference_tx(s), a_r);
            rep.deviation = detail::relative_deviation(y, want);
            rep.structure = rank_one_residual(reshape_virtual(y, m_count, s.geom.rx));
            rep.passed = rep.deviation <= tolerance && rep.structure <= tolerance;
            rep.detail = "Kronecker structure a~'_t x a~_r under per-slot decode";
            break;
        }
    }
    if (!(max_abs(y) > 0.0)) {
        rep.passed = false;
        rep.detail += "; decoded interference is identically zero";
    }
    return rep;
}

/// Ready-made scenario per case with K pulses. The coherent interferer
/// sits exactly on Doppler bin k' = K/4 so the Hadamard cross terms vanish.
inline SpecialCaseScenario default_special_case_scenario(SpecialCase mode, long k) {
    SpecialCaseScenario s;
    s.victim.pulses = k;
    s.geom.tx = 4;
    s.geom.rx = 8;
    s.decode = {1024, k, DopplerIndexing::Absolute};
    s.intf.range = 2.3;
    s.intf.rx_angle_deg = -48.1;
    s.intf.tx_angle_deg = 12.0;
    s.intf.amplitude = cdouble(0.8, -0.3);
    s.intf.tx_spacing = 3.9e-3;
    switch (mode) {
        case SpecialCase::Coherent: {
            s.victim_codes = make_codes(CodeMode::DdmHadamard, k, s.geom.tx);
            s.intf.chirp = s.victim;
            s.intf.codes = s.victim_codes;
            s.intf.tx_spacing = s.geom.tx_spacing;
            s.doppler_bin = k / 4;
            // f~_d = f_c v~ T_PRI / c = -k'/K
            s.intf.velocity = -static_cast<double>(s.doppler_bin) / static_cast<double>(k) * kSpeedOfLight /
                              (s.victim.carrier * s.victim.pri);
            const InterfererDerived d = derive(s.victim, s.geom, s.intf);
            s.range_bin = range_bin_of((s.intf.chirp.beta * d.tau + s.intf.velocity / s.victim.wavelength()) *
                                           s.victim.sample_interval, s.decode.range_fft);
            break;
        }
        case SpecialCase::Phased:
        case SpecialCase::Tdm: {
            const bool tdm = mode == SpecialCase::Tdm;
            const long mt = 8;
            s.intf.velocity = -12.8;
            s.intf.chirp.beta = 12.4e12;
            s.intf.chirp.duration = 37.2e-6;
            s.intf.chirp.pri = 44.5e-6;
            s.intf.chirp.pulses = k;
            s.intf.tau_syn = 17.6e-6;
            s.victim_codes = make_codes(tdm ? CodeMode::Tdm : CodeMode::Phased, k, s.geom.tx);
            s.intf.codes = make_codes(tdm ? CodeMode::Tdm : CodeMode::Phased, k, mt);
            if (!tdm) {
                CVector w(mt);
                for (long i = 0; i < mt; ++i) w(i) = unit_phasor(0.05 * static_cast<double>(i));
                s.intf.tx_weights = w;
            }
            if (tdm) s.decode = {1024, std::max(1L, k / s.geom.tx), DopplerIndexing::PerTxSlot};
            // bin with the most interference energy
            const RawComponent raw = interference_component(s.victim, s.geom, s.intf);
            const RangeDopplerCube cube = range_doppler_decode(raw, s.victim_codes, s.decode);
            double best = -1.0;
            for (long l = 0; l < s.decode.range_fft; ++l)
                for (long kk = 0; kk < s.decode.doppler_fft; ++kk) {
                    const double e = std::norm(cube.channel(0, 0)(l, kk));
                    if (e > best) {
                        best = e;
                        s.range_bin = l;
                        s.doppler_bin = kk;
                    }
                }
            break;
        }
    }
    return s;
}

}  // namespace mimo_radar
