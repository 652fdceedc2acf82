#pragma once

// Victim receiver simulation. Object echoes and interference are produced
// in their sampled, dechirped, low-pass-filtered form a_n(l, k) and then
// pushed through the range FFT, slow-time decoding and Doppler FFT.
//
// Every noiseless component depends on the Rx index n only through a
// Fourier factor, so components are kept factored as g(l, k) * rx(n).
// Noise breaks that structure and lives in a full RawTensor.

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mimo_radar/array_math.hpp"
#include "mimo_radar/rng.hpp"
#include "mimo_radar/waveform.hpp"

namespace mimo_radar {

struct ObjectTruth {
    double range = 35.5;     // m
    double velocity = 0.0;   // m/s, radial
    double angle_deg = 0.0;  // far field: Tx angle == Rx angle
    cdouble amplitude = 1.0; // alpha
};

struct ObjectDerived {
    double tau = 0.0;      // 2R/c
    double f_range = 0.0;  // (beta tau + 2v/lambda) dT
    double f_doppler = 0.0;
    double f_tx = 0.0;
    double f_rx = 0.0;
    long first_sample = 0; // ceil(tau / dT)
    long last_sample = -1; // floor(T / dT), clipped to L - 1
    double beat = 0.0;     // beta tau, Hz

    bool sample_set_empty() const { return first_sample > last_sample; }
};

inline ObjectDerived derive(const ChirpParams& v, const ArrayGeometry& g, const ObjectTruth& o) {
    if (!(o.range > 0.0)) throw InvalidArgumentError("object range must be positive");
    ObjectDerived d;
    d.tau = 2.0 * o.range / kSpeedOfLight;
    d.beat = v.beta * d.tau;
    d.f_range = (d.beat + 2.0 * o.velocity / v.wavelength()) * v.sample_interval;
    d.f_doppler = 2.0 * v.carrier * v.pri * o.velocity / kSpeedOfLight;
    d.f_tx = g.tx_frequency(o.angle_deg);
    d.f_rx = g.rx_frequency(o.angle_deg);
    d.first_sample = std::max(0L, static_cast<long>(std::ceil(d.tau / v.sample_interval)));
    d.last_sample = std::min(v.samples - 1, static_cast<long>(std::floor(v.duration / v.sample_interval)));
    return d;
}

struct InterfererTruth {
    double range = 1.8;          // m
    double velocity = 0.0;       // m/s
    double tx_angle_deg = 0.0;   // w.r.t. interferer boresight
    double rx_angle_deg = 0.0;   // w.r.t. victim boresight
    cdouble amplitude = 1.0;
    ChirpParams chirp;           // beta~, T~, T~_PRI, K~ (sampling fields unused)
    double tau_syn = 0.0;        // s
    CodeMatrix codes = make_codes(CodeMode::Phased, 1, 1); // K~ x M~
    double tx_spacing = 3.9e-3;  // d~_t
    std::optional<CVector> tx_weights; // phased-array Tx beamformer w~

    long tx() const { return codes.tx(); }
    long pulses() const { return codes.pulses(); }
};

inline void validate(const InterfererTruth& i) {
    if (!(i.range > 0.0)) throw InvalidArgumentError("interferer range must be positive");
    if (i.codes.pulses() != i.chirp.pulses)
        throw InvalidArgumentError("interferer code rows (" + std::to_string(i.codes.pulses()) +
                                   ") != pulses (" + std::to_string(i.chirp.pulses) + ")");
    if (i.tx_weights && i.tx_weights->size() != i.codes.tx())
        throw InvalidArgumentError("interferer tx_weights length != M~");
}

struct PulseOverlap {
    long k = 0;              // victim pulse
    double tau_prime = 0.0;  // offset of the interfering pulse relative to pulse k
};

/// Victim pulses k that can dechirp interfering pulse k~.
inline std::vector<PulseOverlap> overlap_set(const ChirpParams& victim, const InterfererTruth& intf, long k_tilde) {
    if (k_tilde < 0 || k_tilde >= intf.pulses())
        throw InvalidArgumentError("interfering pulse index out of range");
    const double start = static_cast<double>(k_tilde) * intf.chirp.pri + intf.tau_syn;
    std::vector<PulseOverlap> out;
    const long lo = std::max(0L, static_cast<long>(std::floor((start - victim.pri) / victim.pri)));
    const long hi = std::min(victim.pulses - 1, static_cast<long>(std::ceil((start + intf.chirp.pri) / victim.pri)));
    for (long k = lo; k <= hi; ++k) {
        const double tp = start - static_cast<double>(k) * victim.pri;
        // slack so equal PRIs do not pick up the neighbouring pulse from rounding
        const double eps = 1e-9 * std::max(victim.pri, intf.chirp.pri);
        if (-intf.chirp.pri + eps < tp && tp < victim.pri - eps) out.push_back({k, tp});
    }
    return out;
}

/// Fast-time samples of victim pulse k that carry interference after the
/// ideal instantaneous-frequency low-pass gate.
inline std::vector<long> lpf_gate(const ChirpParams& victim, const ChirpParams& intf, double tau_prime,
                                  double tau_tilde) {
    std::vector<long> out;
    const double delay = tau_prime + tau_tilde;
    const double upper = std::min(victim.duration, delay + intf.duration);
    for (long l = 0; l < victim.samples; ++l) {
        const double t = static_cast<double>(l) * victim.sample_interval;
        const double beat = intf.beta * delay - (intf.beta - victim.beta) * t;
        if (0.0 < beat && beat < victim.lpf_cutoff && delay < t && t < upper) out.push_back(l);
    }
    return out;
}

/// a_n(l, k) = fast_slow(l, k) * rx(n).
struct RawComponent {
    CMatrix fast_slow; // L x K
    CVector rx;        // N
};

/// Full sampled tensor, one L x K matrix per Rx channel.
struct RawTensor {
    std::vector<CMatrix> channels;

    long rx() const { return static_cast<long>(channels.size()); }
    long samples() const { return channels.empty() ? 0 : static_cast<long>(channels.front().rows()); }
    long pulses() const { return channels.empty() ? 0 : static_cast<long>(channels.front().cols()); }

    static RawTensor zeros(long n, long l, long k) {
        RawTensor t;
        t.channels.assign(static_cast<std::size_t>(n), CMatrix::Zero(l, k));
        return t;
    }

    RawTensor& operator+=(const RawTensor& other) {
        if (other.channels.size() != channels.size()) throw InvalidDimensionError("raw tensor channel mismatch");
        for (std::size_t n = 0; n < channels.size(); ++n) channels[n] += other.channels[n];
        return *this;
    }

    RawTensor& operator+=(const RawComponent& c) {
        if (c.rx.size() != rx()) throw InvalidDimensionError("component Rx size mismatch");
        for (std::size_t n = 0; n < channels.size(); ++n) channels[n] += c.fast_slow * c.rx(static_cast<Eigen::Index>(n));
        return *this;
    }
};

inline RawTensor materialize(const RawComponent& c) {
    RawTensor t = RawTensor::zeros(c.rx.size(), c.fast_slow.rows(), c.fast_slow.cols());
    t += c;
    return t;
}

struct ObjectEcho {
    RawComponent component;
    bool filtered_out = false; // beat frequency above the LPF cutoff
};

/// Object echo component. Beat frequencies at or above f_L are removed by
/// the LPF; the echo is then all zeros and flagged.
inline ObjectEcho object_component(const ChirpParams& victim, const ArrayGeometry& geom, const CodeMatrix& codes,
                                   const ObjectTruth& obj) {
    if (codes.pulses() != victim.pulses || codes.tx() != geom.tx)
        throw InvalidDimensionError("victim codes must be K x M");
    const ObjectDerived d = derive(victim, geom, obj);
    ObjectEcho echo;
    echo.component.fast_slow = CMatrix::Zero(victim.samples, victim.pulses);
    echo.component.rx = steering(geom.rx, d.f_rx);
    if (d.beat >= victim.lpf_cutoff) {
        echo.filtered_out = true;
        return echo;
    }
    if (obj.amplitude == 0.0 || d.sample_set_empty()) return echo;

    const cdouble alpha_tau = obj.amplitude * unit_phasor(-victim.carrier * d.tau) *
                              unit_phasor(0.5 * victim.beta * d.tau * d.tau);
    const SteeringVector tx = steering(geom.tx, d.f_tx);
    CVector slow(victim.pulses);
    for (long k = 0; k < victim.pulses; ++k) {
        cdouble s = 0.0;
        for (long m = 0; m < geom.tx; ++m) s += codes.entries(k, m) * tx(m);
        slow(k) = s * unit_phasor(-d.f_doppler * static_cast<double>(k));
    }
    CVector fast = CVector::Zero(victim.samples);
    for (long l = d.first_sample; l <= d.last_sample; ++l)
        fast(l) = alpha_tau * unit_phasor(-d.f_range * static_cast<double>(l));
    echo.component.fast_slow = fast * slow.transpose();
    return echo;
}

inline RawTensor simulate_object(const ChirpParams& victim, const ArrayGeometry& geom, const CodeMatrix& codes,
                                 const ObjectTruth& obj) {
    return materialize(object_component(victim, geom, codes, obj).component);
}

struct InterfererDerived {
    double tau = 0.0;       // R~/c
    double f_doppler = 0.0; // f_c v~ T_PRI / c
    double f_tx = 0.0;
    double f_rx = 0.0;
};

inline InterfererDerived derive(const ChirpParams& victim, const ArrayGeometry& geom, const InterfererTruth& i) {
    InterfererDerived d;
    d.tau = i.range / kSpeedOfLight;
    d.f_doppler = victim.carrier * i.velocity * victim.pri / kSpeedOfLight;
    d.f_tx = spatial_frequency(i.tx_spacing, i.tx_angle_deg, geom.wavelength);
    d.f_rx = geom.rx_frequency(i.rx_angle_deg);
    return d;
}

/// Interference component seen by the victim receiver after LO mixing,
/// ideal LPF gating and sampling.
inline RawComponent interference_component(const ChirpParams& victim, const ArrayGeometry& geom,
                                           const InterfererTruth& intf) {
    validate(intf);
    const InterfererDerived d = derive(victim, geom, intf);
    RawComponent out{CMatrix::Zero(victim.samples, victim.pulses), steering(geom.rx, d.f_rx)};
    if (intf.amplitude == 0.0) return out;

    const long mt = intf.tx();
    const SteeringVector tx = steering(mt, d.f_tx);
    const cdouble common = intf.amplitude * unit_phasor(-victim.carrier * d.tau);
    const double dbeta = intf.chirp.beta - victim.beta;
    const double inv_lambda = 1.0 / victim.wavelength();

    for (long kt = 0; kt < intf.pulses(); ++kt) {
        cdouble tx_sum = 0.0;
        for (long m = 0; m < mt; ++m) {
            const cdouble w = intf.tx_weights ? (*intf.tx_weights)(m) : cdouble(1.0);
            tx_sum += intf.codes.entries(kt, m) * w * tx(m);
        }
        if (tx_sum == 0.0) continue;
        for (const PulseOverlap& ov : overlap_set(victim, intf, kt)) {
            const std::vector<long> gate = lpf_gate(victim, intf.chirp, ov.tau_prime, d.tau);
            if (gate.empty()) continue;
            const double delay = ov.tau_prime + d.tau;
            const double f_range = (intf.chirp.beta * delay + intf.velocity * inv_lambda) * victim.sample_interval;
            const cdouble pulse_term = common * tx_sum * unit_phasor(0.5 * intf.chirp.beta * delay * delay) *
                                       unit_phasor(-victim.carrier * ov.tau_prime) *
                                       unit_phasor(-d.f_doppler * static_cast<double>(ov.k));
            for (long l : gate) {
                const double t = static_cast<double>(l) * victim.sample_interval;
                out.fast_slow(l, ov.k) += pulse_term * unit_phasor(0.5 * dbeta * t * t) *
                                          unit_phasor(-f_range * static_cast<double>(l));
            }
        }
    }
    return out;
}

inline RawTensor simulate_interference(const ChirpParams& victim, const ArrayGeometry& geom,
                                       const InterfererTruth& intf) {
    return materialize(interference_component(victim, geom, intf));
}

inline void add_noise(RawTensor& raw, double sigma2, Rng& rng) {
    for (CMatrix& ch : raw.channels)
        for (Eigen::Index k = 0; k < ch.cols(); ++k)
            for (Eigen::Index l = 0; l < ch.rows(); ++l) ch(l, k) += complex_normal(rng, sigma2);
}

// ---------------------------------------------------------------------------
// Range / Doppler decoding

/// How the slow-time index enters the Doppler transform. TDM uses the
/// per-antenna slot index floor(k / M) so each Tx sees floor(K/M) pulses.
enum class DopplerIndexing { Absolute, PerTxSlot };

struct DecodeOptions {
    long range_fft = 0;
    long doppler_fft = 0;
    DopplerIndexing indexing = DopplerIndexing::Absolute;
};

/// y_{m,n}(l', k') over a (possibly partial) set of range and Doppler bins.
/// `range_bins` / `doppler_bins` label the stored rows / columns.
struct RangeDopplerCube {
    long tx = 0;
    long rx = 0;
    long range_fft = 0;
    long doppler_fft = 0;
    std::vector<long> range_bins;
    std::vector<long> doppler_bins;
    std::vector<CMatrix> data; // index m * rx + n

    const CMatrix& channel(long m, long n) const { return data[static_cast<std::size_t>(m * rx + n)]; }
    CMatrix& channel(long m, long n) { return data[static_cast<std::size_t>(m * rx + n)]; }

    long range_index(long bin) const { return label_index(range_bins, bin, "range"); }
    long doppler_index(long bin) const { return label_index(doppler_bins, bin, "Doppler"); }

    cdouble at(long m, long n, long range_bin, long doppler_bin) const {
        return channel(m, n)(range_index(range_bin), doppler_index(doppler_bin));
    }

    RangeDopplerCube& operator+=(const RangeDopplerCube& o) {
        if (o.tx != tx || o.rx != rx || o.range_bins != range_bins || o.doppler_bins != doppler_bins)
            throw InvalidDimensionError("cube layouts differ");
        for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
        return *this;
    }

private:
    static long label_index(const std::vector<long>& labels, long bin, const char* axis) {
        // full cubes store bins 0..size-1 in order
        if (bin >= 0 && bin < static_cast<long>(labels.size()) && labels[static_cast<std::size_t>(bin)] == bin)
            return bin;
        const auto it = std::find(labels.begin(), labels.end(), bin);
        if (it == labels.end())
            throw InvalidArgumentError(std::string(axis) + " bin " + std::to_string(bin) + " not in cube");
        return static_cast<long>(it - labels.begin());
    }
};

struct Snapshot {
    CVector entries; // length M*N, m-major
    long range_bin = 0;
    long doppler_bin = 0;
};

inline Snapshot snapshot(const RangeDopplerCube& cube, long range_bin, long doppler_bin) {
    const long li = cube.range_index(range_bin);
    const long ki = cube.doppler_index(doppler_bin);
    Snapshot s{CVector(cube.tx * cube.rx), range_bin, doppler_bin};
    for (long m = 0; m < cube.tx; ++m)
        for (long n = 0; n < cube.rx; ++n) s.entries(m * cube.rx + n) = cube.channel(m, n)(li, ki);
    return s;
}

inline std::vector<long> all_bins(long size) {
    std::vector<long> v(static_cast<std::size_t>(size));
    for (long i = 0; i < size; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

inline long wrap_bin(long bin, long size) { return ((bin % size) + size) % size; }

namespace detail {

inline bool is_full(const std::vector<long>& bins, long size) {
    if (static_cast<long>(bins.size()) != size) return false;
    for (long i = 0; i < size; ++i)
        if (bins[static_cast<std::size_t>(i)] != i) return false;
    return true;
}

/// Column-wise forward DFT (negative exponent, unscaled) of an L x K block,
/// zero padded to nfft, evaluated at the requested bins.
inline CMatrix range_transform(const CMatrix& x, long nfft, const std::vector<long>& bins) {
    const long rows = x.rows();
    const long cols = x.cols();
    CMatrix out(static_cast<Eigen::Index>(bins.size()), cols);
    if (is_full(bins, nfft) || static_cast<long>(bins.size()) * 4 > nfft) {
        Eigen::FFT<double> fft;
        std::vector<cdouble> in(static_cast<std::size_t>(nfft)), spec;
        for (long k = 0; k < cols; ++k) {
            std::fill(in.begin(), in.end(), cdouble(0.0));
            for (long l = 0; l < rows; ++l) in[static_cast<std::size_t>(l)] = x(l, k);
            fft.fwd(spec, in);
            for (std::size_t b = 0; b < bins.size(); ++b) out(static_cast<Eigen::Index>(b), k) = spec[static_cast<std::size_t>(bins[b])];
        }
        return out;
    }
    CMatrix basis(static_cast<Eigen::Index>(bins.size()), rows);
    for (std::size_t b = 0; b < bins.size(); ++b)
        for (long l = 0; l < rows; ++l)
            basis(static_cast<Eigen::Index>(b), l) =
                unit_phasor(-static_cast<double>((bins[b] * l) % nfft) / static_cast<double>(nfft));
    return basis * x;
}

inline long slow_index(long k, long m_count, DopplerIndexing indexing) {
    return indexing == DopplerIndexing::PerTxSlot ? k / m_count : k;
}

/// Decode Tx m of a range spectrum X (rows x K): sum_k X(., k) c*_{k,m} e^{-j2pi k' p(k)/K_fft}.
inline CMatrix doppler_transform(const CMatrix& x, const CodeMatrix& codes, long m, const DecodeOptions& opt,
                                 const std::vector<long>& bins) {
    const long k_count = x.cols();
    const long m_count = codes.tx();
    const long nfft = opt.doppler_fft;
    const long used = opt.indexing == DopplerIndexing::PerTxSlot ? (k_count / m_count) * m_count : k_count;
    if (is_full(bins, nfft)) {
        Eigen::FFT<double> fft;
        CMatrix out(x.rows(), nfft);
        std::vector<cdouble> in(static_cast<std::size_t>(nfft)), spec;
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            std::fill(in.begin(), in.end(), cdouble(0.0));
            for (long k = 0; k < used; ++k) {
                const cdouble c = std::conj(codes.entries(k, m));
                if (c == 0.0) continue;
                in[static_cast<std::size_t>(slow_index(k, m_count, opt.indexing))] += x(r, k) * c;
            }
            fft.fwd(spec, in);
            for (long b = 0; b < nfft; ++b) out(r, b) = spec[static_cast<std::size_t>(b)];
        }
        return out;
    }
    CMatrix weights = CMatrix::Zero(k_count, static_cast<Eigen::Index>(bins.size()));
    for (long k = 0; k < used; ++k) {
        const cdouble c = std::conj(codes.entries(k, m));
        if (c == 0.0) continue;
        const long p = slow_index(k, m_count, opt.indexing);
        for (std::size_t b = 0; b < bins.size(); ++b)
            weights(k, static_cast<Eigen::Index>(b)) =
                c * unit_phasor(-static_cast<double>((bins[b] * p) % nfft) / static_cast<double>(nfft));
    }
    return x * weights;
}

inline void check_decode(long samples, long pulses, const CodeMatrix& codes, const DecodeOptions& opt) {
    if (codes.pulses() != pulses)
        throw InvalidDimensionError("code rows (" + std::to_string(codes.pulses()) + ") != pulses (" +
                                    std::to_string(pulses) + ")");
    if (opt.range_fft < samples) throw InvalidDimensionError("range FFT size smaller than fast-time samples");
    const long slots = opt.indexing == DopplerIndexing::PerTxSlot ? pulses / codes.tx() : pulses;
    if (opt.doppler_fft < slots || slots < 1) throw InvalidDimensionError("Doppler FFT size smaller than slow-time length");
}

inline RangeDopplerCube empty_cube(long m, long n, const DecodeOptions& opt, std::vector<long> range_bins,
                                   std::vector<long> doppler_bins) {
    RangeDopplerCube cube;
    cube.tx = m;
    cube.rx = n;
    cube.range_fft = opt.range_fft;
    cube.doppler_fft = opt.doppler_fft;
    for (long& b : range_bins) b = wrap_bin(b, opt.range_fft);
    for (long& b : doppler_bins) b = wrap_bin(b, opt.doppler_fft);
    cube.range_bins = std::move(range_bins);
    cube.doppler_bins = std::move(doppler_bins);
    cube.data.assign(static_cast<std::size_t>(m * n), CMatrix());
    return cube;
}

}  // namespace detail

/// Decode a full raw tensor at selected bins (labels are wrapped modulo the
/// FFT sizes).
inline RangeDopplerCube decode_bins(const RawTensor& raw, const CodeMatrix& codes, const DecodeOptions& opt,
                                    std::vector<long> range_bins, std::vector<long> doppler_bins) {
    detail::check_decode(raw.samples(), raw.pulses(), codes, opt);
    RangeDopplerCube cube = detail::empty_cube(codes.tx(), raw.rx(), opt, std::move(range_bins), std::move(doppler_bins));
    for (long n = 0; n < raw.rx(); ++n) {
        const CMatrix x = detail::range_transform(raw.channels[static_cast<std::size_t>(n)], opt.range_fft, cube.range_bins);
        for (long m = 0; m < cube.tx; ++m) cube.channel(m, n) = detail::doppler_transform(x, codes, m, opt, cube.doppler_bins);
    }
    return cube;
}

/// Decode a factored component; the Rx factor is applied after the
/// transforms, which commute with it.
inline RangeDopplerCube decode_bins(const RawComponent& c, const CodeMatrix& codes, const DecodeOptions& opt,
                                    std::vector<long> range_bins, std::vector<long> doppler_bins) {
    detail::check_decode(c.fast_slow.rows(), c.fast_slow.cols(), codes, opt);
    const long n_count = c.rx.size();
    RangeDopplerCube cube = detail::empty_cube(codes.tx(), n_count, opt, std::move(range_bins), std::move(doppler_bins));
    const CMatrix x = detail::range_transform(c.fast_slow, opt.range_fft, cube.range_bins);
    for (long m = 0; m < cube.tx; ++m) {
        const CMatrix y = detail::doppler_transform(x, codes, m, opt, cube.doppler_bins);
        for (long n = 0; n < n_count; ++n) cube.channel(m, n) = y * c.rx(n);
    }
    return cube;
}

/// Range spectrum of one L x K block at the given bins.
inline CMatrix range_spectrum(const CMatrix& fast_slow, long range_fft, const std::vector<long>& bins) {
    return detail::range_transform(fast_slow, range_fft, bins);
}

/// Slow-time decode of range spectra already evaluated at `range_bins`
/// (one bins x K matrix per Rx channel).
inline RangeDopplerCube decode_range_spectra(const std::vector<CMatrix>& spectra, const CodeMatrix& codes,
                                             const DecodeOptions& opt, std::vector<long> range_bins,
                                             std::vector<long> doppler_bins) {
    if (spectra.empty()) throw InvalidDimensionError("no Rx channels");
    RangeDopplerCube cube = detail::empty_cube(codes.tx(), static_cast<long>(spectra.size()), opt, std::move(range_bins),
                                               std::move(doppler_bins));
    for (std::size_t n = 0; n < spectra.size(); ++n) {
        const CMatrix& x = spectra[n];
        if (x.rows() != static_cast<long>(cube.range_bins.size()) || x.cols() != codes.pulses())
            throw InvalidDimensionError("range spectrum must be bins x K");
        for (long m = 0; m < cube.tx; ++m)
            cube.channel(m, static_cast<long>(n)) = detail::doppler_transform(x, codes, m, opt, cube.doppler_bins);
    }
    return cube;
}

/// White raw noise (variance sigma2 per sample, L samples per pulse) as
/// seen after the range DFT at `bins`. Draws the exact joint Gaussian law
/// sigma2 B B^H of the bins, B the DFT rows, instead of the L raw samples.
/// Fails when the bins are linearly dependent over L samples.
inline std::vector<CMatrix> range_domain_noise(long rx, long samples, long pulses, long range_fft,
                                               const std::vector<long>& bins, double sigma2, Rng& rng) {
    const long nb = static_cast<long>(bins.size());
    CMatrix gram(nb, nb);
    for (long i = 0; i < nb; ++i)
        for (long j = 0; j < nb; ++j) {
            cdouble acc = 0.0;
            for (long l = 0; l < samples; ++l)
                acc += unit_phasor(-static_cast<double>(((bins[static_cast<std::size_t>(i)] - bins[static_cast<std::size_t>(j)]) * l) % range_fft) /
                                   static_cast<double>(range_fft));
            gram(i, j) = acc;
        }
    Eigen::LLT<CMatrix> llt(gram);
    if (llt.info() != Eigen::Success) throw SingularSubspaceError("range bins are dependent over the fast-time window", 0.0);
    const CMatrix factor = llt.matrixL();
    std::vector<CMatrix> out;
    for (long n = 0; n < rx; ++n) {
        CMatrix w(nb, pulses);
        for (long k = 0; k < pulses; ++k)
            for (long i = 0; i < nb; ++i) w(i, k) = complex_normal(rng, sigma2);
        out.push_back(factor * w);
    }
    return out;
}

/// Full range-Doppler decode: range FFT, slow-time decoding with conj
/// codes and Doppler FFT. Rectangular window, no scaling.
inline RangeDopplerCube range_doppler_decode(const RawTensor& raw, const CodeMatrix& codes, const DecodeOptions& opt) {
    return decode_bins(raw, codes, opt, all_bins(opt.range_fft), all_bins(opt.doppler_fft));
}

inline RangeDopplerCube range_doppler_decode(const RawComponent& c, const CodeMatrix& codes, const DecodeOptions& opt) {
    return decode_bins(c, codes, opt, all_bins(opt.range_fft), all_bins(opt.doppler_fft));
}

/// Range bin where an echo with normalized range frequency f_r peaks:
/// f_r + l'/L_fft = 0 (mod 1).
inline long range_bin_of(double f_range, long range_fft) {
    return wrap_bin(static_cast<long>(std::lround(-f_range * static_cast<double>(range_fft))), range_fft);
}

/// Doppler bin where f_d + k'/K_fft = 0 (mod 1).
inline long doppler_bin_of(double f_doppler, long doppler_fft) {
    return wrap_bin(static_cast<long>(std::lround(-f_doppler * static_cast<double>(doppler_fft))), doppler_fft);
}

// ---------------------------------------------------------------------------
// Direct synthetic snapshots

inline Snapshot synth_object_snapshot(cdouble b, double angle_deg, const ArrayGeometry& geom) {
    return {b * kron(geom.tx_steering(angle_deg), geom.rx_steering(angle_deg)), 0, 0};
}

inline Snapshot synth_interference_snapshot(const CVector& tx_signal, double rx_angle_deg, const ArrayGeometry& geom) {
    if (tx_signal.size() != geom.tx)
        throw InvalidDimensionError("interference Tx signal length " + std::to_string(tx_signal.size()) +
                                    " != M = " + std::to_string(geom.tx));
    return {kron(tx_signal, geom.rx_steering(rx_angle_deg)), 0, 0};
}

/// Exponential correlation [rho^|i-j|].
inline CMatrix exponential_correlation(long m, double rho) {
    if (!(std::abs(rho) < 1.0)) throw InvalidArgumentError("|rho| must be < 1");
    CMatrix r(m, m);
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < m; ++j) r(i, j) = std::pow(rho, std::abs(i - j));
    return r;
}

/// Draw from CN(0, cov) using a Cholesky factor of cov (PSD, eigen
/// fallback when Cholesky fails).
class ComplexGaussian {
public:
    explicit ComplexGaussian(const CMatrix& cov) {
        Eigen::LLT<CMatrix> llt(cov);
        if (llt.info() == Eigen::Success) {
            factor_ = llt.matrixL();
        } else {
            Eigen::SelfAdjointEigenSolver<CMatrix> es(cov);
            const RVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
            factor_ = es.eigenvectors() * ev.cast<cdouble>().asDiagonal();
        }
    }

    CVector draw(Rng& rng) const {
        CVector w(factor_.cols());
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = complex_normal(rng, 1.0);
        return factor_ * w;
    }

private:
    CMatrix factor_;
};

inline CVector complex_noise(long size, double sigma2, Rng& rng) {
    CVector z(size);
    for (long i = 0; i < size; ++i) z(i) = complex_normal(rng, sigma2);
    return z;
}

}  // namespace mimo_radar
