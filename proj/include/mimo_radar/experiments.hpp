#pragma once

// Monte Carlo engine behind the CLI: synthetic ROC trials, realistic-mode
// heatmaps and output-interference-power runs.
//
// Every trial or run draws from substream(seed, stream, index), so results
// do not depend on the thread count or on scheduling.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mimo_radar/detectors.hpp"
#include "mimo_radar/estimation.hpp"
#include "mimo_radar/scenario.hpp"
#include "mimo_radar/signal_chain.hpp"
#include "mimo_radar/theory.hpp"

namespace mimo_radar {

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs fn(i) for i in [0, n) on up to `threads` workers. The first
/// exception is rethrown after all workers stop.
template <class F>
void parallel_for(long n, unsigned threads, F&& fn) {
    if (n <= 0) return;
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (long i = next++; i < n && !failed; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Substream ids.
inline constexpr std::uint64_t kStreamSynthetic = 0x5359;
inline constexpr std::uint64_t kStreamPerturbation = 0x5045;
inline constexpr std::uint64_t kStreamNoise = 0x4e4f;
inline constexpr std::uint64_t kStreamOip = 0x4f49;

inline std::uint64_t stream_for(std::uint64_t base, double value) {
    return splitmix64(base ^ std::bit_cast<std::uint64_t>(value));
}

// ---------------------------------------------------------------------------
// Synthetic snapshot model

struct SyntheticSetup {
    CVector a_t;
    CVector a_r;
    cdouble b;
    double sigma2 = 1.0;
    std::vector<double> sigma_tilde2;
    std::vector<CMatrix> correlation; // R_t,q
    std::vector<ComplexGaussian> samplers;
    InterferenceSideInfo side;        // exact EINRs
    CMatrix r_tilde;                  // exact normalized covariance
};

inline SyntheticSetup synthetic_setup(const ScenarioConfig& cfg, double inr_db) {
    if (cfg.mode != ScenarioMode::Synthetic) throw ConfigError("synthetic experiment needs a synthetic scenario");
    SyntheticSetup s;
    s.sigma2 = cfg.sigma2();
    s.a_t = cfg.geom.tx_steering(cfg.object_angle_deg);
    s.a_r = cfg.geom.rx_steering(cfg.object_angle_deg);
    s.b = std::sqrt(s.sigma2 * db_to_power(cfg.snr_db));
    const long q = static_cast<long>(cfg.synthetic_interferers.size());
    s.side.sigma2 = s.sigma2;
    s.side.a_r_tilde = CMatrix(cfg.geom.rx, q);
    s.side.lambda = RVector(q);
    std::vector<CMatrix> tx_cov;
    for (long i = 0; i < q; ++i) {
        const SyntheticInterferer& it = cfg.synthetic_interferers[static_cast<std::size_t>(i)];
        const double st2 = s.sigma2 * db_to_power(inr_db + it.inr_offset_db);
        s.sigma_tilde2.push_back(st2);
        s.correlation.push_back(exponential_correlation(cfg.geom.tx, it.rho));
        tx_cov.push_back(st2 * s.correlation.back());
        s.samplers.emplace_back(tx_cov.back());
        s.side.a_r_tilde.col(i) = cfg.geom.rx_steering(it.angle_deg);
        s.side.lambda(i) = h2_from_cov(tx_cov.back(), s.a_t) / s.sigma2;
    }
    const long mn = cfg.geom.virtual_size();
    s.r_tilde = q > 0 ? build_rtilde_est(tx_cov, s.side.a_r_tilde, s.sigma2) : CMatrix(CMatrix::Identity(mn, mn));
    return s;
}

/// Statistic samples under H0 and H1 for each detector.
struct SyntheticSamples {
    std::vector<Detector> detectors;
    std::vector<std::vector<double>> h0;
    std::vector<std::vector<double>> h1;
    std::vector<double> lambda; // closed-form noncentrality with exact statistics
    long lcmv_indefinite = 0;   // trials whose perturbed covariance was not positive definite
    double inr_db = 0.0;
    double sigma2_pert = 0.0;
};

struct SyntheticOptions {
    long trials = 10000;
    std::uint64_t seed = 1;
    double sigma2_pert = 0.0;
    unsigned threads = default_threads();
};

inline std::vector<double> synthetic_noncentralities(const SyntheticSetup& s, const std::vector<Detector>& dets) {
    std::vector<double> out;
    for (Detector d : dets) out.push_back(noncentrality(d, s.b, s.sigma2, s.a_t, s.a_r, &s.side, &s.r_tilde));
    return out;
}

/// Per trial: a~'_t,q ~ CN(0, sigma~_q^2 R_t,q) and noise are redrawn, the
/// geometry stays fixed. H0 and H1 share the same draws. With
/// sigma2_pert > 0 the covariance handed to LCMV and the h^2 handed to GS
/// are perturbed with a fresh E every trial, from a separate substream.
inline SyntheticSamples simulate_synthetic(const ScenarioConfig& cfg, double inr_db, const std::vector<Detector>& dets,
                                           const SyntheticOptions& opt) {
    if (opt.trials < 1) throw InvalidArgumentError("trials must be >= 1");
    const SyntheticSetup s = synthetic_setup(cfg, inr_db);
    SyntheticSamples out;
    out.detectors = dets;
    out.inr_db = inr_db;
    out.sigma2_pert = opt.sigma2_pert;
    out.lambda = synthetic_noncentralities(s, dets);
    out.h0.assign(dets.size(), std::vector<double>(static_cast<std::size_t>(opt.trials)));
    out.h1 = out.h0;
    std::vector<char> indefinite(static_cast<std::size_t>(opt.trials), 0);
    const CVector a = kron(s.a_t, s.a_r);
    const long q = static_cast<long>(s.samplers.size());
    const std::uint64_t stream = stream_for(kStreamSynthetic, inr_db);
    const std::uint64_t pert_stream = stream_for(kStreamPerturbation ^ stream, opt.sigma2_pert);

    parallel_for(opt.trials, opt.threads, [&](long t) {
        Rng rng = substream(opt.seed, stream, static_cast<std::uint64_t>(t));
        std::vector<CVector> intf;
        CVector y0 = CVector::Zero(a.size());
        for (long i = 0; i < q; ++i) {
            intf.push_back(kron(s.samplers[static_cast<std::size_t>(i)].draw(rng), CVector(s.side.a_r_tilde.col(i))));
            y0 += intf.back();
        }
        y0 += complex_noise(a.size(), s.sigma2, rng);
        const CVector y1 = y0 + s.b * a;

        InterferenceSideInfo gs_side = s.side;
        CMatrix r_lcmv = s.r_tilde;
        bool pd_ok = true;
        if (opt.sigma2_pert > 0.0 && q > 0) {
            Rng prng = substream(opt.seed, pert_stream, static_cast<std::uint64_t>(t));
            std::vector<CMatrix> est;
            for (long i = 0; i < q; ++i) {
                est.push_back(perturb_cov(s.correlation[static_cast<std::size_t>(i)], s.sigma_tilde2[static_cast<std::size_t>(i)],
                                          opt.sigma2_pert, prng));
                gs_side.lambda(i) = std::max(0.0, h2_from_cov(est.back(), s.a_t) / s.sigma2);
            }
            r_lcmv = build_rtilde_est(est, s.side.a_r_tilde, s.sigma2);
            pd_ok = Eigen::LLT<CMatrix>(r_lcmv).info() == Eigen::Success;
        }
        indefinite[static_cast<std::size_t>(t)] = pd_ok ? 0 : 1;

        for (std::size_t d = 0; d < dets.size(); ++d) {
            auto eval = [&](const CVector& y) {
                switch (dets[d]) {
                    case Detector::Clairvoyant: return t_clairvoyant(y, s.a_t, s.a_r, intf, s.sigma2);
                    case Detector::Rs: return t_rs(y, s.a_t, s.a_r, s.side.a_r_tilde, s.sigma2);
                    case Detector::Gs: return t_gs(y, s.a_t, s.a_r, gs_side);
                    case Detector::Lcmv:
                        return pd_ok ? t_lcmv(y, s.a_t, s.a_r, r_lcmv, s.sigma2)
                                     : t_lcmv_unchecked(y, s.a_t, s.a_r, r_lcmv, s.sigma2);
                }
                return 0.0;
            };
            out.h0[d][static_cast<std::size_t>(t)] = eval(y0);
            out.h1[d][static_cast<std::size_t>(t)] = eval(y1);
        }
    });
    for (char c : indefinite) out.lcmv_indefinite += c;
    return out;
}

inline double exceed_fraction(const std::vector<double>& v, double gamma) {
    long n = 0;
    for (double x : v) n += x > gamma ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(v.size());
}

/// Wilson score interval half-width for a binomial proportion.
inline double wilson_halfwidth(double p, long n, double z = 1.96) {
    const double nn = static_cast<double>(n);
    const double z2 = z * z;
    return z / (1.0 + z2 / nn) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
}

/// Threshold giving an empirical false-alarm rate of pfa on the H0 samples.
inline double empirical_threshold(std::vector<double> h0, double pfa) {
    if (h0.empty()) throw InvalidArgumentError("no H0 samples");
    std::sort(h0.begin(), h0.end());
    const double pos = (1.0 - pfa) * static_cast<double>(h0.size());
    const long idx = std::clamp(static_cast<long>(std::ceil(pos)) - 1, 0L, static_cast<long>(h0.size()) - 1);
    return h0[static_cast<std::size_t>(idx)];
}

struct RocCurve {
    Detector detector = Detector::Gs;
    double inr_db = 0.0;
    double lambda = 0.0;
    long trials = 0;
    std::vector<double> gamma;
    std::vector<double> pfa_theory;
    std::vector<double> pfa_empirical;
    std::vector<double> pd_theory;
    std::vector<double> pd_empirical;
    std::vector<double> ci_halfwidth; // Wilson 95% on pd_empirical
};

inline std::vector<RocCurve> roc_from_samples(const SyntheticSamples& s, const std::vector<double>& pfa_grid) {
    std::vector<RocCurve> out;
    for (std::size_t d = 0; d < s.detectors.size(); ++d) {
        const DetectionCurve th = curve(s.detectors[d], s.lambda[d], pfa_grid);
        RocCurve c;
        c.detector = s.detectors[d];
        c.inr_db = s.inr_db;
        c.lambda = s.lambda[d];
        c.trials = static_cast<long>(s.h0[d].size());
        for (std::size_t i = 0; i < th.gamma_grid.size(); ++i) {
            const double g = th.gamma_grid[i];
            const double pd_emp = exceed_fraction(s.h1[d], g);
            c.gamma.push_back(g);
            c.pfa_theory.push_back(th.pfa[i]);
            c.pfa_empirical.push_back(exceed_fraction(s.h0[d], g));
            c.pd_theory.push_back(th.pd[i]);
            c.pd_empirical.push_back(pd_emp);
            c.ci_halfwidth.push_back(wilson_halfwidth(pd_emp, c.trials));
        }
        out.push_back(std::move(c));
    }
    return out;
}

inline std::vector<RocCurve> run_roc(const ScenarioConfig& cfg, double inr_db, const std::vector<Detector>& dets,
                                     const SyntheticOptions& opt) {
    return roc_from_samples(simulate_synthetic(cfg, inr_db, dets, opt), default_pfa_grid(cfg.pfa_points));
}

/// Analytical curves only, for every configured INR.
inline std::vector<DetectionCurve> theory_curves(const ScenarioConfig& cfg, double inr_db, const std::vector<Detector>& dets) {
    const SyntheticSetup s = synthetic_setup(cfg, inr_db);
    const std::vector<double> lambda = synthetic_noncentralities(s, dets);
    std::vector<DetectionCurve> out;
    for (std::size_t d = 0; d < dets.size(); ++d) out.push_back(curve(dets[d], lambda[d], default_pfa_grid(cfg.pfa_points)));
    return out;
}

// ---------------------------------------------------------------------------
// Realistic (full signal chain) mode

/// Angle grid aligned with an N_g-point angle FFT:
/// sin(phi_i) = (i - N_g/2) / N_g * lambda / d_r, kept where |sin| <= 1.
inline std::vector<double> angle_grid(const ArrayGeometry& g, long points) {
    std::vector<double> out;
    for (long i = 0; i < points; ++i) {
        const double s = (static_cast<double>(i) - static_cast<double>(points) / 2.0) / static_cast<double>(points) *
                         g.wavelength / g.rx_spacing;
        if (std::abs(s) <= 1.0) out.push_back(rad_to_deg(std::asin(s)));
    }
    return out;
}

inline std::size_t nearest_angle(const std::vector<double>& grid, double angle_deg) {
    std::size_t best = 0;
    double dist = 1e300;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = std::abs(std::sin(deg_to_rad(grid[i])) - std::sin(deg_to_rad(angle_deg)));
        if (d < dist) {
            dist = d;
            best = i;
        }
    }
    return best;
}

struct RealisticScene {
    ScenarioConfig cfg;
    CodeMatrix codes;
    DecodeOptions decode;
    std::vector<ObjectTruth> objects;
    std::vector<InterfererTruth> interferers;
    std::vector<RawComponent> object_parts;
    std::vector<RawComponent> interference_parts;
    CMatrix a_r_tilde; // N x Q, true interference Rx steering vectors
    long doppler_bin = 0;
};

inline long default_test_doppler_bin(const ScenarioConfig& cfg) {
    if (cfg.processing.test_doppler_bin >= 0) return cfg.processing.test_doppler_bin % cfg.processing.doppler_fft;
    if (cfg.objects.empty()) throw ConfigError("no test Doppler bin and no objects");
    const ObjectDerived d = derive(cfg.victim, cfg.geom, cfg.objects.front());
    return doppler_bin_of(d.f_doppler, cfg.processing.doppler_fft);
}

inline RealisticScene build_scene(const ScenarioConfig& cfg, std::vector<InterfererTruth> interferers) {
    if (cfg.mode != ScenarioMode::Realistic) throw ConfigError("realistic experiment needs a realistic scenario");
    RealisticScene s;
    s.cfg = cfg;
    s.codes = make_codes(cfg.code_mode, cfg.victim.pulses, cfg.geom.tx);
    s.decode = {cfg.processing.range_fft, cfg.processing.doppler_fft,
                cfg.code_mode == CodeMode::Tdm ? DopplerIndexing::PerTxSlot : DopplerIndexing::Absolute};
    s.objects = cfg.objects;
    s.interferers = std::move(interferers);
    for (const ObjectTruth& o : s.objects) s.object_parts.push_back(object_component(cfg.victim, cfg.geom, s.codes, o).component);
    s.a_r_tilde = CMatrix(cfg.geom.rx, static_cast<long>(s.interferers.size()));
    for (std::size_t i = 0; i < s.interferers.size(); ++i) {
        s.interference_parts.push_back(interference_component(cfg.victim, cfg.geom, s.interferers[i]));
        s.a_r_tilde.col(static_cast<long>(i)) = cfg.geom.rx_steering(s.interferers[i].rx_angle_deg);
    }
    s.doppler_bin = default_test_doppler_bin(cfg);
    return s;
}

inline RealisticScene build_scene(const ScenarioConfig& cfg) { return build_scene(cfg, cfg.interferers); }

struct SceneCubes {
    RangeDopplerCube total;        // objects + interference + noise
    RangeDopplerCube interference; // interference only
};

/// Adds fresh receiver noise to the raw tensor and decodes the requested bins.
inline SceneCubes decode_scene(const RealisticScene& s, Rng& rng, const std::vector<long>& range_bins,
                               const std::vector<long>& doppler_bins) {
    const ScenarioConfig& c = s.cfg;
    RawTensor raw = RawTensor::zeros(c.geom.rx, c.victim.samples, c.victim.pulses);
    add_noise(raw, c.sigma2(), rng);
    for (const RawComponent& p : s.object_parts) raw += p;
    for (const RawComponent& p : s.interference_parts) raw += p;
    SceneCubes out;
    out.total = decode_bins(raw, s.codes, s.decode, range_bins, doppler_bins);
    for (std::size_t i = 0; i < s.interference_parts.size(); ++i) {
        RangeDopplerCube part = decode_bins(s.interference_parts[i], s.codes, s.decode, range_bins, doppler_bins);
        if (i == 0) out.interference = std::move(part);
        else out.interference += part;
    }
    if (s.interference_parts.empty()) {
        out.interference = out.total;
        for (CMatrix& m : out.interference.data) m.setZero();
    }
    return out;
}

/// Same as decode_scene for a few range bins, with the receiver noise drawn
/// directly in the range-spectrum domain (identical distribution).
inline SceneCubes decode_scene_sparse(const RealisticScene& s, Rng& rng, std::vector<long> range_bins,
                                      const std::vector<long>& doppler_bins) {
    const ScenarioConfig& c = s.cfg;
    for (long& b : range_bins) b = wrap_bin(b, s.decode.range_fft);
    std::vector<CMatrix> spectra = range_domain_noise(c.geom.rx, c.victim.samples, c.victim.pulses, s.decode.range_fft,
                                                      range_bins, c.sigma2(), rng);
    SceneCubes out;
    auto add = [&](const RawComponent& p) {
        const CMatrix x = range_spectrum(p.fast_slow, s.decode.range_fft, range_bins);
        for (long n = 0; n < c.geom.rx; ++n) spectra[static_cast<std::size_t>(n)] += x * p.rx(n);
    };
    for (const RawComponent& p : s.object_parts) add(p);
    for (const RawComponent& p : s.interference_parts) add(p);
    out.total = decode_range_spectra(spectra, s.codes, s.decode, range_bins, doppler_bins);
    out.interference = out.total;
    for (CMatrix& m : out.interference.data) m.setZero();
    for (const RawComponent& p : s.interference_parts)
        out.interference += decode_bins(p, s.codes, s.decode, range_bins, doppler_bins);
    return out;
}

/// Statistic labels for realistic mode: the angle-FFT baseline first,
/// then the requested detectors.
inline std::vector<std::string> statistic_labels(const std::vector<Detector>& dets) {
    std::vector<std::string> out{"angle_fft"};
    for (Detector d : dets) out.emplace_back(to_string(d));
    return out;
}

inline double to_db(double t) { return 10.0 * std::log10(std::max(t, 1e-10)); }

/// All statistics (linear) at one cell and steering angle. Side information
/// comes from the training cells around it; the clairvoyant detector
/// subtracts the true decoded interference.
inline std::vector<double> evaluate_cell(const RealisticScene& s, const SceneCubes& cubes, long range_bin,
                                         long doppler_bin, double angle_deg, const std::vector<Detector>& dets) {
    const ScenarioConfig& c = s.cfg;
    const CVector a_t = c.geom.tx_steering(angle_deg);
    const CVector a_r = c.geom.rx_steering(angle_deg);
    const TrainingBins tb = default_training_bins(range_bin, doppler_bin, s.decode.range_fft, s.decode.doppler_fft,
                                                  c.processing.guard, c.processing.training_offset);
    std::vector<BinEstimate> per_bin;
    for (long l : tb.range_bins)
        for (long k : tb.doppler_bins) per_bin.push_back(estimate_bin_stats(snapshot(cubes.total, l, k).entries, a_t, s.a_r_tilde));
    const EstimatedStats est = aggregate_stats(per_bin);
    const double sigma2 = est.sigma2_hat;
    if (!(sigma2 > 0.0)) throw SingularSubspaceError("estimated noise power is zero", 0.0);

    const CVector y = snapshot(cubes.total, range_bin, doppler_bin).entries;
    std::vector<double> out{t_matched(y, a_t, a_r, sigma2)};
    for (Detector d : dets) {
        switch (d) {
            case Detector::Clairvoyant:
                out.push_back(t_clairvoyant(y, a_t, a_r, {snapshot(cubes.interference, range_bin, doppler_bin).entries}, sigma2));
                break;
            case Detector::Rs:
                try {
                    out.push_back(t_rs(y, a_t, a_r, s.a_r_tilde, sigma2));
                } catch (const DegenerateGeometryError&) {
                    out.push_back(0.0); // steering inside the nulled subspace
                }
                break;
            case Detector::Gs: {
                InterferenceSideInfo side{s.a_r_tilde, RVector(s.a_r_tilde.cols()), sigma2};
                for (long q = 0; q < side.q(); ++q) side.lambda(q) = est.h2_hat[static_cast<std::size_t>(q)] / sigma2;
                out.push_back(t_gs(y, a_t, a_r, side));
                break;
            }
            case Detector::Lcmv: {
                const long mn = c.geom.virtual_size();
                const CMatrix r = s.a_r_tilde.cols() > 0 ? build_rtilde_est(est.r_t_hat, s.a_r_tilde, sigma2)
                                                         : CMatrix(CMatrix::Identity(mn, mn));
                out.push_back(t_lcmv(y, a_t, a_r, r, sigma2));
                break;
            }
        }
    }
    return out;
}

struct HeatmapGrid {
    std::string statistic;
    long doppler_bin = 0;
    std::vector<double> angles_deg;
    Eigen::MatrixXd db; // range bins x angles
};

struct HeatmapOptions {
    std::uint64_t seed = 1;
    long doppler_bin = -1; // -1: scenario test bin
    unsigned threads = default_threads();
};

inline std::vector<HeatmapGrid> run_heatmap(const ScenarioConfig& cfg, const std::vector<Detector>& dets,
                                            const HeatmapOptions& opt) {
    RealisticScene s = build_scene(cfg);
    if (opt.doppler_bin >= 0) s.doppler_bin = opt.doppler_bin % s.decode.doppler_fft;
    const long k0 = s.doppler_bin;
    const long off = cfg.processing.training_offset;
    Rng rng = substream(opt.seed, kStreamNoise, 0);
    const SceneCubes cubes = decode_scene(s, rng, all_bins(s.decode.range_fft),
                                          {k0, wrap_bin(k0 - off, s.decode.doppler_fft), wrap_bin(k0 + off, s.decode.doppler_fft)});
    const std::vector<double> angles = angle_grid(cfg.geom, cfg.processing.angle_grid);
    const std::vector<std::string> labels = statistic_labels(dets);
    std::vector<HeatmapGrid> grids;
    for (const std::string& l : labels)
        grids.push_back({l, k0, angles, Eigen::MatrixXd::Zero(s.decode.range_fft, static_cast<long>(angles.size()))});
    parallel_for(s.decode.range_fft, opt.threads, [&](long l) {
        for (std::size_t a = 0; a < angles.size(); ++a) {
            const std::vector<double> t = evaluate_cell(s, cubes, l, k0, angles[a], dets);
            for (std::size_t i = 0; i < t.size(); ++i) grids[i].db(l, static_cast<long>(a)) = to_db(t[i]);
        }
    });
    return grids;
}

struct OipSample {
    std::string statistic;
    long run = 0;
    double angle_deg = 0.0;
    double range_m = 0.0;
    double oip_db = 0.0;
};

struct OipOptions {
    long runs = 1000;
    std::uint64_t seed = 1;
    unsigned threads = default_threads();
};

/// Range bin where interferer 0 leaves the most energy at the test Doppler bin.
inline long interference_peak_bin(const RealisticScene& s) {
    const RangeDopplerCube cube = decode_bins(s.interference_parts.front(), s.codes, s.decode,
                                              all_bins(s.decode.range_fft), {s.doppler_bin});
    long best = 0;
    double energy = -1.0;
    for (long l = 0; l < s.decode.range_fft; ++l) {
        double e = 0.0;
        for (const CMatrix& ch : cube.data) e += std::norm(ch(l, 0));
        if (e > energy) {
            energy = e;
            best = l;
        }
    }
    return best;
}

/// Per run every interferer gets a fresh angle and range; statistics are
/// read at interferer 0's strongest range bin and nearest grid angle.
inline std::vector<OipSample> run_oip(const ScenarioConfig& cfg, const std::vector<Detector>& dets, const OipOptions& opt) {
    if (cfg.interferers.empty()) throw ConfigError("oip needs at least one interferer");
    const std::vector<double> grid = angle_grid(cfg.geom, cfg.processing.angle_grid);
    const std::vector<std::string> labels = statistic_labels(dets);
    std::vector<std::vector<OipSample>> per_run(static_cast<std::size_t>(opt.runs));
    parallel_for(opt.runs, opt.threads, [&](long r) {
        Rng rng = substream(opt.seed, kStreamOip, static_cast<std::uint64_t>(r));
        std::uniform_real_distribution<double> angle(cfg.oip.angle_min_deg, cfg.oip.angle_max_deg);
        std::uniform_real_distribution<double> range(cfg.oip.range_min, cfg.oip.range_max);
        std::vector<InterfererTruth> intf = cfg.interferers;
        for (InterfererTruth& it : intf) {
            it.rx_angle_deg = angle(rng);
            it.range = range(rng);
        }
        const RealisticScene s = build_scene(cfg, intf);
        const long l0 = interference_peak_bin(s);
        const long k0 = s.doppler_bin;
        const long off = cfg.processing.training_offset;
        const SceneCubes cubes = decode_scene_sparse(
            s, rng, {l0, wrap_bin(l0 - off, s.decode.range_fft), wrap_bin(l0 + off, s.decode.range_fft)},
            {k0, wrap_bin(k0 - off, s.decode.doppler_fft), wrap_bin(k0 + off, s.decode.doppler_fft)});
        const double phi = grid[nearest_angle(grid, intf.front().rx_angle_deg)];
        const std::vector<double> t = evaluate_cell(s, cubes, l0, k0, phi, dets);
        for (std::size_t i = 0; i < t.size(); ++i)
            per_run[static_cast<std::size_t>(r)].push_back({labels[i], r, intf.front().rx_angle_deg, intf.front().range, to_db(t[i])});
    });
    std::vector<OipSample> out;
    for (const auto& v : per_run) out.insert(out.end(), v.begin(), v.end());
    return out;
}

/// Values of one statistic, sorted ascending (the empirical CDF support).
inline std::vector<double> oip_values(const std::vector<OipSample>& samples, const std::string& statistic) {
    std::vector<double> v;
    for (const OipSample& s : samples)
        if (s.statistic == statistic) v.push_back(s.oip_db);
    std::sort(v.begin(), v.end());
    return v;
}

/// Linear-interpolated percentile (p in [0, 100]) of sorted values.
inline double percentile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw InvalidArgumentError("percentile of an empty sample");
    const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - w) + sorted[hi] * w;
}

}  // namespace mimo_radar
