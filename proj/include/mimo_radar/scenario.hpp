#pragma once

// Scenario files: JSON with snake_case keys, angles in degrees, times in
// seconds, frequencies in Hz, lengths in metres, powers in dB for keys
// ending in _db. Omitted fields take the Table-style defaults below.

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mimo_radar/detectors.hpp"
#include "mimo_radar/signal_chain.hpp"

namespace mimo_radar {

enum class ScenarioMode { Synthetic, Realistic };

inline const char* to_string(ScenarioMode m) { return m == ScenarioMode::Synthetic ? "synthetic" : "realistic"; }

/// Interferer of the snapshot-level model: a~'_t ~ CN(0, sigma~^2 R_t(rho)).
struct SyntheticInterferer {
    double angle_deg = 0.0;
    double rho = 0.0;
    double inr_offset_db = 0.0; // added to every swept INR
};

struct OipSettings {
    long runs = 1000;
    double angle_min_deg = -80.0;
    double angle_max_deg = 80.0;
    double range_min = 1.0;
    double range_max = 3.0;
};

struct ProcessingSettings {
    long range_fft = 1024;
    long doppler_fft = 256;
    long angle_grid = 32;
    long test_doppler_bin = -1; // -1: Doppler bin of the first object
    long guard = 2;
    long training_offset = 2;
};

struct ScenarioConfig {
    std::string name = "scenario";
    ScenarioMode mode = ScenarioMode::Synthetic;
    ChirpParams victim;
    ArrayGeometry geom;
    CodeMode code_mode = CodeMode::DdmChu;
    double noise_power_db = 0.0; // sigma^2

    // synthetic path
    double object_angle_deg = 30.0;
    double snr_db = -5.0;
    std::vector<double> inr_db{-15.0, -10.0, -5.0};
    std::vector<SyntheticInterferer> synthetic_interferers;
    double sigma2_pert = 0.0;
    long pfa_points = 20;

    // realistic path
    std::vector<ObjectTruth> objects;
    std::vector<InterfererTruth> interferers;
    ProcessingSettings processing;
    OipSettings oip;

    long trials = 10000;
    std::uint64_t seed = 1;
    std::vector<Detector> detectors = all_detectors();

    double sigma2() const { return std::pow(10.0, noise_power_db / 10.0); }
    long interferer_count() const {
        return mode == ScenarioMode::Synthetic ? static_cast<long>(synthetic_interferers.size())
                                               : static_cast<long>(interferers.size());
    }
};

inline double db_to_power(double db) { return std::pow(10.0, db / 10.0); }
inline double power_to_db(double p) { return 10.0 * std::log10(p); }

namespace detail {

using nlohmann::json;

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    double number(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
        return v.get<double>();
    }

    long integer(const char* key, long fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
        return v.get<long>();
    }

    std::string text(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
        return v.get<std::string>();
    }

    Reader child(const char* key) const {
        static const json empty = json::object();
        return has(key) ? Reader(j_.at(key), where(key)) : Reader(empty, where(key));
    }

    const json& array(const char* key) const {
        const json& v = j_.at(key);
        if (!v.is_array()) throw ConfigError(where(key) + ": expected an array");
        return v;
    }

    void reject_unknown(std::initializer_list<const char*> known) const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool ok = false;
            for (const char* k : known) ok = ok || it.key() == k;
            if (!ok) throw ConfigError(where(it.key().c_str()) + ": unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
};

inline void read_chirp(const Reader& r, ChirpParams& c) {
    c.beta = r.number("chirp_rate", c.beta);
    c.duration = r.number("chirp_duration", c.duration);
    if (r.has("pri") && r.has("idle_duration")) throw ConfigError(r.where("pri") + ": give either pri or idle_duration");
    c.pri = r.has("idle_duration") ? c.duration + r.number("idle_duration", 0.0) : r.number("pri", c.pri);
    if (r.has("wavelength")) c.carrier = kSpeedOfLight / r.number("wavelength", 0.0);
    c.carrier = r.number("carrier_frequency", c.carrier);
    c.lpf_cutoff = r.number("lpf_cutoff", c.lpf_cutoff);
    c.sample_interval = r.number("sample_interval", c.sample_interval);
    c.samples = r.integer("samples", c.samples);
    c.pulses = r.integer("pulses", c.pulses);
}

template <class F>
void wrap_errors(const std::string& where, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline long line_of(const std::string& text, std::size_t byte) {
    long line = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) line += text[i] == '\n' ? 1 : 0;
    return line;
}

}  // namespace detail

inline ScenarioConfig scenario_defaults(ScenarioMode mode) {
    ScenarioConfig c;
    c.mode = mode;
    if (mode == ScenarioMode::Synthetic) {
        c.name = "synthetic";
        c.geom.tx = 4;
        c.geom.rx = 4;
        c.geom.tx_spacing = 2.0 * c.geom.wavelength;
        c.geom.rx_spacing = 0.5 * c.geom.wavelength;
        c.synthetic_interferers = {{40.0, 0.6, 0.0}, {10.0, 0.5, 0.0}};
    } else {
        c.name = "realistic";
        c.trials = 1;
    }
    return c;
}

/// Parse and validate a scenario from JSON text.
inline ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "<string>") {
    using detail::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ":" + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
    }
    const detail::Reader r(root, "");
    r.reject_unknown({"name", "mode", "victim", "array", "noise_power_db", "object", "snr_db", "inr_db",
                      "interferers", "sigma2_pert", "pfa_points", "objects", "processing", "oip", "trials", "seed",
                      "detectors"});
    const std::string mode_text = r.text("mode", "synthetic");
    ScenarioMode mode;
    if (mode_text == "synthetic") mode = ScenarioMode::Synthetic;
    else if (mode_text == "realistic") mode = ScenarioMode::Realistic;
    else throw ConfigError("mode: expected \"synthetic\" or \"realistic\", got \"" + mode_text + "\"");

    ScenarioConfig c = scenario_defaults(mode);
    c.name = r.text("name", c.name);

    const detail::Reader v = r.child("victim");
    detail::read_chirp(v, c.victim);
    detail::wrap_errors("victim.code_mode", [&] { c.code_mode = code_mode_from_string(v.text("code_mode", to_string(c.code_mode))); });

    const detail::Reader a = r.child("array");
    c.geom.tx = a.integer("tx", c.geom.tx);
    c.geom.rx = a.integer("rx", c.geom.rx);
    c.geom.wavelength = c.victim.wavelength();
    c.geom.tx_spacing = a.number("tx_spacing", c.geom.tx_spacing);
    c.geom.rx_spacing = a.number("rx_spacing", c.geom.rx_spacing);

    c.noise_power_db = r.number("noise_power_db", c.noise_power_db);
    c.trials = r.integer("trials", c.trials);
    c.seed = static_cast<std::uint64_t>(r.integer("seed", static_cast<long>(c.seed)));
    if (r.has("detectors")) {
        c.detectors.clear();
        for (const json& d : r.array("detectors")) {
            if (!d.is_string()) throw ConfigError("detectors: expected strings");
            detail::wrap_errors("detectors", [&] { c.detectors.push_back(detector_from_string(d.get<std::string>())); });
        }
    }

    if (mode == ScenarioMode::Synthetic) {
        c.object_angle_deg = r.child("object").number("angle_deg", c.object_angle_deg);
        c.snr_db = r.number("snr_db", c.snr_db);
        c.sigma2_pert = r.number("sigma2_pert", c.sigma2_pert);
        c.pfa_points = r.integer("pfa_points", c.pfa_points);
        if (r.has("inr_db")) {
            c.inr_db.clear();
            const json& inr = root.at("inr_db");
            if (inr.is_number()) c.inr_db.push_back(inr.get<double>());
            else
                for (const json& x : r.array("inr_db")) {
                    if (!x.is_number()) throw ConfigError("inr_db: expected numbers");
                    c.inr_db.push_back(x.get<double>());
                }
        }
        if (r.has("interferers")) {
            c.synthetic_interferers.clear();
            std::size_t i = 0;
            for (const json& x : r.array("interferers")) {
                const detail::Reader ir(x, "interferers[" + std::to_string(i++) + "]");
                ir.reject_unknown({"angle_deg", "rho", "inr_offset_db"});
                if (!ir.has("angle_deg")) throw ConfigError(ir.where("angle_deg") + ": required");
                c.synthetic_interferers.push_back(
                    {ir.number("angle_deg", 0.0), ir.number("rho", 0.0), ir.number("inr_offset_db", 0.0)});
            }
        }
    } else {
        const detail::Reader p = r.child("processing");
        c.processing.range_fft = p.integer("range_fft", c.processing.range_fft);
        c.processing.doppler_fft = p.integer("doppler_fft", c.processing.doppler_fft);
        c.processing.angle_grid = p.integer("angle_grid", c.processing.angle_grid);
        c.processing.test_doppler_bin = p.integer("test_doppler_bin", c.processing.test_doppler_bin);
        c.processing.guard = p.integer("guard", c.processing.guard);
        c.processing.training_offset = p.integer("training_offset", c.processing.training_offset);

        const detail::Reader o = r.child("oip");
        c.oip.runs = o.integer("runs", c.oip.runs);
        c.oip.angle_min_deg = o.number("angle_min_deg", c.oip.angle_min_deg);
        c.oip.angle_max_deg = o.number("angle_max_deg", c.oip.angle_max_deg);
        c.oip.range_min = o.number("range_min", c.oip.range_min);
        c.oip.range_max = o.number("range_max", c.oip.range_max);

        if (r.has("objects")) {
            std::size_t i = 0;
            for (const json& x : r.array("objects")) {
                const detail::Reader orr(x, "objects[" + std::to_string(i++) + "]");
                orr.reject_unknown({"range", "velocity", "angle_deg", "amplitude_db", "phase_deg"});
                ObjectTruth obj;
                obj.range = orr.number("range", obj.range);
                obj.velocity = orr.number("velocity", 0.0);
                obj.angle_deg = orr.number("angle_deg", 0.0);
                obj.amplitude = std::polar(std::pow(10.0, orr.number("amplitude_db", 0.0) / 20.0),
                                           deg_to_rad(orr.number("phase_deg", 0.0)));
                c.objects.push_back(obj);
            }
        }
        if (r.has("interferers")) {
            std::size_t i = 0;
            for (const json& x : r.array("interferers")) {
                const std::string where = "interferers[" + std::to_string(i++) + "]";
                const detail::Reader ir(x, where);
                ir.reject_unknown({"range", "velocity", "rx_angle_deg", "tx_angle_deg", "amplitude_db", "phase_deg",
                                   "chirp_rate", "chirp_duration", "pri", "idle_duration", "tau_syn", "tx",
                                   "tx_spacing", "code_mode", "pulses"});
                InterfererTruth it;
                it.range = ir.number("range", it.range);
                it.velocity = ir.number("velocity", 0.0);
                it.rx_angle_deg = ir.number("rx_angle_deg", 0.0);
                it.tx_angle_deg = ir.number("tx_angle_deg", 0.0);
                it.amplitude = std::polar(std::pow(10.0, ir.number("amplitude_db", 0.0) / 20.0),
                                          deg_to_rad(ir.number("phase_deg", 0.0)));
                it.chirp = c.victim;
                detail::read_chirp(ir, it.chirp);
                it.tau_syn = ir.number("tau_syn", 0.0);
                it.tx_spacing = ir.number("tx_spacing", c.geom.wavelength);
                const long mt = ir.integer("tx", 8);
                detail::wrap_errors(where, [&] {
                    it.codes = make_codes(code_mode_from_string(ir.text("code_mode", "chu")), it.chirp.pulses, mt);
                    validate(it.chirp, where);
                    validate(it);
                });
                c.interferers.push_back(std::move(it));
            }
        }
    }

    // invariants
    detail::wrap_errors("victim", [&] { validate(c.victim, "victim"); });
    detail::wrap_errors("array", [&] { validate(c.geom, "array"); });
    if (c.trials < 1) throw ConfigError("trials: must be >= 1");
    if (c.interferer_count() > c.geom.rx)
        throw ConfigError("interferers: Q = " + std::to_string(c.interferer_count()) + " exceeds N = " + std::to_string(c.geom.rx));
    if (mode == ScenarioMode::Synthetic) {
        if (c.inr_db.empty()) throw ConfigError("inr_db: at least one value required");
        for (std::size_t i = 0; i < c.synthetic_interferers.size(); ++i)
            if (!(std::abs(c.synthetic_interferers[i].rho) < 1.0))
                throw ConfigError("interferers[" + std::to_string(i) + "].rho: |rho| must be < 1");
        if (!(c.sigma2_pert >= 0.0)) throw ConfigError("sigma2_pert: must be >= 0");
        if (c.pfa_points < 1) throw ConfigError("pfa_points: must be >= 1");
    } else {
        const ProcessingSettings& p = c.processing;
        if (p.range_fft < c.victim.samples) throw ConfigError("processing.range_fft: must be >= victim.samples");
        if (p.doppler_fft < c.victim.pulses) throw ConfigError("processing.doppler_fft: must be >= victim.pulses");
        if (p.angle_grid < 1) throw ConfigError("processing.angle_grid: must be >= 1");
        if (p.guard < 0 || p.training_offset < std::max(1L, p.guard))
            throw ConfigError("processing.training_offset: must be >= max(1, guard)");
        if (p.test_doppler_bin < 0 && c.objects.empty())
            throw ConfigError("processing.test_doppler_bin: required when no objects are configured");
        if (c.interferer_count() > c.geom.rx - 1)
            throw ConfigError("interferers: training-bin estimation needs Q <= N - 1");
        if (c.oip.runs < 1) throw ConfigError("oip.runs: must be >= 1");
        if (!(c.oip.range_min > 0.0 && c.oip.range_max >= c.oip.range_min)) throw ConfigError("oip: invalid range interval");
        if (!(c.oip.angle_max_deg >= c.oip.angle_min_deg)) throw ConfigError("oip: invalid angle interval");
        detail::wrap_errors("victim.code_mode", [&] { make_codes(c.code_mode, c.victim.pulses, c.geom.tx); });
    }
    return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

}  // namespace mimo_radar
