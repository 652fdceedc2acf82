// mimo-radar: command-line front end for the experiment engine.
//
//   mimo-radar roc --config scenarios/synthetic_4x4.json --out out/
//   mimo-radar heatmap --config scenarios/realistic_two_interferers.json --format svg
//   mimo-radar oip --config scenarios/realistic_two_interferers.json --trials 200
//   mimo-radar theory --config scenarios/synthetic_4x4.json
//   mimo-radar validate-special-cases

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mimo_radar/emit.hpp"
#include "mimo_radar/experiments.hpp"
#include "mimo_radar/scenario.hpp"
#include "mimo_radar/special_cases.hpp"

namespace fs = std::filesystem;
using namespace mimo_radar;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<long> trials;
    std::string out = "out";
    std::string format = "csv";
    std::string detectors;
    unsigned threads = default_threads();
};

void add_common(CLI::App* app, Common& c, bool config_required) {
    auto* opt = app->add_option("--config", c.config, "scenario JSON file");
    if (config_required) opt->required();
    app->add_option("--seed", c.seed, "base seed (overrides the scenario)");
    app->add_option("--trials", c.trials, "Monte Carlo trials or OIP runs (overrides the scenario)");
    app->add_option("--out", c.out, "output directory")->capture_default_str();
    app->add_option("--format", c.format, "csv or svg")->check(CLI::IsMember({"csv", "svg"}))->capture_default_str();
    app->add_option("--detectors", c.detectors, "comma list of clairvoyant,rs,lcmv,gs");
    app->add_option("--threads", c.threads, "worker threads")->capture_default_str();
}

std::vector<Detector> parse_detectors(const std::string& list, const std::vector<Detector>& fallback) {
    if (list.empty()) return fallback;
    std::vector<Detector> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(detector_from_string(item));
    if (out.empty()) throw InvalidArgumentError("--detectors is empty");
    return out;
}

ScenarioConfig load_or_default(const Common& c, ScenarioMode mode) {
    ScenarioConfig cfg = c.config.empty() ? scenario_defaults(mode) : load_scenario(c.config);
    if (cfg.mode != mode)
        throw ConfigError(c.config + ": this command needs a " + std::string(to_string(mode)) + " scenario");
    if (c.seed) cfg.seed = *c.seed;
    if (c.trials) {
        if (*c.trials < 1) throw ConfigError("--trials must be >= 1");
        cfg.trials = *c.trials;
    }
    return cfg;
}

void emit(const fs::path& path, const std::string& text) {
    write_text(path, text);
    std::cout << "wrote " << path.string() << '\n';
}

int cmd_roc(const Common& c, std::optional<double> sigma2_pert) {
    const ScenarioConfig cfg = load_or_default(c, ScenarioMode::Synthetic);
    const std::vector<Detector> dets = parse_detectors(c.detectors, cfg.detectors);
    const OutputFormat fmt = output_format_from_string(c.format);
    SyntheticOptions opt{cfg.trials, cfg.seed, sigma2_pert.value_or(cfg.sigma2_pert), c.threads};
    for (double inr : cfg.inr_db) {
        const SyntheticSamples s = simulate_synthetic(cfg, inr, dets, opt);
        const std::vector<RocCurve> curves = roc_from_samples(s, default_pfa_grid(cfg.pfa_points));
        const fs::path base = fs::path(c.out) / ("roc_" + inr_tag(inr));
        if (fmt == OutputFormat::Csv) emit(base.string() + ".csv", roc_csv(curves));
        else emit(base.string() + ".svg", line_svg(roc_plot(curves, inr)));
        for (std::size_t d = 0; d < dets.size(); ++d) {
            const double g = empirical_threshold(s.h0[d], 0.1);
            std::printf("inr %6.1f dB  %-11s lambda %9.4f  pd@pfa=0.1 theory %.4f empirical %.4f\n", inr, to_string(dets[d]),
                        s.lambda[d], pd(s.lambda[d], threshold_from_pfa(0.1)), exceed_fraction(s.h1[d], g));
        }
        if (s.lcmv_indefinite > 0)
            std::printf("inr %6.1f dB  %ld trials had an indefinite perturbed LCMV covariance\n", inr, s.lcmv_indefinite);
    }
    return 0;
}

int cmd_theory(const Common& c) {
    const ScenarioConfig cfg = load_or_default(c, ScenarioMode::Synthetic);
    const std::vector<Detector> dets = parse_detectors(c.detectors, cfg.detectors);
    const OutputFormat fmt = output_format_from_string(c.format);
    std::vector<std::pair<double, std::vector<DetectionCurve>>> all;
    for (double inr : cfg.inr_db) all.emplace_back(inr, theory_curves(cfg, inr, dets));
    if (fmt == OutputFormat::Csv) {
        emit(fs::path(c.out) / "theory.csv", theory_csv(all));
    } else {
        for (const auto& [inr, curves] : all)
            emit(fs::path(c.out) / ("theory_" + inr_tag(inr) + ".svg"), line_svg(theory_plot(curves, inr)));
    }
    return 0;
}

int cmd_heatmap(const Common& c, long doppler_bin, long cut_bin) {
    const ScenarioConfig cfg = load_or_default(c, ScenarioMode::Realistic);
    const std::vector<Detector> dets = parse_detectors(c.detectors, cfg.detectors);
    const OutputFormat fmt = output_format_from_string(c.format);
    const std::vector<HeatmapGrid> grids = run_heatmap(cfg, dets, {cfg.seed, doppler_bin, c.threads});
    for (const HeatmapGrid& g : grids) {
        const fs::path base = fs::path(c.out) / ("heatmap_" + g.statistic);
        if (fmt == OutputFormat::Csv) emit(base.string() + ".csv", heatmap_csv(g));
        else emit(base.string() + ".svg", heatmap_svg(g, g.statistic + ", Doppler bin " + std::to_string(g.doppler_bin)));
    }
    if (cut_bin >= 0 && !grids.empty()) {
        if (cut_bin >= grids.front().db.rows()) throw InvalidArgumentError("--cut-bin outside the range axis");
        const LinePlot p = angle_cut_plot(grids, cut_bin);
        if (fmt == OutputFormat::Svg) {
            emit(fs::path(c.out) / ("angle_cut_" + std::to_string(cut_bin) + ".svg"), line_svg(p));
        } else {
            std::ostringstream o;
            o << "statistic,angle_deg,db\n";
            for (const Series& s : p.series)
                for (std::size_t i = 0; i < s.x.size(); ++i) o << s.name << ',' << num(s.x[i]) << ',' << num(s.y[i]) << '\n';
            emit(fs::path(c.out) / ("angle_cut_" + std::to_string(cut_bin) + ".csv"), o.str());
        }
    }
    return 0;
}

int cmd_oip(const Common& c) {
    ScenarioConfig cfg = load_or_default(c, ScenarioMode::Realistic);
    if (c.trials) cfg.oip.runs = *c.trials;
    const std::vector<Detector> dets = parse_detectors(c.detectors, cfg.detectors);
    const OutputFormat fmt = output_format_from_string(c.format);
    const std::vector<OipSample> samples = run_oip(cfg, dets, {cfg.oip.runs, cfg.seed, c.threads});
    const std::vector<std::string> labels = statistic_labels(dets);
    if (fmt == OutputFormat::Csv) {
        emit(fs::path(c.out) / "oip.csv", oip_csv(samples));
        emit(fs::path(c.out) / "oip_cdf.csv", oip_cdf_csv(samples, labels));
        emit(fs::path(c.out) / "oip_summary.csv", oip_summary_csv(samples, labels));
    } else {
        emit(fs::path(c.out) / "oip_cdf.svg", line_svg(oip_cdf_plot(samples, labels)));
    }
    for (const std::string& l : labels) {
        const std::vector<double> v = oip_values(samples, l);
        std::printf("%-11s median %7.2f dB  p80 %7.2f dB\n", l.c_str(), percentile(v, 50.0), percentile(v, 80.0));
    }
    return 0;
}

int cmd_special(const Common& c, const std::vector<long>& pulses, double tol) {
    std::vector<std::pair<long, SpecialCaseReport>> reports;
    bool ok = true;
    for (SpecialCase mode : {SpecialCase::Coherent, SpecialCase::Phased, SpecialCase::Tdm})
        for (long k : pulses) {
            const SpecialCaseReport r = validate_special_case(mode, default_special_case_scenario(mode, k), tol);
            std::printf("%-8s K=%-4ld deviation %.3e structure %.3e  %s\n", to_string(mode), k, r.deviation, r.structure,
                        r.passed ? "pass" : "FAIL");
            ok = ok && r.passed;
            reports.emplace_back(k, r);
        }
    emit(fs::path(c.out) / "special_cases.csv", special_cases_csv(reports));
    return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MIMO FMCW radar interference detection experiments"};
    app.require_subcommand(1);

    Common roc_c, th_c, hm_c, oip_c, sc_c;
    std::optional<double> sigma2_pert;
    long doppler_bin = -1, cut_bin = -1;
    std::vector<long> pulses{16, 64, 256};
    double tol = 1e-6;

    auto* roc = app.add_subcommand("roc", "synthetic Monte Carlo ROC curves with theory overlay");
    add_common(roc, roc_c, false);
    roc->add_option("--sigma2-pert", sigma2_pert, "covariance perturbation variance (overrides the scenario)");

    auto* th = app.add_subcommand("theory", "analytical detection curves only");
    add_common(th, th_c, false);

    auto* hm = app.add_subcommand("heatmap", "range-angle statistic maps at one Doppler bin");
    add_common(hm, hm_c, true);
    hm->add_option("--doppler-bin", doppler_bin, "Doppler bin (default: first object's bin)");
    hm->add_option("--cut-bin", cut_bin, "also emit an angle cut at this range bin");

    auto* oip = app.add_subcommand("oip", "output interference power over randomized interferers");
    add_common(oip, oip_c, true);

    auto* sc = app.add_subcommand("validate-special-cases", "coherent / phased / TDM reductions of the decoder");
    add_common(sc, sc_c, false);
    sc->add_option("--pulses", pulses, "pulse counts K")->capture_default_str();
    sc->add_option("--tolerance", tol, "relative deviation bound")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // help and version exit 0; every usage error is a config error
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_code_for(ErrorKind::Config);
    }

    try {
        if (*roc) return cmd_roc(roc_c, sigma2_pert);
        if (*th) return cmd_theory(th_c);
        if (*hm) return cmd_heatmap(hm_c, doppler_bin, cut_bin);
        if (*oip) return cmd_oip(oip_c);
        if (*sc) return cmd_special(sc_c, pulses, tol);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
