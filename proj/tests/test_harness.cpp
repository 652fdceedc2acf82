#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <sys/wait.h>

#include "mimo_radar/emit.hpp"
#include "mimo_radar/experiments.hpp"
#include "oracles.hpp"

using namespace mimo_radar;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

const std::string kScenarios = SCENARIO_DIR;

ScenarioConfig synthetic() { return load_scenario(kScenarios + "/synthetic_4x4.json"); }
ScenarioConfig realistic() { return load_scenario(kScenarios + "/realistic_two_interferers.json"); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mimo_radar_harness_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("bundled scenarios load", "[harness]") {
    const ScenarioConfig s = synthetic();
    CHECK(s.mode == ScenarioMode::Synthetic);
    CHECK(s.geom.tx == 4);
    CHECK(s.geom.rx == 4);
    CHECK(s.snr_db == -5.0);
    CHECK(s.object_angle_deg == 30.0);
    REQUIRE(s.synthetic_interferers.size() == 2);
    CHECK(s.synthetic_interferers[0].angle_deg == 40.0);
    CHECK(s.synthetic_interferers[1].rho == 0.5);
    CHECK(s.inr_db == std::vector<double>{-15.0, -10.0, -5.0});

    const ScenarioConfig r = realistic();
    CHECK(r.mode == ScenarioMode::Realistic);
    REQUIRE(r.objects.size() == 2);
    CHECK(r.objects[0].range == 35.5);
    CHECK(r.objects[0].velocity == -2.9);
    CHECK(r.objects[1].range == 81.0);
    REQUIRE(r.interferers.size() == 2);
    CHECK(r.interferers[0].rx_angle_deg == -54.0);
    CHECK(r.interferers[1].rx_angle_deg == -48.1);
    CHECK(r.interferers[1].chirp.beta == 12.4e12);
    CHECK(r.interferers[1].tau_syn == Approx(17.6e-6));
    CHECK(r.victim.pri == Approx(37.7e-6));
    CHECK(r.victim.samples == 512);
    CHECK(r.processing.range_fft == 1024);
}

TEST_CASE("scenario defaults and errors", "[harness]") {
    const ScenarioConfig d = parse_scenario(R"({"mode": "synthetic", "interferers": [{"angle_deg": 40}]})");
    CHECK(d.trials == 10000);
    CHECK(d.geom.tx == 4);

    try {
        parse_scenario("{\n  \"mode\": \"synthetic\",\n  \"trials\": ,\n}", "cfg.json");
        FAIL("expected a parse error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("cfg.json:3") != std::string::npos);
    }
    try {
        parse_scenario(R"({"mode": "synthetic", "trials": 0})");
        FAIL("expected an invariant error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("trials") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_scenario(R"({"mode": "synthetic", "array": {"rx": 1},
        "interferers": [{"angle_deg": 1}, {"angle_deg": 2}]})"), ConfigError);
    CHECK_THROWS_AS(parse_scenario(R"({"mode": "sideways"})"), ConfigError);
    CHECK_THROWS_AS(load_scenario("/definitely/not/here.json"), IoError);
}

TEST_CASE("synthetic runs are deterministic across thread counts", "[harness]") {
    const ScenarioConfig s = synthetic();
    SyntheticOptions one{3000, 99, 0.0, 1};
    SyntheticOptions many{3000, 99, 0.0, 3};
    const std::string a = roc_csv(run_roc(s, -10.0, all_detectors(), one));
    const std::string b = roc_csv(run_roc(s, -10.0, all_detectors(), many));
    CHECK(a == b);
    many.seed = 100;
    CHECK(a != roc_csv(run_roc(s, -10.0, all_detectors(), many)));
}

TEST_CASE("ROC CSV round trip", "[harness]") {
    const std::vector<RocCurve> curves = run_roc(synthetic(), -5.0, all_detectors(), {500, 3, 0.0, 1});
    const std::string text = roc_csv(curves);
    CHECK(text.rfind("detector,gamma,pfa_theory,pfa_empirical,pd_theory,pd_empirical,ci_halfwidth\n", 0) == 0);
    const std::vector<RocCurve> back = parse_roc_csv(text);
    REQUIRE(back.size() == curves.size());
    for (std::size_t d = 0; d < curves.size(); ++d) {
        CHECK(back[d].detector == curves[d].detector);
        REQUIRE(back[d].gamma.size() == curves[d].gamma.size());
        for (std::size_t i = 0; i < curves[d].gamma.size(); ++i) {
            CHECK(back[d].gamma[i] == Approx(curves[d].gamma[i]).epsilon(1e-9));
            CHECK(back[d].pd_empirical[i] == Approx(curves[d].pd_empirical[i]).epsilon(1e-9));
            CHECK(back[d].pfa_theory[i] == Approx(curves[d].pfa_theory[i]).epsilon(1e-9));
        }
    }
    CHECK(roc_csv(back) == text);
}

TEST_CASE("ROC curves are monotone and bounded", "[harness]") {
    for (const RocCurve& c : run_roc(synthetic(), -10.0, all_detectors(), {4000, 5, 0.0, 1})) {
        for (std::size_t i = 0; i < c.gamma.size(); ++i) {
            CHECK(c.pd_empirical[i] >= 0.0);
            CHECK(c.pd_empirical[i] <= 1.0);
            if (i > 0) {
                CHECK(c.gamma[i] > c.gamma[i - 1]);
                CHECK(c.pd_empirical[i] <= c.pd_empirical[i - 1]);
                CHECK(c.pfa_empirical[i] <= c.pfa_empirical[i - 1]);
            }
        }
    }
}

TEST_CASE("zero-amplitude object gives pd = pfa", "[harness]") {
    ScenarioConfig s = synthetic();
    s.snr_db = -400.0;
    for (const RocCurve& c : run_roc(s, -10.0, all_detectors(), {3000, 8, 0.0, 1})) {
        CHECK(c.lambda < 1e-30);
        for (std::size_t i = 0; i < c.gamma.size(); ++i) {
            CHECK(c.pd_empirical[i] == c.pfa_empirical[i]);
            CHECK(c.pd_theory[i] == Approx(c.pfa_theory[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("GS and RS keep a constant false-alarm rate", "[harness]") {
    std::mt19937_64 g(31);
    std::uniform_real_distribution<double> ang(-70.0, 70.0), rho(0.0, 0.95);
    const long trials = 4000;
    for (int geo = 0; geo < 3; ++geo) {
        ScenarioConfig s = synthetic();
        s.object_angle_deg = ang(g);
        for (SyntheticInterferer& it : s.synthetic_interferers) {
            it.angle_deg = ang(g);
            it.rho = rho(g);
        }
        for (double inr : {-20.0, 10.0}) {
            const std::vector<RocCurve> curves = run_roc(s, inr, {Detector::Rs, Detector::Gs}, {trials, 17u + geo, 0.0, 1});
            for (const RocCurve& c : curves)
                for (std::size_t i = 0; i < c.gamma.size(); ++i) {
                    const double p = c.pfa_theory[i];
                    const double band = 3.0 * std::sqrt(p * (1.0 - p) / trials);
                    CHECK(std::abs(c.pfa_empirical[i] - p) <= band);
                }
        }
    }
}

TEST_CASE("theory curves emitted for every INR", "[harness]") {
    const ScenarioConfig s = synthetic();
    std::vector<std::pair<double, std::vector<DetectionCurve>>> by_inr;
    for (double inr : s.inr_db) by_inr.emplace_back(inr, theory_curves(s, inr, all_detectors()));
    const std::string csv = theory_csv(by_inr);
    long lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 1 + 3 * 4 * s.pfa_points);
    CHECK(csv.rfind("inr_db,detector,lambda,gamma,pfa,pd\n", 0) == 0);
}

TEST_CASE("heatmap dimensions and structure", "[harness]") {
    const ScenarioConfig s = realistic();
    HeatmapOptions opt;
    opt.seed = 5;
    opt.threads = 1;
    const std::vector<HeatmapGrid> grids = run_heatmap(s, all_detectors(), opt);
    REQUIRE(grids.size() == 5);
    CHECK(grids[0].statistic == "angle_fft");
    const std::vector<double> angles = angle_grid(s.geom, s.processing.angle_grid);
    for (const HeatmapGrid& g : grids) {
        CHECK(g.db.rows() == s.processing.range_fft);
        CHECK(g.db.cols() == static_cast<long>(angles.size()));
        CHECK(g.db.allFinite());
    }
    const std::string csv = heatmap_csv(grids[0]);
    long lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 1 + s.processing.range_fft);

    // same bytes with more workers
    opt.threads = 3;
    CHECK(heatmap_csv(run_heatmap(s, all_detectors(), opt)[4]) == heatmap_csv(grids[4]));

    const auto& fft = grids[0].db;
    const auto& clair = grids[1].db;
    const auto& gs = grids[4].db;
    for (double phi : {s.interferers[0].rx_angle_deg, s.interferers[1].rx_angle_deg}) {
        const long a = static_cast<long>(nearest_angle(angles, phi));
        // strongest interference cells at this angle
        std::vector<long> bins(static_cast<std::size_t>(fft.rows()));
        std::iota(bins.begin(), bins.end(), 0L);
        std::partial_sort(bins.begin(), bins.begin() + 20, bins.end(), [&](long x, long y) { return fft(x, a) > fft(y, a); });
        double c_mean = 0.0, g_mean = 0.0, f_mean = 0.0;
        for (int i = 0; i < 20; ++i) {
            c_mean += clair(bins[static_cast<std::size_t>(i)], a) / 20.0;
            g_mean += gs(bins[static_cast<std::size_t>(i)], a) / 20.0;
            f_mean += fft(bins[static_cast<std::size_t>(i)], a) / 20.0;
        }
        INFO("angle " << phi << " fft " << f_mean << " gs " << g_mean << " clairvoyant " << c_mean);
        CHECK(c_mean <= g_mean);
        CHECK(f_mean >= g_mean + 10.0);
    }

    // the first object's cell holds an angle-FFT local maximum near its angle
    const ObjectDerived od = derive(s.victim, s.geom, s.objects[0]);
    const long lb = range_bin_of(od.f_range, s.processing.range_fft);
    const long ao = static_cast<long>(nearest_angle(angles, s.objects[0].angle_deg));
    HeatmapOptions quiet = opt;
    ScenarioConfig clean = s;
    clean.interferers.clear();
    const std::vector<HeatmapGrid> obj = run_heatmap(clean, {Detector::Rs}, quiet);
    long best = 0;
    for (long a = 0; a < obj[0].db.cols(); ++a)
        if (obj[0].db(lb, a) > obj[0].db(lb, best)) best = a;
    CHECK(std::abs(best - ao) <= 1);
}

TEST_CASE("sparse and full decodes give the same noise law", "[harness]") {
    ScenarioConfig s = realistic();
    s.victim.samples = 64;
    s.victim.pulses = 16;
    s.processing.range_fft = 128;
    s.processing.doppler_fft = 16;
    s.processing.test_doppler_bin = 0;
    s.objects.clear();
    for (InterfererTruth& it : s.interferers) {
        it.chirp.pulses = 16;
        it.codes = make_codes(CodeMode::DdmChu, 16, it.tx());
    }
    const RealisticScene scene = build_scene(s);
    const std::vector<long> rb{5, 40}, db{0, 3};
    // deterministic parts agree exactly
    Rng r0 = substream(1, 2, 3);
    ScenarioConfig quiet = s;
    quiet.noise_power_db = -600.0;
    const RealisticScene qs = build_scene(quiet);
    const SceneCubes full = decode_scene(qs, r0, rb, db);
    const SceneCubes sparse = decode_scene_sparse(qs, r0, rb, db);
    for (std::size_t i = 0; i < full.total.data.size(); ++i) {
        CHECK((full.total.data[i] - sparse.total.data[i]).norm() <= 1e-9 * std::max(1.0, full.total.data[i].norm()));
        CHECK((full.interference.data[i] - sparse.interference.data[i]).norm() <= 1e-9 * std::max(1.0, full.interference.data[i].norm()));
    }
    // noise second moments agree
    const long draws = 400;
    double e_full = 0.0, e_sparse = 0.0;
    cdouble c_full = 0.0, c_sparse = 0.0;
    for (long d = 0; d < draws; ++d) {
        Rng a = substream(7, 1, static_cast<std::uint64_t>(d));
        Rng b = substream(7, 2, static_cast<std::uint64_t>(d));
        const SceneCubes f = decode_scene(scene, a, rb, db);
        const SceneCubes p = decode_scene_sparse(scene, b, rb, db);
        const CVector nf = snapshot(f.total, 5, 0).entries - snapshot(f.interference, 5, 0).entries;
        const CVector np = snapshot(p.total, 5, 0).entries - snapshot(p.interference, 5, 0).entries;
        const CVector nf2 = snapshot(f.total, 40, 3).entries - snapshot(f.interference, 40, 3).entries;
        const CVector np2 = snapshot(p.total, 40, 3).entries - snapshot(p.interference, 40, 3).entries;
        e_full += nf.squaredNorm();
        e_sparse += np.squaredNorm();
        c_full += nf.dot(nf2);
        c_sparse += np.dot(np2);
    }
    // E|w|^2 = M N L K sigma2 per snapshot entry sum
    const double expect = static_cast<double>(s.geom.virtual_size() * 64 * 16) * s.sigma2();
    CHECK(e_full / draws == Approx(expect).epsilon(0.05));
    CHECK(e_sparse / draws == Approx(expect).epsilon(0.05));
    CHECK(std::abs(c_full - c_sparse) / draws < 0.05 * expect);
}

TEST_CASE("OIP runs", "[harness]") {
    ScenarioConfig s = realistic();
    const std::vector<OipSample> a = run_oip(s, all_detectors(), {6, 3, 1});
    const std::vector<OipSample> b = run_oip(s, all_detectors(), {6, 3, 2});
    REQUIRE(a.size() == 6 * 5);
    CHECK(oip_csv(a) == oip_csv(b));
    for (const OipSample& x : a) {
        CHECK(std::isfinite(x.oip_db));
        CHECK(x.angle_deg >= -80.0);
        CHECK(x.angle_deg <= 80.0);
        CHECK(x.range_m >= 1.0);
        CHECK(x.range_m <= 3.0);
    }
    CHECK(oip_csv(a).rfind("detector,run,angle_deg,range_m,oip_db\n", 0) == 0);

    // silent interferers: every statistic sits on the noise-only law, so the
    // clairvoyant and plain statistics coincide
    for (InterfererTruth& it : s.interferers) it.amplitude = 0.0;
    const std::vector<OipSample> quiet = run_oip(s, all_detectors(), {40, 4, 1});
    const std::vector<double> mf = oip_values(quiet, "angle_fft");
    const std::vector<double> cl = oip_values(quiet, "clairvoyant");
    REQUIRE(mf.size() == 40);
    for (std::size_t i = 0; i < mf.size(); ++i) CHECK(mf[i] == Approx(cl[i]).margin(1e-9));
    // chi-squared(2) median ln 4 = 1.386, i.e. 1.42 dB, with a generous margin for 40 runs
    CHECK(percentile(mf, 50.0) == Approx(10.0 * std::log10(2.0 * std::log(2.0))).margin(2.5));
}

TEST_CASE("percentiles and CDF output", "[harness]") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(percentile(v, 50.0) == 3.0);
    CHECK(percentile(v, 80.0) == Approx(4.2));
    CHECK(percentile(v, 0.0) == 1.0);
    CHECK_THROWS_AS(percentile({}, 50.0), InvalidArgumentError);
    std::vector<OipSample> s;
    for (int i = 0; i < 4; ++i) s.push_back({"gs", i, 0.0, 1.0, static_cast<double>(i)});
    const std::string cdf = oip_cdf_csv(s, {"gs"});
    CHECK(cdf.find("gs,3,1\n") != std::string::npos);
    CHECK(inr_tag(-10.0) == "inr_m10");
}

TEST_CASE("SVG output is well formed", "[harness]") {
    const std::vector<RocCurve> curves = run_roc(synthetic(), -10.0, all_detectors(), {300, 1, 0.0, 1});
    const std::string svg = line_svg(roc_plot(curves, -10.0));
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("gs") != std::string::npos);
}

TEST_CASE("command-line exit codes", "[harness]") {
    const fs::path out = scratch("cli");
    const std::string cfg = kScenarios + "/synthetic_4x4.json";
    CHECK(run_cli("roc --config " + cfg + " --trials 300 --out " + out.string()) == 0);
    CHECK(fs::exists(out / "roc_inr_m10.csv"));
    const std::string first = slurp(out / "roc_inr_m10.csv");
    CHECK(run_cli("roc --config " + cfg + " --trials 300 --threads 2 --out " + out.string()) == 0);
    CHECK(slurp(out / "roc_inr_m10.csv") == first);
    CHECK(run_cli("theory --config " + cfg + " --format svg --out " + out.string()) == 0);
    CHECK(run_cli("validate-special-cases --pulses 16 --out " + out.string()) == 0);

    CHECK(run_cli("heatmap") == 2);
    CHECK(run_cli("roc --config " + cfg + " --detectors nope") == 2);
    CHECK(run_cli("roc --config /no/such/file.json") == 4);
    std::ofstream(out / "bad.json") << "{\"mode\": \"synthetic\", \"trials\": -3}";
    CHECK(run_cli("roc --config " + (out / "bad.json").string()) == 2);
    CHECK(run_cli("roc --config " + cfg + " --trials 10 --out /proc/forbidden") == 4);
    fs::remove_all(out);
}
