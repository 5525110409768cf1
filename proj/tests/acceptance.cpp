// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
// Exit status is the number of failing lines (capped at 1).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "app.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace stmbus;
using namespace stmbus::cli;

namespace {

// Tolerances and frozen calibration values.
constexpr double kStaticFloorDbc = -60.0;
constexpr double kHarmonicDbc = -30.0;
constexpr int kMinHarmonics = 2;
constexpr double kLineRuntimeS = 30.0;
constexpr double kOnsetThresholdDb = -6.0;
constexpr double kOnsetSnapshotNs = 0.0125;
constexpr double kOnsetEndNs = 1.0;
constexpr double kReciprocityDb = 1.0;
constexpr double kIsolationFrozenDb = -7.100;
constexpr double kIsolationTolDb = 0.5;
constexpr double kWidthGrowth = 1.1, kSlowdown = 0.95;
constexpr double kControlLo = 0.98, kControlHi = 1.02;
constexpr double kEjOverEc = 200.0;
constexpr double kOmegaTol = 0.01, kAlphaTol = 0.05, kChiTol = 0.05, kMaxDispersiveRatio = 0.1;
constexpr double kT1RecipLoUs = 8.0, kT1RecipHiUs = 60.0, kT1RecipMinUs = 15.0;
constexpr double kT1NrTol = 0.10, kT1Ratio = 10.0, kT2Ratio = 5.0;
constexpr double kRecipErrLo = 1e-3, kRecipErrHi = 1e-1, kNrErr = 1e-5;
constexpr double kCrossing = 1e-4;
constexpr int kCrossLo = 5, kCrossHi = 8;
constexpr double kCrosstalkCut = 0.99, kPurcellCut = 0.98, kDephaseCut = 0.95;
constexpr double kQuadratureTol = 1e-6, kMarkovTol = 0.02, kMarkovRatio = 100.0, kGammaSpread = 1e-3;
constexpr double kSlope = -1.0, kSlopeTol = 0.15, kStretch = 0.3;
constexpr double kEcho1f = 3.0, kEchoFiltered = 2.0, kEchoTol = 0.5;
constexpr double kSpectroscopyRuntimeS = 60.0;

class Report {
public:
    void add(const std::string& id, bool pass, const std::string& detail) {
        std::printf("%s  %-4s %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
        std::fflush(stdout);
        ++total_;
        failed_ += !pass;
    }
    int failed() const { return failed_; }
    int total() const { return total_; }

private:
    int total_ = 0, failed_ = 0;
};

template <class... A>
std::string fmt(const char* f, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json config_with(std::initializer_list<const char*> sets) {
    Json cfg = default_config();
    for (const char* s : sets) apply_assignment(cfg, s);
    return cfg;
}

LineSetup line_with(std::initializer_list<const char*> sets) { return line_setup(config_with(sets)); }

SpectrumReport cw_spectrum(const LineSetup& s, int n_max) {
    Simulator sim(s.geom, s.drive, s.source, s.options);
    sim.watch(s.probe);
    sim.run_until(s.window_end + sim.dt(), {});
    return harmonic_spectrum(sim, s.probe, s.window_start, s.window_end, n_max);
}

std::optional<double> onset(const LineSetup& s) {
    Simulator sim(s.geom, s.drive, s.source, s.options);
    std::vector<double> snaps;
    for (double t = kOnsetSnapshotNs; t <= kOnsetEndNs + 1e-9; t += kOnsetSnapshotNs) snaps.push_back(t * 1e-9);
    const double period = two_pi / s.source.omega;
    return harmonic_onset(sim.run_until(snaps.back(), snaps), s.geom, s.drive, s.source.omega, kOnsetThresholdDb,
                          4.0 * period);
}

std::vector<WavepacketMetrics> packet(const char* rf) {
    std::string set = std::string("line.drive.phi_rf_rad=") + rf;
    auto s = line_with({"line.source.kind=\"gaussian-pulse\"", set.c_str()});
    Simulator sim(s.geom, s.drive, s.source, s.options);
    std::vector<double> snaps;
    for (int i = 0; i <= 5; ++i) snaps.push_back(0.2e-9 + 0.05e-9 * i);
    return wavepacket_metrics(sim.run_until(snaps.back(), snaps), s.geom);
}

void criterion_1(Report& rep) {
    auto t0 = std::chrono::steady_clock::now();
    auto quiet = cw_spectrum(line_with({"line.drive.phi_rf_rad=0"}), 6);
    auto driven = cw_spectrum(line_with({}), 6);
    const double elapsed = seconds_since(t0);
    double worst = -400.0;
    for (std::size_t i = 1; i < quiet.power_dbc.size(); ++i) worst = std::max(worst, quiet.power_dbc[i]);
    rep.add("1a", worst < kStaticFloorDbc, fmt("static line: max n>=2 bin %.1f dBc (< %.0f)", worst, kStaticFloorDbc));
    const int above = driven.count_above(kHarmonicDbc);
    rep.add("1b", above >= kMinHarmonics,
            fmt("dc 0.6 / rf 0.6: %d harmonics above %.0f dBc by 0.8 ns (>= %d)", above, kHarmonicDbc, kMinHarmonics));
    rep.add("1c", elapsed < kLineRuntimeS, fmt("both runs at 512 cells took %.2f s (< %.0f s)", elapsed, kLineRuntimeS));
}

void criterion_2(Report& rep) {
    std::vector<double> h;
    for (const char* rf : {"line.drive.phi_rf_rad=0.2", "line.drive.phi_rf_rad=0.3", "line.drive.phi_rf_rad=0.4"})
        h.push_back(cw_spectrum(line_with({"line.drive.phi_dc_rad=0.8", rf}), 6).harmonic_content_db());
    rep.add("2a", h[0] < h[1] && h[1] < h[2],
            fmt("dc 0.8: harmonic power %.2f / %.2f / %.2f dBc at rf 0.2 / 0.3 / 0.4 (strictly rising)", h[0], h[1],
                h[2]));
    auto t6 = onset(line_with({}));
    auto t7 = onset(line_with({"line.drive.phi_dc_rad=0.7"}));
    const bool ok = t7 && (!t6 || *t7 < *t6);
    rep.add("2b", ok,
            fmt("rf 0.6: spatial harmonic fraction reaches %.0f dB at %s ns (dc 0.7) vs %s ns (dc 0.6)",
                kOnsetThresholdDb, t7 ? fmt("%.4f", *t7 * 1e9).c_str() : "never",
                t6 ? fmt("%.4f", *t6 * 1e9).c_str() : "never"));
}

void criterion_3(Report& rep) {
    std::vector<int> hs{1, 2, 3, 4, 5, 6};
    auto standing = line_with({"line.drive.modulation_periods_per_line=0"});
    auto rows = isolation_report(standing.geom, standing.drive, standing.source, hs, standing.iso_start,
                                 standing.iso_end, standing.options);
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, std::abs(r.isolation_db));
    rep.add("3a", worst < kReciprocityDb,
            fmt("kappa_s = 0: max |forward - backward| %.3f dB over n = 1..6 (< %.1f)", worst, kReciprocityDb));
    auto traveling = line_with({});
    auto fund = isolation_report(traveling.geom, traveling.drive, traveling.source, {1}, traveling.iso_start,
                                 traveling.iso_end, traveling.options)[0].isolation_db;
    rep.add("3b", std::abs(fund - kIsolationFrozenDb) <= kIsolationTolDb,
            fmt("default kappa_s: fundamental isolation %.3f dB (frozen %.3f +- %.1f)", fund, kIsolationFrozenDb,
                kIsolationTolDb));
}

void criterion_4(Report& rep) {
    auto mod = packet("0.6");
    auto ctl = packet("0");
    const double w = mod.back().rms_width / mod.front().rms_width;
    const double v = *mod.back().peak_velocity / *mod[1].peak_velocity;
    rep.add("4a", w > kWidthGrowth && v < kSlowdown,
            fmt("modulated pulse: width ratio %.3f (> %.2f), velocity ratio %.3f (< %.2f)", w, kWidthGrowth, v,
                kSlowdown));
    const double wc = ctl.back().rms_width / ctl.front().rms_width;
    const double vc = *ctl.back().peak_velocity / *ctl[1].peak_velocity;
    auto in = [](double x) { return x >= kControlLo && x <= kControlHi; };
    rep.add("4b", in(wc) && in(vc),
            fmt("unmodulated control: width ratio %.4f, velocity ratio %.4f (both in [%.2f, %.2f])", wc, vc,
                kControlLo, kControlHi));
}

void criterion_5(Report& rep) {
    TransmonSpec s;
    s.ec = 0.25e9;
    const double ej = kEjOverEc * s.ec;
    s.ej_max = ej;
    auto q = diagonalize(s, ej);
    const double wq_ref = std::sqrt(8.0 * ej * s.ec) - s.ec;
    const double dw = std::abs(q.omega_q / wq_ref - 1.0);
    rep.add("5a", dw <= kOmegaTol,
            fmt("E_J/E_C = 200: omega_q %.6f GHz vs sqrt(8 E_J E_C) - E_C = %.6f GHz, off %.3f%% (<= %.0f%%)",
                q.omega_q * 1e-9, wq_ref * 1e-9, 100 * dw, 100 * kOmegaTol));
    const double da = std::abs(q.anharmonicity / -s.ec - 1.0);
    rep.add("5b", da <= kAlphaTol,
            fmt("E_J/E_C = 200: alpha = %.4f E_C, off %.2f%% from -E_C (<= %.0f%%)", q.anharmonicity / s.ec,
                100 * da, 100 * kAlphaTol));

    TransmonSpec t;
    t.ec = 0.25e9;
    t.ej_max = 12.5e9;
    ReadoutSpec ro;  // 7 GHz, g = 100 MHz
    auto c = chi_dispersive(t, t.ej_max, ro);
    const double wq = c.delta + ro.omega_r;
    const double exact = oracle::jc_pull(wq, ro.omega_r, ro.g_r);
    const double dc = std::abs(c.chi / exact - 1.0);
    rep.add("5c", c.dispersive_ratio <= kMaxDispersiveRatio && dc <= kChiTol,
            fmt("chi %.4f MHz vs JC oracle %.4f MHz at g/|Delta| = %.3f, off %.1f%% (<= %.0f%%); alpha/Delta = %.3f",
                c.chi * 1e-6, exact * 1e-6, c.dispersive_ratio, 100 * dc, 100 * kChiTol, c.alpha / c.delta));
}

void criterion_6(Report& rep) {
    const Json cfg = default_config();
    auto a = array_from(cfg);
    auto r = bus_from(cfg, BusKind::reciprocal), n = bus_from(cfg, BusKind::nonreciprocal);
    double lo = 1e9, hi = 0.0, nr_dev = 0.0, t1_ratio = 0.0, t2_ratio = 0.0;
    for (int i = 0; i < a.n_qubits; ++i) {
        double t1r = t1_effective(a, r, i), t1n = t1_effective(a, n, i);
        lo = std::min(lo, t1r);
        hi = std::max(hi, t1r);
        nr_dev = std::max(nr_dev, std::abs(t1n / a.t1_intrinsic - 1.0));
        t1_ratio += t1n / t1r / a.n_qubits;
        t2_ratio += t2_effective(a, n, i) / t2_effective(a, r, i) / a.n_qubits;
    }
    rep.add("6a", lo * 1e6 >= kT1RecipLoUs && hi * 1e6 <= kT1RecipHiUs && lo * 1e6 < kT1RecipMinUs,
            fmt("reciprocal T1 spans %.2f..%.2f us (in [%.0f, %.0f], min < %.0f)", lo * 1e6, hi * 1e6, kT1RecipLoUs,
                kT1RecipHiUs, kT1RecipMinUs));
    rep.add("6b", nr_dev <= kT1NrTol,
            fmt("nonreciprocal T1 within %.2f%% of %.0f us (<= %.0f%%)", 100 * nr_dev, a.t1_intrinsic * 1e6,
                100 * kT1NrTol));
    rep.add("6c", t1_ratio >= kT1Ratio && t2_ratio >= kT2Ratio,
            fmt("mean improvement T1 x%.1f (>= %.0f), T2 x%.1f (>= %.0f)", t1_ratio, kT1Ratio, t2_ratio, kT2Ratio));
}

void criterion_7(Report& rep) {
    const Json cfg = default_config();
    auto a = array_from(cfg);
    auto r = bus_from(cfg, BusKind::reciprocal), n = bus_from(cfg, BusKind::nonreciprocal);
    double rlo = 1.0, rhi = 0.0, nhi = 0.0;
    for (const auto& row : error_budget(a, r)) rlo = std::min(rlo, row.e_total), rhi = std::max(rhi, row.e_total);
    for (const auto& row : error_budget(a, n)) nhi = std::max(nhi, row.e_total);
    rep.add("7a", rlo >= kRecipErrLo && rhi <= kRecipErrHi,
            fmt("reciprocal errors %.3e..%.3e (in [%.0e, %.0e])", rlo, rhi, kRecipErrLo, kRecipErrHi));
    rep.add("7b", nhi < kNrErr,
            fmt("nonreciprocal max error %.3e (< %.0e); floor T_gate/T1_int = %.3e", nhi, kNrErr,
                a.t_gate / a.t1_intrinsic));

    const auto& e = cfg.at("error_budget");
    std::vector<int> ns;
    for (int k = e.at("scalability_n_min").get<int>(); k <= e.at("scalability_n_max").get<int>(); ++k) ns.push_back(k);
    auto sr = scalability_sweep(a, r, ns), sn = scalability_sweep(a, n, ns);
    std::optional<int> cross;
    for (const auto& p : sr)
        if (p.worst_case_error > kCrossing) {
            cross = p.n;
            break;
        }
    rep.add("7c", cross && *cross >= kCrossLo && *cross <= kCrossHi,
            fmt("reciprocal worst case first exceeds %.0e at N = %s (in [%d, %d]); worst at N = %d is %.3e", kCrossing,
                cross ? std::to_string(*cross).c_str() : "never", kCrossLo, kCrossHi, sr.front().n,
                sr.front().worst_case_error));
    rep.add("7d", sn.back().worst_case_error < kCrossing,
            fmt("nonreciprocal worst case at N = %d is %.3e (< %.0e)", sn.back().n, sn.back().worst_case_error,
                kCrossing));
}

void criterion_8(Report& rep) {
    const Json cfg = default_config();
    auto a = array_from(cfg);
    const int h = cfg.at("error_budget").at("decomposition_harmonic").get<int>();
    const int q = qubit_at_harmonic(a, h);
    auto r = budget_decomposition(a, bus_from(cfg, BusKind::reciprocal), q);
    auto n = budget_decomposition(a, bus_from(cfg, BusKind::nonreciprocal), q);
    const bool largest = r.e_crosstalk > r.e_relax && r.e_crosstalk > r.e_dephase;
    rep.add("8a", largest,
            fmt("omega = %d omega_m, reciprocal fractions: crosstalk %.3g, relax %.3g, dephase %.3g", h,
                r.fraction_crosstalk(), r.fraction_relax(), r.fraction_dephase()));
    const double dx = 1.0 - n.e_crosstalk / r.e_crosstalk, dp = 1.0 - n.e_purcell / r.e_purcell,
                 dd = 1.0 - n.e_dephase / r.e_dephase;
    rep.add("8b", dx >= kCrosstalkCut && dp >= kPurcellCut && dd >= kDephaseCut,
            fmt("nonreciprocal reductions: crosstalk %.2f%% (>= %.0f), Purcell %.2f%% (>= %.0f), dephasing %.2f%% "
                "(>= %.0f)",
                100 * dx, 100 * kCrosstalkCut, 100 * dp, 100 * kPurcellCut, 100 * dd, 100 * kDephaseCut));
}

void criterion_9(Report& rep) {
    const Json cfg = default_config();
    const Json& j = cfg.at("nonmarkov");
    KernelSpec k;
    k.gamma_memory = two_pi * j.at("gamma_memory_mhz").get<double>() * 1e6;
    k.amplitude_a = j.at("amplitude_over_gamma_memory_sq").get<double>() * sq(k.gamma_memory);
    const double t_end = j.at("t_end_us").get<double>() * 1e-6;
    const int n = j.at("n_points").get<int>() - 1;
    const double gamma = j.at("markovian_gamma_per_us").get<double>() * 1e6;
    const int window = j.at("smoothing_window").get<int>();
    const auto grid = linspace(0.0, t_end, static_cast<std::size_t>(n + 1));

    auto tr = evolve_kernel(TwoLevelState::excited(), k, grid);
    auto ref = oracle::volterra_extrapolated(k.amplitude_a, k.gamma_memory, t_end, n);
    double dq = 0.0;
    for (int i = 0; i <= n; ++i) dq = std::max(dq, std::abs(tr.rho00[i] - ref[i]));
    rep.add("9a", dq <= kQuadratureTol,
            fmt("embedding vs trapezoid quadrature: max |diff| %.2e over %d points (<= %.0e)", dq, n + 1,
                kQuadratureTol));

    KernelSpec fast;
    fast.gamma_memory = kMarkovRatio * gamma;
    fast.amplitude_a = gamma * fast.gamma_memory;
    const auto long_grid = linspace(0.0, 5.0 / gamma, 501);
    auto mk = evolve_kernel(TwoLevelState::excited(), fast, long_grid);
    double dm = 0.0;
    for (std::size_t i = 0; i < long_grid.size(); ++i) dm = std::max(dm, std::abs(mk.rho00[i] - std::exp(-gamma * long_grid[i])));
    rep.add("9b", dm <= kMarkovTol,
            fmt("Gamma = 100 gamma, A = gamma Gamma: max |p - exp(-gamma t)| %.4f over 5/gamma (<= %.2f)", dm,
                kMarkovTol));

    auto iv = backflow_interval(gamma_eff_segments(tr, window));
    rep.add("9c", iv.has_value(),
            iv ? fmt("default kernel: gamma_eff < 0 on [%.4g, %.4g] us", iv->start * 1e6, iv->end * 1e6)
               : std::string("default kernel: no interval with gamma_eff < 0"));

    auto mt = evolve_markovian(TwoLevelState::excited(), gamma, grid);
    auto ge = gamma_eff(mt.t, mt.rho00, window);
    double mean = 0.0, var = 0.0;
    for (double g : ge) mean += g / ge.size();
    for (double g : ge) var += sq(g - mean) / ge.size();
    const double spread = std::sqrt(var) / mean;
    rep.add("9d", spread < kGammaSpread, fmt("Markovian gamma_eff std/mean %.2e (< %.0e)", spread, kGammaSpread));
}

void criterion_10(Report& rep) {
    auto t0 = std::chrono::steady_clock::now();
    const Json cfg = default_config();
    const Json& j = cfg.at("spectroscopy");
    const auto seed = cfg.at("seed").get<std::uint64_t>();
    const int n_real = j.at("n_realizations").get<int>();
    const int pts = j.at("tau_points").get<int>();
    const double floor = j.at("fit_min_contrast").get<double>();
    const Json& pg = j.at("periodogram");
    auto m1 = noise_from(j.at("one_over_f"), NoiseKind::one_over_f);
    auto mf = noise_from(j.at("filtered"), NoiseKind::filtered);

    auto p = mean_periodogram(m1, pg.at("duration_ms").get<double>() * 1e-3, pg.at("dt_us").get<double>() * 1e-6,
                              pg.at("n_realizations").get<int>(), seed);
    const double slope = spectral_slope(p, 2.0 * m1.f_min, 0.5 * m1.f_max);
    rep.add("10a", std::abs(slope - kSlope) <= kSlopeTol,
            fmt("1/f periodogram slope %.3f (%.1f +- %.2f)", slope, kSlope, kSlopeTol));

    auto tau = [&](const Json& sec, const char* key) {
        return linspace(0.0, sec.at(key).get<double>() * 1e-6, static_cast<std::size_t>(pts));
    };
    auto beta = [&](const std::vector<double>& t, const std::vector<double>& y) {
        auto [x, v] = fit_window(t, y, floor);
        return fit_decay(x, v, DecayModel::stretched_exponential).beta;
    };
    const auto tr = tau(j.at("one_over_f"), "ramsey_tau_max_us");
    const auto ramsey_1f = ramsey(m1, tr, n_real, seed);
    const double br = beta(tr, ramsey_1f);
    rep.add("10b", std::abs(br - 1.0) > kStretch, fmt("1/f Ramsey beta %.3f (|beta - 1| > %.1f)", br, kStretch));

    const auto te1 = tau(j.at("one_over_f"), "echo_tau_max_us");
    const auto tef = tau(j.at("filtered"), "echo_tau_max_us");
    const double b1 = beta(te1, hahn_echo(m1, te1, n_real, seed));
    const double bf = beta(tef, hahn_echo(mf, tef, n_real, seed));
    rep.add("10c", b1 > bf && std::abs(b1 - kEcho1f) <= kEchoTol && std::abs(bf - kEchoFiltered) <= kEchoTol,
            fmt("echo beta 1/f %.3f (%.0f +- %.1f) > filtered %.3f (%.0f +- %.1f)", b1, kEcho1f, kEchoTol, bf,
                kEchoFiltered, kEchoTol));

    const auto echo_on_ramsey_grid = hahn_echo(m1, tr, n_real, seed);
    int below = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) below += echo_on_ramsey_grid[i] < ramsey_1f[i];
    rep.add("10d", below == 0,
            fmt("1/f echo >= Ramsey at %zu of %zu delays up to %.0f us", tr.size() - below, tr.size(),
                tr.back() * 1e6));
    const double elapsed = seconds_since(t0);
    rep.add("10e", elapsed < kSpectroscopyRuntimeS,
            fmt("spectroscopy with %d realizations took %.1f s (< %.0f s)", n_real, elapsed, kSpectroscopyRuntimeS));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void criterion_11(Report& rep) {
    const fs::path root = fs::temp_directory_path() / "stmbus_acceptance_determinism";
    fs::remove_all(root);
    int compared = 0, differing = 0, failed_runs = 0;
    for (const auto& s : scenario_names()) {
        for (const char* run : {"a", "b"}) {
            const std::string out = (root / (s + "_" + run)).string();
            const char* argv[] = {"stmbus", s.c_str(), "--out", out.c_str()};
            std::ostringstream o, e;
            failed_runs += run_cli(4, argv, o, e) != 0;
        }
        for (const auto& f : fs::directory_iterator(root / (s + "_a"))) {
            if (f.path().filename() == "manifest.json") continue;
            ++compared;
            differing += slurp(f.path()) != slurp(root / (s + "_b") / f.path().filename());
        }
    }
    fs::remove_all(root);
    rep.add("11", failed_runs == 0 && differing == 0 && compared > 0,
            fmt("%zu scenarios run twice: %d of %d output files differ, %d runs failed", scenario_names().size(), differing,
                compared, failed_runs));
}

}  // namespace

int main() {
    Report rep;
    const std::pair<const char*, void (*)(Report&)> all[] = {
        {"1", criterion_1}, {"2", criterion_2}, {"3", criterion_3},   {"4", criterion_4},
        {"5", criterion_5}, {"6", criterion_6}, {"7", criterion_7},   {"8", criterion_8},
        {"9", criterion_9}, {"10", criterion_10}, {"11", criterion_11},
    };
    for (const auto& [id, fn] : all) {
        try {
            fn(rep);
        } catch (const std::exception& e) {
            rep.add(id, false, std::string("threw: ") + e.what());
        }
    }
    std::printf("%d of %d acceptance lines passed\n", rep.total() - rep.failed(), rep.total());
    return rep.failed() ? 1 : 0;
}
