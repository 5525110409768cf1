#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <stmbus/error_budget.hpp>
#include <stmbus/fit.hpp>
#include <stmbus/noise.hpp>
#include <stmbus/nonmarkov.hpp>
#include <stmbus/stpm_line.hpp>
#include <stmbus/transmon.hpp>

#include "output.hpp"

namespace stmbus::cli {

struct Result {
    std::vector<Table> tables;
    std::vector<std::pair<std::string, Json>> documents;  // written as <name>.json

    std::vector<Artifact> render_all(const std::string& format) const {
        std::vector<Artifact> out;
        for (const auto& t : tables) out.push_back(render(t, format));
        for (const auto& [name, doc] : documents) out.push_back(json_artifact(name, doc));
        return out;
    }
};

namespace detail {

inline double num(const Json& j, const char* key) { return j.at(key).get<double>(); }
inline int integer(const Json& j, const char* key) { return j.at(key).get<int>(); }

inline std::vector<double> grid(double lo, double hi, int points, const std::string& what) {
    if (points < 1) throw ConfigError(what + ": need at least one point");
    if (!(hi >= lo)) throw ConfigError(what + ": max below min");
    return linspace(lo, hi, static_cast<std::size_t>(points));
}

inline std::vector<int> int_list(const Json& j) {
    std::vector<int> out;
    for (const auto& e : j) {
        double x = e.get<double>();
        if (x != std::floor(x)) throw ConfigError("harmonic indices must be integers");
        out.push_back(static_cast<int>(x));
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------- line-sim

struct LineSetup {
    LineGeometry geom;
    FluxDrive drive;
    SourceSpec source;
    Simulator::Options options;
    double t_end = 0.0;
    std::vector<double> snapshots_ns;
    double probe = 0.0;  // m
    double window_start = 0.0, window_end = 0.0;
    int n_harmonics = 6;
    bool isolation = false;
    double iso_start = 0.0, iso_end = 0.0;
    int iso_harmonics = 6;
};

inline LineSetup line_setup(const Json& cfg) {
    using detail::num;
    const Json& l = cfg.at("line");
    LineSetup s;
    s.geom.n_cells = detail::integer(l, "n_cells");
    s.geom.dz = num(l, "dz_um") * 1e-6;
    s.geom.c_per_length = num(l, "c_per_length_pf_per_m") * 1e-12;
    s.geom.i0 = num(l, "i0_ua") * 1e-6;
    s.geom.validate();

    const Json& src = l.at("source");
    const auto kind = src.at("kind").get<std::string>();
    if (kind == "continuous-wave")
        s.source.kind = SourceKind::continuous_wave;
    else if (kind == "gaussian-pulse")
        s.source.kind = SourceKind::gaussian_pulse;
    else
        throw ConfigError("source kind must be continuous-wave or gaussian-pulse");
    s.source.omega = two_pi * num(src, "freq_ghz") * 1e9;
    s.source.amplitude = num(src, "amplitude_mv") * 1e-3;
    s.source.t_center = num(src, "t_center_ns") * 1e-9;
    s.source.t_width = num(src, "t_width_ns") * 1e-9;
    const auto port = src.at("port").get<std::string>();
    if (port != "left" && port != "right") throw ConfigError("source port must be left or right");
    s.source.port = port == "left" ? Port::left : Port::right;
    s.source.ramp_periods = num(src, "ramp_periods");
    s.source.validate();

    const Json& d = l.at("drive");
    s.drive = traveling_drive(s.geom, num(d, "phi_dc_rad"), num(d, "phi_rf_rad"),
                              num(d, "omega_s_over_omega_tone") * s.source.omega,
                              num(d, "modulation_periods_per_line"));
    s.drive.phase = num(d, "phase_rad");
    s.drive.margin = num(d, "margin_rad");
    s.drive.validate();

    s.options.cfl_safety = num(l, "cfl_safety");
    s.options.ceiling_factor = num(l, "ceiling_factor");
    if (!(s.options.ceiling_factor > 1.0)) throw ConfigError("ceiling_factor must exceed 1");
    const double dt_ps = num(l, "dt_ps");
    if (dt_ps < 0.0) throw ConfigError("dt_ps must be non-negative (0 selects the CFL step)");
    if (dt_ps > 0.0) s.options.dt = dt_ps * 1e-12;

    for (const auto& x : l.at("snapshot_times_ns")) s.snapshots_ns.push_back(x.get<double>());
    for (std::size_t i = 0; i < s.snapshots_ns.size(); ++i) {
        if (!(s.snapshots_ns[i] > 0.0)) throw ConfigError("snapshot times must be positive");
        if (i && !(s.snapshots_ns[i] > s.snapshots_ns[i - 1]))
            throw ConfigError("snapshot times must increase strictly");
    }
    s.t_end = num(l, "t_end_ns") * 1e-9;
    if (!(s.t_end > 0.0)) throw ConfigError("t_end_ns must be positive");

    const Json& sp = l.at("spectrum");
    const double pf = num(sp, "probe_fraction");
    if (!(pf > 0.0 && pf < 1.0)) throw ConfigError("probe_fraction must lie in (0, 1)");
    s.probe = pf * s.geom.length();
    s.window_start = num(sp, "window_start_ns") * 1e-9;
    s.window_end = num(sp, "window_end_ns") * 1e-9;
    s.n_harmonics = detail::integer(sp, "n_harmonics");
    if (s.n_harmonics < 1) throw ConfigError("n_harmonics must be at least 1");
    if (!(s.window_start >= 0.0 && s.window_end > s.window_start))
        throw ConfigError("spectrum window must satisfy 0 <= start < end");

    const Json& iso = l.at("isolation");
    s.isolation = iso.at("enabled").get<bool>();
    s.iso_start = num(iso, "window_start_ns") * 1e-9;
    s.iso_end = num(iso, "window_end_ns") * 1e-9;
    s.iso_harmonics = detail::integer(iso, "n_harmonics");
    if (s.isolation) {
        if (s.source.kind != SourceKind::continuous_wave)
            throw ConfigError("isolation needs a continuous-wave source");
        if (s.iso_harmonics < 1) throw ConfigError("isolation n_harmonics must be at least 1");
        if (!(s.iso_start >= 0.0 && s.iso_end > s.iso_start))
            throw ConfigError("isolation window must satisfy 0 <= start < end");
    }
    // Construction checks the CFL bound and the termination.
    Simulator probe_sim(s.geom, s.drive, s.source, s.options);
    (void)probe_sim;
    return s;
}

inline Result run_line_sim(const Json& cfg) {
    const LineSetup s = line_setup(cfg);
    const bool cw = s.source.kind == SourceKind::continuous_wave;
    Simulator sim(s.geom, s.drive, s.source, s.options);
    if (cw) sim.watch(s.probe);

    std::vector<double> snaps;
    for (double ns : s.snapshots_ns) snaps.push_back(ns * 1e-9);
    double t_end = s.t_end;
    if (!snaps.empty()) t_end = std::max(t_end, snaps.back());
    if (cw) t_end = std::max(t_end, s.window_end + sim.dt());
    const auto states = sim.run_until(t_end, snaps);

    Result r;
    for (std::size_t i = 0; i < states.size(); ++i) {
        Table t{"field_t" + format_number(s.snapshots_ns[i]), {"z_m", "v_volts", "i_amps"}, {}};
        const auto& st = states[i];
        for (int k = 0; k < s.geom.n_cells; ++k)
            t.add({s.geom.cell_center(k), 0.5 * (st.v[k] + st.v[k + 1]), st.current[k]});
        r.tables.push_back(std::move(t));
    }

    if (cw) {
        auto rep = harmonic_spectrum(sim, s.probe, s.window_start, s.window_end, s.n_harmonics);
        Table t{"spectrum", {"n", "freq_hz", "power_dbc", "power_abs"}, {}};
        for (std::size_t i = 0; i < rep.harmonic_index.size(); ++i)
            t.add({static_cast<long long>(rep.harmonic_index[i]), rep.freq_hz[i], rep.power_dbc[i],
                   rep.absolute_power[i]});
        r.tables.push_back(std::move(t));
    } else if (!states.empty()) {
        auto metrics = wavepacket_metrics(states, s.geom);
        Table t{"metrics", {"t_s", "centroid_m", "rms_width_m", "spectral_centroid_radpm", "peak_velocity_mps"}, {}};
        for (const auto& m : metrics)
            t.add({m.t, m.centroid, m.rms_width, m.spectral_centroid,
                   m.peak_velocity ? Cell(*m.peak_velocity) : Cell(std::monostate{})});
        r.tables.push_back(std::move(t));
    }

    if (s.isolation) {
        std::vector<int> hs;
        for (int n = 1; n <= s.iso_harmonics; ++n) hs.push_back(n);
        auto rows = isolation_report(s.geom, s.drive, s.source, hs, s.iso_start, s.iso_end, s.options);
        Table t{"isolation", {"n", "freq_hz", "forward_power", "backward_power", "isolation_db"}, {}};
        for (const auto& e : rows)
            t.add({static_cast<long long>(e.n), e.freq_hz, e.forward_power, e.backward_power, e.isolation_db});
        r.tables.push_back(std::move(t));
    }
    return r;
}

// -------------------------------------------------------------- flux-sweep

inline TransmonSpec transmon_from(const Json& cfg) {
    const Json& j = cfg.at("transmon");
    TransmonSpec s;
    s.ec = detail::num(j, "ec_ghz") * 1e9;
    s.ej_max = detail::num(j, "ej_max_ghz") * 1e9;
    s.ng = detail::num(j, "ng");
    s.n_charge_cut = detail::integer(j, "n_charge_cut");
    s.max_charge_cut = detail::integer(j, "max_charge_cut");
    s.n_levels = detail::integer(j, "n_levels");
    s.validate();
    return s;
}

inline Result run_flux_sweep(const Json& cfg) {
    const TransmonSpec spec = transmon_from(cfg);
    const Json& j = cfg.at("transmon");
    const auto phis = detail::grid(detail::num(j, "sweep_min_phi0"), detail::num(j, "sweep_max_phi0"),
                                   detail::integer(j, "sweep_points"), "flux sweep");
    ReadoutSpec ro;
    ro.omega_r = detail::num(j.at("readout"), "omega_r_ghz") * 1e9;
    ro.g_r = detail::num(j.at("readout"), "g_r_mhz") * 1e6;
    if (!(ro.omega_r > 0.0 && ro.g_r >= 0.0)) throw ConfigError("readout frequency must be positive");

    Result r;
    Table levels{"levels", {"phi_over_phi0", "level", "freq_hz"}, {}};
    Table disp{"dispersive",
               {"phi_over_phi0", "omega_q_hz", "anharmonicity_hz", "chi_hz", "dispersive_ratio", "dispersive"},
               {}};
    for (double phi : phis) {
        const double ej = ej_of_flux(spec.ej_max, phi);
        auto q = diagonalize(spec, ej);
        for (std::size_t k = 0; k < q.levels.size(); ++k)
            levels.add({phi, static_cast<long long>(k), q.levels[k]});
        auto c = chi_dispersive(spec, ej, ro);
        disp.add({phi, q.omega_q, q.anharmonicity, c.chi, c.dispersive_ratio, static_cast<long long>(c.dispersive)});
    }
    r.tables.push_back(std::move(levels));
    r.tables.push_back(std::move(disp));
    return r;
}

// -------------------------------------------------------------- addressing

inline AddressingDesign addressing_from(const Json& cfg) {
    using detail::num;
    const Json& j = cfg.at("addressing");
    AddressingDesign d;
    d.comb_hz = num(j, "comb_ghz") * 1e9;
    d.harmonic_indices = detail::int_list(j.at("harmonic_indices"));
    d.ec_per_harmonic = num(j, "ec_per_harmonic_ghz") * 1e9;
    d.ej_max_per_harmonic = num(j, "ej_max_per_harmonic_ghz") * 1e9;
    d.bias_min = num(j, "bias_min_rad");
    d.bias_max = num(j, "bias_max_rad");
    d.rf_design = num(j, "rf_design_rad");
    d.rf_coupling = num(j, "rf_coupling");
    d.sigma_res_hz = num(j, "sigma_res_mhz") * 1e6;
    d.rf_phase_samples = detail::integer(j, "rf_phase_samples");
    d.validate();
    return d;
}

inline Result run_addressing(const Json& cfg) {
    const Json& j = cfg.at("addressing");
    const auto dc = detail::grid(detail::num(j, "phi_dc_min_rad"), detail::num(j, "phi_dc_max_rad"),
                                 detail::integer(j, "phi_dc_points"), "phi_dc grid");
    const auto rf = detail::grid(detail::num(j, "phi_rf_min_rad"), detail::num(j, "phi_rf_max_rad"),
                                 detail::integer(j, "phi_rf_points"), "phi_rf grid");
    AddressingModel model(addressing_from(cfg));

    Result r;
    Table map{"addressing_map", {"phi_dc", "phi_rf", "qubit_index", "score", "freq_hz"}, {}};
    for (const auto& row : addressing_map(model, dc, rf))
        map.add({row.phi_dc, row.phi_rf, static_cast<long long>(row.qubit_index), row.score, row.freq_hz});
    Table design{"design", {"qubit_index", "harmonic", "design_bias_rad", "dc_gain", "target_hz"}, {}};
    for (std::size_t i = 0; i < model.size(); ++i) {
        const int n = model.design().harmonic_indices[i];
        design.add({static_cast<long long>(i + 1), static_cast<long long>(n), model.design_bias(i), model.dc_gain(i),
                    n * model.design().comb_hz});
    }
    r.tables.push_back(std::move(map));
    r.tables.push_back(std::move(design));
    return r;
}

// ------------------------------------------------- error-budget, scalability

inline QubitArraySpec array_from(const Json& cfg) {
    using detail::num;
    const Json& j = cfg.at("array");
    QubitArraySpec a;
    a.n_qubits = detail::integer(j, "n_qubits");
    a.omega_m = two_pi * num(j, "omega_m_ghz") * 1e9;
    a.harmonic_indices = detail::int_list(j.at("harmonic_indices"));
    a.pitch = num(j, "pitch_mm") * 1e-3;
    a.t1_intrinsic = num(j, "t1_intrinsic_us") * 1e-6;
    a.t2_intrinsic = num(j, "t2_intrinsic_us") * 1e-6;
    a.g_coupling = two_pi * num(j, "g_coupling_mhz") * 1e6;
    a.kappa_bus = two_pi * num(j, "kappa_bus_mhz") * 1e6;
    a.t_gate = num(j, "t_gate_ns") * 1e-9;
    a.lambda_c = num(j, "lambda_c_mm") * 1e-3;
    if (!(a.pitch > 0.0)) throw ConfigError("pitch must be positive");
    a.validate();
    return a.resolved();
}

inline BusIsolationModel bus_from(const Json& cfg, BusKind kind) {
    using detail::num;
    const Json& j = cfg.at("bus").at(to_string(kind));
    const double wm = two_pi * num(cfg.at("array"), "omega_m_ghz") * 1e9;
    BusIsolationModel m;
    m.kind = kind;
    m.c_purcell = num(j, "c_purcell");
    m.c_phi = num(j, "c_phi");
    m.c0 = num(j, "c0");
    m.delta_bw = num(j, "delta_bw_over_omega_m") * wm;
    m.omega_res = num(j, "omega_res_over_omega_m") * wm;
    m.gain.peak = num(j, "gain_peak");
    m.gain.center = num(j, "gain_center_over_omega_m") * wm;
    m.gain.width = num(j, "gain_width_over_omega_m") * wm;
    m.gain.floor = num(j, "gain_floor");
    m.z_base_slope = num(j, "z_base_slope");
    m.validate();
    return m;
}

inline Result run_error_budget(const Json& cfg) {
    const auto a = array_from(cfg);
    const int harmonic = detail::integer(cfg.at("error_budget"), "decomposition_harmonic");
    const int qi = qubit_at_harmonic(a, harmonic);
    Result r;
    Table dec{"decomposition",
              {"model", "qubit", "harmonic", "e_relax", "e_purcell", "e_dephase", "e_crosstalk", "e_total",
               "fraction_relax", "fraction_dephase", "fraction_crosstalk"},
              {}};
    for (BusKind k : {BusKind::reciprocal, BusKind::nonreciprocal}) {
        const auto m = bus_from(cfg, k);
        Table t{"budget_" + to_string(k),
                {"qubit", "omega_over_omega_m", "t1_s", "t2_s", "e_relax", "e_dephase", "e_crosstalk", "e_total"},
                {}};
        for (const auto& row : error_budget(a, m))
            t.add({static_cast<long long>(row.qubit), row.omega_over_omega_m, row.t1, row.t2, row.e_relax,
                   row.e_dephase, row.e_crosstalk, row.e_total});
        r.tables.push_back(std::move(t));
        const auto d = budget_decomposition(a, m, qi);
        dec.add({to_string(k), static_cast<long long>(d.qubit), static_cast<long long>(harmonic), d.e_relax,
                 d.e_purcell, d.e_dephase, d.e_crosstalk, d.e_total, d.fraction_relax(), d.fraction_dephase(),
                 d.fraction_crosstalk()});
    }
    r.tables.push_back(std::move(dec));
    return r;
}

inline Result run_scalability(const Json& cfg) {
    const auto a = array_from(cfg);
    const Json& j = cfg.at("error_budget");
    const int lo = detail::integer(j, "scalability_n_min"), hi = detail::integer(j, "scalability_n_max");
    if (!(lo >= 1 && hi >= lo)) throw ConfigError("scalability range must satisfy 1 <= n_min <= n_max");
    std::vector<int> ns;
    for (int n = lo; n <= hi; ++n) ns.push_back(n);
    Result r;
    Table t{"scalability", {"n", "worst_case_error", "model"}, {}};
    for (BusKind k : {BusKind::reciprocal, BusKind::nonreciprocal})
        for (const auto& p : scalability_sweep(a, bus_from(cfg, k), ns))
            t.add({static_cast<long long>(p.n), p.worst_case_error, to_string(k)});
    r.tables.push_back(std::move(t));
    return r;
}

// --------------------------------------------------------------- nonmarkov

inline Result run_nonmarkov(const Json& cfg) {
    using detail::num;
    const Json& j = cfg.at("nonmarkov");
    const double p0 = num(j, "initial_excited_population");
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw ConfigError("initial_excited_population must lie in [0, 1]");
    const double gm = num(j, "markovian_gamma_per_us") * 1e6;
    KernelSpec k;
    k.kind = KernelKind::exponential_kernel;
    k.gamma_memory = two_pi * num(j, "gamma_memory_mhz") * 1e6;
    k.amplitude_a = num(j, "amplitude_over_gamma_memory_sq") * sq(k.gamma_memory);
    k.validate();
    if (!(gm >= 0.0)) throw ConfigError("markovian gamma must be non-negative");
    const int n = detail::integer(j, "n_points");
    if (n < 5) throw ConfigError("nonmarkov n_points must be at least 5");
    const double t_end = num(j, "t_end_us") * 1e-6;
    if (!(t_end > 0.0)) throw ConfigError("t_end_us must be positive");
    const int window = detail::integer(j, "smoothing_window");
    const auto t = linspace(0.0, t_end, static_cast<std::size_t>(n));
    const auto s0 = TwoLevelState::from_bloch(0.0, 0.0, 2.0 * p0 - 1.0);

    Result r;
    Json summary = Json::object();
    const std::pair<std::string, PopulationTrace> runs[] = {{"markovian", evolve_markovian(s0, gm, t)},
                                                            {"kernel", evolve_kernel(s0, k, t)}};
    for (const auto& [name, tr] : runs) {
        Table pop{"population_" + name, {"t_s", "rho00"}, {}};
        for (std::size_t i = 0; i < tr.t.size(); ++i) pop.add({tr.t[i], tr.rho00[i]});
        Table ge{"gamma_eff_" + name, {"t_s", "gamma_eff_hz"}, {}};
        const auto rates = gamma_eff_segments(tr, window);
        for (const auto& s : rates) ge.add({s.t, s.gamma});
        r.tables.push_back(std::move(pop));
        r.tables.push_back(std::move(ge));
        Json entry = Json::object();
        if (auto b = backflow_interval(rates)) {
            entry["backflow_start_s"] = b->start;
            entry["backflow_end_s"] = b->end;
        } else {
            entry["backflow_start_s"] = nullptr;
            entry["backflow_end_s"] = nullptr;
        }
        summary[name] = entry;
    }
    r.documents.emplace_back("nonmarkov_summary", summary);
    return r;
}

// ------------------------------------------------------------ spectroscopy

inline NoiseModel noise_from(const Json& j, NoiseKind kind) {
    using detail::num;
    NoiseModel m;
    m.kind = kind;
    m.amplitude = num(j, "amplitude_rad2_per_s2");
    m.f_min = num(j, "f_min_hz");
    m.f_max = num(j, "f_max_hz");
    m.n_components = detail::integer(j, "n_components");
    if (kind == NoiseKind::filtered) {
        m.filter_center = num(j, "filter_center_hz");
        m.filter_depth_db = num(j, "filter_depth_db");
        m.filter_width_decades = num(j, "filter_width_decades");
    }
    m.validate();
    return m;
}

inline Json fit_document(const DecayFit& f) {
    Json j = Json::object();
    j["model"] = to_string(f.model);
    j["timescale_s"] = f.timescale;
    j["beta"] = f.beta;
    j["residual"] = f.residual;
    return j;
}

inline Result run_spectroscopy(const Json& cfg) {
    using detail::num;
    const Json& j = cfg.at("spectroscopy");
    const auto seed = cfg.at("seed").get<std::uint64_t>();
    const int n_real = detail::integer(j, "n_realizations");
    if (n_real < 200) throw ConfigError("spectroscopy needs at least 200 realizations");
    const int pts = detail::integer(j, "tau_points");
    if (pts < 8) throw ConfigError("tau_points must be at least 8");
    const double floor = num(j, "fit_min_contrast");
    if (!(floor > 0.0 && floor < 1.0)) throw ConfigError("fit_min_contrast must lie in (0, 1)");
    const Json& pg = j.at("periodogram");
    const int pg_n = detail::integer(pg, "n_realizations");
    const double pg_dur = num(pg, "duration_ms") * 1e-3, pg_dt = num(pg, "dt_us") * 1e-6;
    if (pg_n < 1 || !(pg_dur > 0.0 && pg_dt > 0.0 && pg_dt < pg_dur))
        throw ConfigError("periodogram settings are invalid");
    const std::pair<std::string, NoiseKind> kinds[] = {{"one_over_f", NoiseKind::one_over_f},
                                                       {"filtered", NoiseKind::filtered}};
    std::vector<NoiseModel> models;
    std::vector<std::pair<double, double>> tau_max;
    for (const auto& [name, kind] : kinds) {
        const Json& sec = j.at(name);
        models.push_back(noise_from(sec, kind));
        tau_max.emplace_back(num(sec, "ramsey_tau_max_us") * 1e-6, num(sec, "echo_tau_max_us") * 1e-6);
        if (!(tau_max.back().first > 0.0 && tau_max.back().second > 0.0))
            throw ConfigError("tau ranges must be positive");
    }

    Result r;
    Json summary = Json::object();
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        const std::string& name = kinds[mi].first;
        const NoiseModel& m = models[mi];
        const auto tau_r = linspace(0.0, tau_max[mi].first, static_cast<std::size_t>(pts));
        const auto tau_e = linspace(0.0, tau_max[mi].second, static_cast<std::size_t>(pts));
        const auto c_r = ramsey(m, tau_r, n_real, seed);
        const auto c_e = hahn_echo(m, tau_e, n_real, seed);
        Table tr{"ramsey_" + name, {"tau_s", "contrast"}, {}};
        for (std::size_t i = 0; i < tau_r.size(); ++i) tr.add({tau_r[i], c_r[i]});
        Table te{"echo_" + name, {"tau_s", "echo"}, {}};
        for (std::size_t i = 0; i < tau_e.size(); ++i) te.add({tau_e[i], c_e[i]});
        r.tables.push_back(std::move(tr));
        r.tables.push_back(std::move(te));

        auto [xr, yr] = fit_window(tau_r, c_r, floor);
        auto [xe, ye] = fit_window(tau_e, c_e, floor);
        r.documents.emplace_back("fit_ramsey_" + name,
                                 fit_document(fit_decay(xr, yr, DecayModel::stretched_exponential)));
        r.documents.emplace_back("fit_echo_" + name,
                                 fit_document(fit_decay(xe, ye, DecayModel::stretched_exponential)));

        const auto p = mean_periodogram(m, pg_dur, pg_dt, pg_n, seed);
        Table ts{"noise_spectrum_" + name, {"f_hz", "s_omega"}, {}};
        for (std::size_t i = 0; i < p.f_hz.size(); ++i) ts.add({p.f_hz[i], p.s_omega[i]});
        r.tables.push_back(std::move(ts));
        Json e = Json::object();
        e["spectral_slope"] = spectral_slope(p, 2.0 * m.f_min, 0.5 * m.f_max);
        summary[name] = e;
    }
    r.documents.emplace_back("spectroscopy_summary", summary);
    return r;
}

inline Result run_scenario(const Json& cfg) {
    check_top_level(cfg);
    const auto s = cfg.at("scenario").get<std::string>();
    if (s == "line-sim") return run_line_sim(cfg);
    if (s == "flux-sweep") return run_flux_sweep(cfg);
    if (s == "addressing") return run_addressing(cfg);
    if (s == "error-budget") return run_error_budget(cfg);
    if (s == "scalability") return run_scalability(cfg);
    if (s == "nonmarkov") return run_nonmarkov(cfg);
    return run_spectroscopy(cfg);
}

}  // namespace stmbus::cli
