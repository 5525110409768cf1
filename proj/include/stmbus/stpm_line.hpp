#pragma once

#include <algorithm>
#include <complex>
#include <future>
#include <map>
#include <optional>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "common.hpp"

namespace stmbus {

// Modulation knobs of the junction-array inductance. Flux values are in
// radians (2*pi*Phi/Phi0).
struct FluxDrive {
    double phi_dc = 0.6;
    double phi_rf = 0.6;
    double kappa_s = 0.0;  // rad/m
    double omega_s = 0.0;  // rad/s
    double phase = 0.0;
    double margin = 0.05;

    double limit() const { return pi / 2 - margin; }

    void validate() const {
        if (!(phi_rf >= 0.0)) throw ConfigError("phi_rf must be non-negative");
        if (!(margin > 0.0 && margin < pi / 2)) throw ConfigError("secant margin must lie in (0, pi/2)");
        if (!std::isfinite(kappa_s) || !std::isfinite(omega_s) || !std::isfinite(phase))
            throw ConfigError("modulation wavenumber, frequency and phase must be finite");
        if (!(std::abs(phi_dc) + phi_rf < limit()))
            throw ConfigError("|phi_dc| + phi_rf reaches the secant singularity guard");
    }

    double argument(double z, double t) const {
        return phi_dc + phi_rf * std::sin(kappa_s * z - omega_s * t + phase);
    }

    // Smallest sec() reached over a modulation cycle.
    double min_secant() const {
        double lo = std::abs(phi_dc) - phi_rf;
        return lo > 0.0 ? 1.0 / std::cos(lo) : 1.0;
    }

    // Cycle-averaged sec(), used for the mean phase velocity.
    double mean_secant(int samples = 4096) const {
        double acc = 0.0;
        for (int j = 0; j < samples; ++j)
            acc += 1.0 / std::cos(phi_dc + phi_rf * std::sin(two_pi * j / samples));
        return acc / samples;
    }
};

struct LineGeometry {
    int n_cells = 512;
    double dz = 1e-5;               // m
    double c_per_length = 0.0;      // F/m
    double i0 = 1e-6;               // A
    double phi0 = flux_quantum;     // Wb

    void validate() const {
        if (n_cells < 16) throw ConfigError("n_cells must be at least 16");
        if (!(dz > 0.0)) throw ConfigError("dz must be positive");
        if (!(c_per_length > 0.0)) throw ConfigError("c_per_length must be positive");
        if (!(i0 > 0.0)) throw ConfigError("i0 must be positive");
    }

    double length() const { return n_cells * dz; }
    double cell_inductance() const { return phi0 / (two_pi * i0); }
    double node_capacitance() const { return c_per_length * dz; }
    double cell_center(int k) const { return (k + 0.5) * dz; }
    int cell_at(double z) const {
        int k = static_cast<int>(std::floor(z / dz));
        return std::clamp(k, 0, n_cells - 1);
    }
};

// Geometry whose unmodulated line holds `wavelengths` periods of a tone at
// `tone_hz`.
inline LineGeometry geometry_for_tone(double tone_hz, int n_cells = 512, double dz = 1e-5,
                                      double i0 = 1e-6, double wavelengths = 8.0) {
    LineGeometry g;
    g.n_cells = n_cells;
    g.dz = dz;
    g.i0 = i0;
    double cell_delay = wavelengths / (n_cells * tone_hz);
    g.c_per_length = sq(cell_delay) / g.cell_inductance() / dz;
    return g;
}

// Same physical line on a grid refined by `factor`: inductance and
// capacitance per unit length are preserved.
inline LineGeometry refined(const LineGeometry& g, int factor) {
    LineGeometry r = g;
    r.n_cells = g.n_cells * factor;
    r.dz = g.dz / factor;
    r.i0 = g.i0 * factor;
    return r;
}

// Traveling modulation with `periods` spatial periods along the line.
inline FluxDrive traveling_drive(const LineGeometry& g, double phi_dc, double phi_rf, double omega_s,
                                 double periods = 3.0) {
    FluxDrive d;
    d.phi_dc = phi_dc;
    d.phi_rf = phi_rf;
    d.kappa_s = periods == 0.0 ? 0.0 : two_pi / (g.length() / periods);
    d.omega_s = omega_s;
    return d;
}

inline double inductance_at(const FluxDrive& drive, const LineGeometry& geom, double z, double t) {
    require(z >= 0.0 && z <= geom.length(), "position outside the line");
    double a = drive.argument(z, t);
    if (std::abs(a) >= drive.limit())
        throw DomainError("secant argument entered the excluded margin");
    return geom.cell_inductance() / std::cos(a);
}

enum class SourceKind { continuous_wave, gaussian_pulse };
enum class Port { left, right };

struct SourceSpec {
    SourceKind kind = SourceKind::continuous_wave;
    double omega = two_pi * 20e9;
    double amplitude = 1e-3;  // V
    double t_center = 0.0;
    double t_width = 0.0;
    Port port = Port::left;
    double ramp_periods = 2.0;  // raised-cosine turn-on of the CW tone

    void validate() const {
        if (!(amplitude > 0.0)) throw ConfigError("source amplitude must be positive");
        if (!(omega > 0.0)) throw ConfigError("source frequency must be positive");
        if (kind == SourceKind::gaussian_pulse && !(t_width > 0.0))
            throw ConfigError("pulse width must be positive");
        if (!(ramp_periods >= 0.0)) throw ConfigError("ramp_periods must be non-negative");
    }

    double value(double t) const {
        if (kind == SourceKind::continuous_wave) {
            double ramp = 1.0;
            if (ramp_periods > 0.0) {
                double r = std::min(1.0, t * omega / (two_pi * ramp_periods));
                ramp = 0.5 - 0.5 * std::cos(pi * r);
            }
            return amplitude * ramp * std::sin(omega * t);
        }
        double u = (t - t_center) / t_width;
        return amplitude * std::exp(-0.5 * u * u) * std::sin(omega * (t - t_center));
    }
};

struct LineState {
    double t = 0.0;
    std::vector<double> v;        // node voltages, n_cells + 1
    std::vector<double> flux;     // branch flux linkage, n_cells
    std::vector<double> current;  // flux / L at the latest half step
    long step_index = 0;
};

// Staggered leapfrog integrator of the telegrapher equations with a
// space-time varying cell inductance.
class Simulator {
public:
    struct Options {
        std::optional<double> dt;
        double cfl_safety = 0.9;
        double ceiling_factor = 1e6;
    };

    Simulator(LineGeometry geom, FluxDrive drive, std::optional<SourceSpec> source, Options opt)
        : geom_(geom), drive_(drive), source_(source), opt_(opt) {
        geom_.validate();
        drive_.validate();
        if (source_) source_->validate();
        if (!(opt_.cfl_safety > 0.0 && opt_.cfl_safety <= 1.0))
            throw ConfigError("cfl_safety must lie in (0, 1]");
        c_node_ = geom_.node_capacitance();
        l_cell_ = geom_.cell_inductance();
        bound_ = std::sqrt(l_cell_ * drive_.min_secant() * c_node_);
        if (opt_.dt) {
            if (!(*opt_.dt > 0.0)) throw ConfigError("dt must be positive");
            if (*opt_.dt > bound_) throw ConfigError("dt violates the CFL bound");
            dt_ = *opt_.dt;
        } else {
            dt_ = opt_.cfl_safety * bound_;
        }
        z_term_ = std::sqrt(l_cell_ / std::cos(drive_.phi_dc) / c_node_);
        ceiling_ = opt_.ceiling_factor * (source_ ? source_->amplitude : 1.0);
        v_.assign(geom_.n_cells + 1, 0.0);
        v_next_ = v_;
        flux_.assign(geom_.n_cells, 0.0);
        cur_.assign(geom_.n_cells, 0.0);
        zc_.resize(geom_.n_cells);
        for (int k = 0; k < geom_.n_cells; ++k) zc_[k] = geom_.cell_center(k);
    }

    Simulator(LineGeometry geom, FluxDrive drive, std::optional<SourceSpec> source)
        : Simulator(geom, drive, source, Options{}) {}

    double dt() const { return dt_; }
    double time() const { return static_cast<double>(step_) * dt_; }
    long steps() const { return step_; }
    double cfl_bound() const { return bound_; }
    double termination_impedance() const { return z_term_; }
    const LineGeometry& geometry() const { return geom_; }
    const FluxDrive& drive() const { return drive_; }
    const std::optional<SourceSpec>& source() const { return source_; }

    // Record the current of the cell containing z at every subsequent step.
    int watch(double z) {
        require(z > 0.0 && z < geom_.length(), "probe outside the line");
        int k = geom_.cell_at(z);
        traces_.try_emplace(k);
        return k;
    }
    bool watching(int cell) const { return traces_.count(cell) != 0; }
    const std::vector<double>& trace_times() const { return trace_t_; }
    const std::vector<double>& trace(int cell) const {
        auto it = traces_.find(cell);
        require(it != traces_.end(), "cell is not being recorded");
        return it->second;
    }

    void step() {
        const int n = geom_.n_cells;
        const double th = time() + 0.5 * dt_;
        const double lim = drive_.limit();
        for (int k = 0; k < n; ++k) flux_[k] += dt_ * (v_[k] - v_[k + 1]);
        for (int k = 0; k < n; ++k) {
            double a = drive_.argument(zc_[k], th);
            if (std::abs(a) >= lim) throw DomainError("secant argument entered the excluded margin");
            cur_[k] = flux_[k] * std::cos(a) / l_cell_;
        }
        const double kc = dt_ / c_node_;
        for (int k = 1; k < n; ++k) v_next_[k] = v_[k] + kc * (cur_[k - 1] - cur_[k]);
        const double a = c_node_ / (2.0 * dt_);
        const double b = 1.0 / (2.0 * z_term_);
        double s = source_ ? source_->value(th) : 0.0;
        double s_left = (source_ && source_->port == Port::left) ? s : 0.0;
        double s_right = (source_ && source_->port == Port::right) ? s : 0.0;
        v_next_[0] = ((a - b) * v_[0] + s_left / z_term_ - cur_[0]) / (a + b);
        v_next_[n] = ((a - b) * v_[n] + s_right / z_term_ + cur_[n - 1]) / (a + b);
        std::swap(v_, v_next_);
        ++step_;

        if (!traces_.empty()) {
            trace_t_.push_back(th);
            for (auto& [cell, series] : traces_) series.push_back(cur_[cell]);
        }
        for (double x : v_)
            if (!std::isfinite(x) || std::abs(x) > ceiling_)
                throw NumericalError("field blow-up at t = " + std::to_string(time()) + " s");
    }

    LineState state() const { return LineState{time(), v_, flux_, cur_, step_}; }

    std::vector<LineState> run_until(double t_end, const std::vector<double>& snapshot_times) {
        require(t_end > time(), "t_end must lie after the current time");
        for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
            require(snapshot_times[i] > time() && snapshot_times[i] <= t_end,
                    "snapshot times must lie in (t_now, t_end]");
            require(i == 0 || snapshot_times[i] >= snapshot_times[i - 1], "snapshot times must be sorted");
        }
        std::vector<LineState> out;
        std::size_t next = 0;
        const long target = static_cast<long>(std::ceil(t_end / dt_ - 1e-9));
        while (step_ < target) {
            step();
            while (next < snapshot_times.size() && time() >= snapshot_times[next] - 0.5 * dt_) {
                out.push_back(state());
                ++next;
            }
        }
        return out;
    }

    // Sum of capacitive and inductive energy (end nodes carry half a cell).
    double stored_energy() const {
        const int n = geom_.n_cells;
        double e = 0.0;
        for (int k = 1; k < n; ++k) e += 0.5 * c_node_ * v_[k] * v_[k];
        e += 0.25 * c_node_ * (v_[0] * v_[0] + v_[n] * v_[n]);
        for (int k = 0; k < n; ++k) e += 0.5 * flux_[k] * cur_[k];
        return e;
    }

private:
    LineGeometry geom_;
    FluxDrive drive_;
    std::optional<SourceSpec> source_;
    Options opt_;
    double c_node_ = 0, l_cell_ = 0, bound_ = 0, dt_ = 0, z_term_ = 0, ceiling_ = 0;
    long step_ = 0;
    std::vector<double> v_, v_next_, flux_, cur_, zc_;
    std::vector<double> trace_t_;
    std::map<int, std::vector<double>> traces_;
};

inline Simulator build_line(const LineGeometry& geom, const FluxDrive& drive, const SourceSpec& source,
                            std::optional<double> dt = std::nullopt, double cfl_safety = 0.9) {
    Simulator::Options o;
    o.dt = dt;
    o.cfl_safety = cfl_safety;
    return Simulator(geom, drive, source, o);
}

// Hann-tapered power of a recorded series at the DFT bin nearest `freq_hz`.
inline double tone_power(const std::vector<double>& t, const std::vector<double>& x, double dt, double t0,
                         double t1, double freq_hz) {
    std::vector<double> seg;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t0 && t[i] <= t1) seg.push_back(x[i]);
    const std::size_t n = seg.size();
    require(n >= 16, "analysis window holds too few samples");
    const double span = static_cast<double>(n) * dt;
    const double bin = std::round(freq_hz * span);
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double w = 0.5 - 0.5 * std::cos(two_pi * j / n);
        double ph = -two_pi * bin * static_cast<double>(j) / static_cast<double>(n);
        acc += w * seg[j] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return std::norm(acc) / (static_cast<double>(n) * n);
}

struct SpectrumReport {
    std::vector<int> harmonic_index;
    std::vector<double> freq_hz;
    std::vector<double> power_dbc;
    std::vector<double> absolute_power;
    double probe_position = 0.0;

    // Total n >= 2 power relative to the fundamental.
    double harmonic_content_db() const {
        double s = 0.0;
        for (std::size_t i = 1; i < absolute_power.size(); ++i) s += absolute_power[i];
        return db(s / absolute_power.front());
    }
    int count_above(double dbc) const {
        int c = 0;
        for (std::size_t i = 1; i < power_dbc.size(); ++i) c += power_dbc[i] > dbc;
        return c;
    }
};

inline SpectrumReport harmonic_spectrum(const Simulator& sim, double probe, double t0, double t1,
                                        int n_max = 6, std::optional<double> omega = std::nullopt) {
    const double w = omega ? *omega : (sim.source() ? sim.source()->omega : 0.0);
    require(w > 0.0, "no reference tone for the spectrum");
    require(probe > 0.0 && probe < sim.geometry().length(), "probe outside the line");
    require(n_max >= 1, "n_max must be at least 1");
    const double f = w / two_pi;
    if ((t1 - t0) * f < 8.0 - 1e-9) throw PreconditionError("analysis window shorter than 8 periods");
    const int cell = sim.geometry().cell_at(probe);
    const auto& ts = sim.trace_times();
    require(!ts.empty() && ts.front() <= t0 + sim.dt() && ts.back() >= t1 - sim.dt(),
            "analysis window outside the recorded span");
    const auto& x = sim.trace(cell);

    SpectrumReport r;
    r.probe_position = probe;
    for (int n = 1; n <= n_max; ++n) {
        r.harmonic_index.push_back(n);
        r.freq_hz.push_back(n * f);
        r.absolute_power.push_back(tone_power(ts, x, sim.dt(), t0, t1, n * f));
    }
    if (!(r.absolute_power[0] > 0.0)) throw NumericalError("fundamental power is zero");
    for (double p : r.absolute_power) r.power_dbc.push_back(p > 0.0 ? db(p / r.absolute_power[0]) : -300.0);
    return r;
}

struct IsolationEntry {
    int n = 1;
    double freq_hz = 0.0;
    double forward_power = 0.0;
    double backward_power = 0.0;
    double isolation_db = 0.0;
};

// Forward run drives the left port and listens at the last cell; the mirrored
// run drives the right port and listens at the first cell.
inline std::vector<IsolationEntry> isolation_report(const LineGeometry& geom, const FluxDrive& drive,
                                                    const SourceSpec& source, const std::vector<int>& harmonics,
                                                    double t0, double t1,
                                                    Simulator::Options opt = Simulator::Options{}) {
    if (!(source.amplitude > 0.0)) throw PreconditionError("zero source amplitude leaves the power undefined");
    geom.validate();
    drive.validate();
    const double f = source.omega / two_pi;

    auto run = [&](Port port) {
        SourceSpec s = source;
        s.port = port;
        Simulator sim(geom, drive, s, opt);
        int cell = sim.watch(port == Port::left ? geom.cell_center(geom.n_cells - 1) : geom.cell_center(0));
        sim.run_until(t1 + sim.dt(), {});
        std::vector<double> p;
        for (int n : harmonics) p.push_back(tone_power(sim.trace_times(), sim.trace(cell), sim.dt(), t0, t1, n * f));
        return p;
    };
    auto fwd = std::async(std::launch::async, run, Port::left);
    auto bwd = std::async(std::launch::async, run, Port::right);
    auto pf = fwd.get();
    auto pb = bwd.get();

    std::vector<IsolationEntry> out;
    for (std::size_t i = 0; i < harmonics.size(); ++i) {
        if (!(pf[i] > 0.0 && pb[i] > 0.0)) throw NumericalError("band power vanished; isolation undefined");
        out.push_back({harmonics[i], harmonics[i] * f, pf[i], pb[i], db(pf[i] / pb[i])});
    }
    return out;
}

struct WavepacketMetrics {
    double t = 0.0;
    double centroid = 0.0;           // m
    double rms_width = 0.0;          // m
    double spectral_centroid = 0.0;  // rad/m
    std::optional<double> peak_velocity;  // m/s, absent for the first state
};

inline std::vector<WavepacketMetrics> wavepacket_metrics(const std::vector<LineState>& states,
                                                         const LineGeometry& geom, double energy_floor = 1e-300) {
    std::vector<WavepacketMetrics> out;
    Eigen::FFT<double> fft;
    for (const auto& s : states) {
        require(static_cast<int>(s.current.size()) == geom.n_cells, "state does not match the geometry");
        double su = 0.0, szu = 0.0;
        for (int k = 0; k < geom.n_cells; ++k) {
            double u = sq(s.current[k]);
            su += u;
            szu += geom.cell_center(k) * u;
        }
        if (!(su > energy_floor)) throw NumericalError("wavepacket energy below the degenerate threshold");
        WavepacketMetrics m;
        m.t = s.t;
        m.centroid = szu / su;
        double var = 0.0;
        for (int k = 0; k < geom.n_cells; ++k) var += sq(geom.cell_center(k) - m.centroid) * sq(s.current[k]);
        m.rms_width = std::sqrt(var / su);

        std::vector<std::complex<double>> spec;
        fft.fwd(spec, s.current);
        double num = 0.0, den = 0.0;
        for (int b = 1; b <= geom.n_cells / 2; ++b) {
            double mag = std::abs(spec[b]);
            num += two_pi * b / (geom.n_cells * geom.dz) * mag;
            den += mag;
        }
        m.spectral_centroid = den > 0.0 ? num / den : 0.0;
        if (!out.empty()) m.peak_velocity = (m.centroid - out.back().centroid) / (m.t - out.back().t);
        out.push_back(m);
    }
    return out;
}

// Fraction (dB) of the spatial power of the occupied part of the line that
// sits above `cutoff` times the cycle-averaged fundamental wavenumber.
inline double spatial_harmonic_fraction_db(const LineState& s, const LineGeometry& geom, const FluxDrive& drive,
                                           double omega, double cutoff = 1.5, double occupancy = 0.01,
                                           int nfft = 8192) {
    const auto& cur = s.current;
    double peak = 0.0;
    for (double x : cur) peak = std::max(peak, std::abs(x));
    if (!(peak > 0.0)) throw NumericalError("empty line");
    int front = 0;
    for (int k = 0; k < static_cast<int>(cur.size()); ++k)
        if (std::abs(cur[k]) > occupancy * peak) front = k;
    const int n = front + 1;
    if (n < 4) throw NumericalError("occupied region too short for a spatial spectrum");
    require(nfft >= n, "FFT length shorter than the occupied region");

    std::vector<double> x(nfft, 0.0);
    for (int k = 0; k < n; ++k) x[k] = cur[k] * (0.5 - 0.5 * std::cos(two_pi * k / (n - 1)));
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, x);

    const double l_per_len = geom.cell_inductance() / geom.dz;
    const double k_avg = omega * std::sqrt(drive.mean_secant() * l_per_len * geom.c_per_length);
    double total = 0.0, high = 0.0;
    for (int b = 0; b <= nfft / 2; ++b) {
        double p = std::norm(spec[b]);
        total += p;
        if (two_pi * b / (nfft * geom.dz) > cutoff * k_avg) high += p;
    }
    if (!(total > 0.0)) throw NumericalError("empty spatial spectrum");
    return high > 0.0 ? db(high / total) : -300.0;
}

// First snapshot at or after t_min whose spatial harmonic fraction reaches
// threshold_db.
inline std::optional<double> harmonic_onset(const std::vector<LineState>& states, const LineGeometry& geom,
                                            const FluxDrive& drive, double omega, double threshold_db,
                                            double t_min) {
    for (const auto& s : states) {
        if (s.t < t_min) continue;
        if (spatial_harmonic_fraction_db(s, geom, drive, omega) >= threshold_db) return s.t;
    }
    return std::nullopt;
}

}  // namespace stmbus
