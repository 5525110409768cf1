#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "common.hpp"
#include "tridiag.hpp"

namespace stmbus {

// Energies are frequencies in Hz (E/h).
struct TransmonSpec {
    double ec = 0.25e9;
    double ej_max = 6.25e9;
    double ng = 0.0;
    int n_charge_cut = 15;
    int max_charge_cut = 400;
    int n_levels = 5;

    void validate() const {
        if (!(ec > 0.0)) throw ConfigError("E_C must be positive");
        if (!(ej_max > 0.0)) throw ConfigError("E_J,max must be positive");
        if (n_charge_cut < 10) throw ConfigError("n_charge_cut must be at least 10");
        if (max_charge_cut < n_charge_cut) throw ConfigError("max_charge_cut below n_charge_cut");
        if (n_levels < 3) throw ConfigError("at least three levels are reported");
    }
    bool transmon_regime() const { return ej_max / ec >= 10.0; }
};

struct QubitSpectrum {
    std::vector<double> levels;  // ground-referenced, ascending
    double omega_q = 0.0;
    double anharmonicity = 0.0;
    int charge_cut = 0;
};

inline double ej_of_flux(double ej_max, double phi_over_phi0) {
    return 2.0 * ej_max * std::abs(std::cos(pi * phi_over_phi0));
}

// Raw spectrum of the charge-basis Hamiltonian for states |n|<=cut.
inline std::vector<double> charge_basis_levels(double ec, double ej, double ng, int cut) {
    const int dim = 2 * cut + 1;
    std::vector<double> d(dim), off(dim - 1, -0.5 * ej);
    for (int i = 0; i < dim; ++i) d[i] = 4.0 * ec * sq(static_cast<double>(i - cut) - ng);
    return tridiagonal_eigenvalues(d, off);
}

inline QubitSpectrum diagonalize(const TransmonSpec& spec, double ej) {
    spec.validate();
    require(ej >= 0.0, "E_J must be non-negative");
    const int k = spec.n_levels;
    auto reduce = [&](const std::vector<double>& raw) {
        std::vector<double> lv(raw.begin(), raw.begin() + k);
        for (double& x : lv) x -= raw[0];
        return lv;
    };
    for (int cut = spec.n_charge_cut; cut + 5 <= spec.max_charge_cut; cut += 5) {
        auto a = reduce(charge_basis_levels(spec.ec, ej, spec.ng, cut));
        auto b = reduce(charge_basis_levels(spec.ec, ej, spec.ng, cut + 5));
        bool ok = true;
        for (int j = k - 2; j < k; ++j) {
            double scale = std::max(std::abs(b[j]), std::numeric_limits<double>::min());
            if (std::abs(a[j] - b[j]) / scale >= 1e-9) ok = false;
        }
        if (ok) return QubitSpectrum{b, b[1], b[2] - 2.0 * b[1], cut + 5};
    }
    throw NumericalError("charge-basis truncation did not converge");
}

struct ReadoutSpec {
    double omega_r = 7e9;  // Hz
    double g_r = 0.1e9;    // Hz
};

struct ChiResult {
    double chi = 0.0;
    double delta = 0.0;
    double alpha = 0.0;
    double dispersive_ratio = 0.0;  // g_r / |delta|
    bool dispersive = true;         // ratio below 0.1
};

inline ChiResult chi_dispersive(const TransmonSpec& spec, double ej, const ReadoutSpec& ro) {
    auto s = diagonalize(spec, ej);
    ChiResult r;
    r.delta = s.omega_q - ro.omega_r;
    r.alpha = s.anharmonicity;
    if (r.delta == 0.0) throw DomainError("qubit and resonator are degenerate");
    r.chi = sq(ro.g_r) / r.delta * (1.0 + r.alpha / r.delta);
    r.dispersive_ratio = std::abs(ro.g_r / r.delta);
    r.dispersive = r.dispersive_ratio < 0.1;
    return r;
}

// Tabulated qubit frequency of one transmon over a flux period, so that
// dense maps do not rediagonalize at every point.
class FluxCurve {
public:
    FluxCurve(const TransmonSpec& spec, int samples = 4001) : step_(0.5 / (samples - 1)) {
        freq_.reserve(samples);
        for (int i = 0; i < samples; ++i)
            freq_.push_back(diagonalize(spec, ej_of_flux(spec.ej_max, i * step_)).omega_q);
    }
    double operator()(double phi_over_phi0) const {
        double x = phi_over_phi0 - std::floor(phi_over_phi0);
        if (x > 0.5) x = 1.0 - x;
        double u = x / step_;
        auto i = static_cast<std::size_t>(u);
        if (i + 1 >= freq_.size()) return freq_.back();
        double w = u - static_cast<double>(i);
        return (1.0 - w) * freq_[i] + w * freq_[i + 1];
    }

private:
    double step_;
    std::vector<double> freq_;
};

// Frequency plan behind the addressing maps. Qubit i is a copy of the unit
// transmon scaled by its harmonic index n_i, with a local dc bias gain solved
// so that it meets n_i * comb at its design bias under the design rf drive.
struct AddressingDesign {
    double comb_hz = 3e9;
    std::vector<int> harmonic_indices;
    double ec_per_harmonic = 0.15e9;
    double ej_max_per_harmonic = 5.0e9;
    double bias_min = 0.4;   // design dc bias of the first qubit (rad)
    double bias_max = 1.4;   // design dc bias of the last qubit (rad)
    double rf_design = 0.85;
    double rf_coupling = 1.0;
    double sigma_res_hz = 50e6;
    int rf_phase_samples = 32;
    int n_charge_cut = 15;

    void validate() const {
        if (harmonic_indices.empty()) throw ConfigError("addressing needs at least one qubit");
        for (std::size_t i = 0; i < harmonic_indices.size(); ++i) {
            if (harmonic_indices[i] < 1) throw ConfigError("harmonic indices must be positive");
            if (i && harmonic_indices[i] <= harmonic_indices[i - 1])
                throw ConfigError("harmonic indices must increase strictly");
        }
        if (!(comb_hz > 0.0 && ec_per_harmonic > 0.0 && ej_max_per_harmonic > 0.0 && sigma_res_hz > 0.0))
            throw ConfigError("addressing frequencies must be positive");
        if (!(bias_min > 0.0 && bias_max >= bias_min)) throw ConfigError("design bias range is invalid");
        if (rf_phase_samples < 1) throw ConfigError("rf_phase_samples must be positive");
    }
};

struct AddressingRow {
    double phi_dc = 0.0;
    double phi_rf = 0.0;
    int qubit_index = 0;  // 1-based
    double score = 0.0;
    double freq_hz = 0.0;
};

class AddressingModel {
public:
    explicit AddressingModel(AddressingDesign d)
        : d_(std::move(d)), unit_(unit_spec(d_)) {
        d_.validate();
        const std::size_t n = d_.harmonic_indices.size();
        for (std::size_t i = 0; i < n; ++i) {
            double bias = n == 1 ? d_.bias_min
                                 : d_.bias_min + (d_.bias_max - d_.bias_min) * static_cast<double>(i) / (n - 1);
            bias_.push_back(bias);
            gain_.push_back(solve_gain(bias));
        }
    }

    const AddressingDesign& design() const { return d_; }
    std::size_t size() const { return gain_.size(); }
    double design_bias(std::size_t i) const { return bias_[i]; }
    double dc_gain(std::size_t i) const { return gain_[i]; }

    // rf-cycle-averaged transition frequency of qubit i (0-based), Hz.
    double frequency(std::size_t i, double phi_dc, double phi_rf) const {
        return d_.harmonic_indices[i] * unit_frequency(gain_[i], phi_dc, phi_rf);
    }
    double score(std::size_t i, double phi_dc, double phi_rf) const {
        double off = frequency(i, phi_dc, phi_rf) - d_.harmonic_indices[i] * d_.comb_hz;
        return std::exp(-sq(off) / (2.0 * sq(d_.sigma_res_hz)));
    }

private:
    static TransmonSpec unit_spec(const AddressingDesign& d) {
        TransmonSpec s;
        s.ec = d.ec_per_harmonic;
        s.ej_max = d.ej_max_per_harmonic;
        s.n_charge_cut = d.n_charge_cut;
        return s;
    }

    double unit_frequency(double gain, double phi_dc, double phi_rf) const {
        const int m = d_.rf_phase_samples;
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
            double th = two_pi * (j + 0.5) / m;
            acc += unit_((gain * phi_dc + d_.rf_coupling * phi_rf * std::sin(th)) / two_pi);
        }
        return acc / m;
    }

    double solve_gain(double bias) const {
        double lo = 0.0, hi = two_pi * 0.5 / bias;
        auto f = [&](double g) { return unit_frequency(g, bias, d_.rf_design) - d_.comb_hz; };
        if (f(lo) < 0.0 || f(hi) > 0.0)
            throw ConfigError("unit transmon cannot reach the comb tooth at its design bias");
        for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
            double mid = 0.5 * (lo + hi);
            (f(mid) > 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    AddressingDesign d_;
    FluxCurve unit_;
    std::vector<double> bias_, gain_;
};

inline std::vector<AddressingRow> addressing_map(const AddressingModel& model, const std::vector<double>& phi_dc,
                                                 const std::vector<double>& phi_rf) {
    std::vector<AddressingRow> out;
    out.reserve(phi_dc.size() * phi_rf.size() * model.size());
    for (double dc : phi_dc)
        for (double rf : phi_rf)
            for (std::size_t i = 0; i < model.size(); ++i)
                out.push_back({dc, rf, static_cast<int>(i + 1), model.score(i, dc, rf), model.frequency(i, dc, rf)});
    return out;
}

}  // namespace stmbus
