#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "common.hpp"

namespace stmbus {

// Angular frequencies in rad/s, times in s, positions in m.
struct QubitArraySpec {
    int n_qubits = 25;
    double omega_m = two_pi * 3e9;
    std::vector<int> harmonic_indices;  // empty: 1..N
    std::vector<double> positions;      // empty: i * pitch
    double pitch = 1e-3;
    double t1_intrinsic = 150e-6;
    double t2_intrinsic = 30e-6;
    double g_coupling = two_pi * 50e6;
    double kappa_bus = two_pi * 100e6;
    double t_gate = 20e-9;
    double lambda_c = 2e-3;

    // Copy with the default comb and positions filled in.
    QubitArraySpec resolved() const {
        QubitArraySpec a = *this;
        if (a.harmonic_indices.empty())
            for (int i = 1; i <= n_qubits; ++i) a.harmonic_indices.push_back(i);
        if (a.positions.empty())
            for (int i = 1; i <= n_qubits; ++i) a.positions.push_back(i * pitch);
        return a;
    }

    void validate() const {
        if (n_qubits < 1) throw ConfigError("array needs at least one qubit");
        if (!(omega_m > 0.0)) throw ConfigError("omega_m must be positive");
        auto a = resolved();
        if (static_cast<int>(a.harmonic_indices.size()) != n_qubits ||
            static_cast<int>(a.positions.size()) != n_qubits)
            throw ConfigError("harmonic_indices and positions must have one entry per qubit");
        for (int i = 1; i < n_qubits; ++i)
            if (a.harmonic_indices[i] <= a.harmonic_indices[i - 1])
                throw ConfigError("harmonic indices must increase strictly");
        if (!(t1_intrinsic > 0.0 && t2_intrinsic > 0.0)) throw ConfigError("intrinsic T1 and T2 must be positive");
        if (t2_intrinsic > 2.0 * t1_intrinsic) throw ConfigError("T2,int exceeds 2*T1,int");
        if (!(t_gate > 0.0)) throw ConfigError("t_gate must be positive");
        if (!(g_coupling >= 0.0 && kappa_bus > 0.0 && lambda_c > 0.0))
            throw ConfigError("coupling, bus linewidth and decay length must be positive");
    }

    double omega(int i) const { return resolved().harmonic_indices.at(i) * omega_m; }
    double pure_dephasing_rate() const { return 1.0 / t2_intrinsic - 1.0 / (2.0 * t1_intrinsic); }
};

inline int qubit_at_harmonic(const QubitArraySpec& a, int harmonic) {
    auto r = a.resolved();
    auto it = std::find(r.harmonic_indices.begin(), r.harmonic_indices.end(), harmonic);
    require(it != r.harmonic_indices.end(), "no qubit sits at the requested harmonic");
    return static_cast<int>(it - r.harmonic_indices.begin());
}

struct GainProfile {
    double peak = 2.0;
    double center = 0.0;  // rad/s
    double width = 0.0;   // rad/s
    double floor = 0.5;
};

enum class BusKind { reciprocal, nonreciprocal };

inline std::string to_string(BusKind k) { return k == BusKind::reciprocal ? "reciprocal" : "nonreciprocal"; }

struct BusIsolationModel {
    BusKind kind = BusKind::nonreciprocal;
    double c_purcell = 0.01;
    double c_phi = 0.01;
    double c0 = 0.01;
    double delta_bw = 0.0;   // rad/s
    double omega_res = 0.0;  // rad/s
    GainProfile gain;
    double z_base_slope = 1.0;

    void validate() const {
        if (!(c_purcell > 0.0 && c_purcell <= 1.0)) throw ConfigError("c_purcell must lie in (0, 1]");
        if (!(c_phi > 0.0 && c_phi <= 1.0)) throw ConfigError("c_phi must lie in (0, 1]");
        if (!(c0 > 0.0 && c0 < 1.0)) throw ConfigError("c0 must lie in (0, 1)");
        if (!(delta_bw > 0.0 && omega_res > 0.0)) throw ConfigError("delta_bw and omega_res must be positive");
        if (!(gain.floor > 0.0 && gain.peak > 0.0 && gain.width > 0.0))
            throw ConfigError("gain profile must be positive everywhere");
    }
};

inline BusIsolationModel reciprocal_bus(double omega_m) {
    BusIsolationModel m;
    m.kind = BusKind::reciprocal;
    m.c_purcell = 1.0;
    m.c_phi = 1.0;
    m.c0 = 0.3;
    m.delta_bw = 1.5 * omega_m;
    m.omega_res = 66.0 * omega_m;
    m.gain = {0.4, m.omega_res, 12.0 * omega_m, 1.2e-4};
    return m;
}

inline BusIsolationModel nonreciprocal_bus(double omega_m) {
    BusIsolationModel m;
    m.kind = BusKind::nonreciprocal;
    m.c_purcell = 0.01;
    m.c_phi = 0.01;
    m.c0 = 0.01;
    m.delta_bw = 1.5 * omega_m;
    m.omega_res = 66.0 * omega_m;
    m.gain = {2.0, m.omega_res, 8.0 * omega_m, 0.5};
    return m;
}

inline double gain(const BusIsolationModel& m, double omega) {
    require(omega > 0.0, "gain needs a positive frequency");
    const auto& g = m.gain;
    return g.floor + (g.peak - g.floor) * std::exp(-sq(omega - g.center) / (2.0 * sq(g.width)));
}

inline double purcell_rate(const QubitArraySpec& a, const BusIsolationModel& m, int i) {
    require(i >= 0 && i < a.n_qubits, "qubit index out of range");
    const double w = a.omega(i);
    const double g_eff2 = sq(a.g_coupling) / gain(m, w);
    const double k = a.kappa_bus;
    return g_eff2 / k * (k * k / 4.0) / (sq(w - m.omega_res) + k * k / 4.0) * m.c_purcell;
}

inline double resistance_quantum() { return hbar / sq(2.0 * electron_charge); }

// Golden-rule rate through an environment impedance.
inline double purcell_rate_impedance(double omega_q, double re_z_env, double c_ratio) {
    require(re_z_env >= 0.0, "Re[Z_env] must be non-negative");
    require(c_ratio > 0.0 && c_ratio < 1.0, "C_c/C_sigma must lie in (0, 1)");
    return 0.5 * omega_q * (re_z_env / resistance_quantum()) * sq(c_ratio);
}

// Dispersive environment impedance: base impedance rising with omega/omega_m,
// scaled by the inverse gain and the Purcell suppression.
inline double environment_impedance(const BusIsolationModel& m, double omega, double omega_m,
                                    double z_base_ohms = 50.0) {
    return z_base_ohms * m.z_base_slope * (omega / omega_m) / gain(m, omega) * m.c_purcell;
}

inline double t1_effective(const QubitArraySpec& a, const BusIsolationModel& m, int i) {
    return 1.0 / (1.0 / a.t1_intrinsic + purcell_rate(a, m, i));
}

inline double t2_effective(const QubitArraySpec& a, const BusIsolationModel& m, int i) {
    require(a.t2_intrinsic <= 2.0 * a.t1_intrinsic, "T2,int exceeds 2*T1,int");
    return 1.0 / (1.0 / (2.0 * t1_effective(a, m, i)) + a.pure_dephasing_rate() * m.c_phi);
}

inline double bus_leakage(const BusIsolationModel& m, double delta) {
    return m.c0 + (1.0 - m.c0) * std::exp(-sq(delta / m.delta_bw));
}

inline double crosstalk_error(const QubitArraySpec& a, const BusIsolationModel& m, int i) {
    require(i >= 0 && i < a.n_qubits, "qubit index out of range");
    if (a.n_qubits < 2) return 0.0;
    auto r = a.resolved();
    const double wi = r.harmonic_indices[i] * a.omega_m;
    double sum = 0.0;
    for (int j = 0; j < a.n_qubits; ++j) {
        if (j == i) continue;
        const double delta = std::abs(wi - r.harmonic_indices[j] * a.omega_m);
        if (delta == 0.0) throw DomainError("degenerate detuning between qubits");
        const double gij = a.g_coupling * std::exp(-std::abs(r.positions[i] - r.positions[j]) / a.lambda_c);
        sum += sq(gij / delta) * sq(std::sin(delta * a.t_gate / 2.0)) * bus_leakage(m, delta);
    }
    return sum / gain(m, wi);
}

struct ErrorBudgetRow {
    int qubit = 0;  // 1-based
    double omega_over_omega_m = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
    double e_relax = 0.0;
    double e_dephase = 0.0;
    double e_crosstalk = 0.0;
    double e_total = 0.0;
    double purcell_rate = 0.0;
};

inline ErrorBudgetRow gate_error(const QubitArraySpec& a, const BusIsolationModel& m, int i) {
    ErrorBudgetRow r;
    r.qubit = i + 1;
    r.omega_over_omega_m = a.omega(i) / a.omega_m;
    r.purcell_rate = purcell_rate(a, m, i);
    r.t1 = t1_effective(a, m, i);
    r.t2 = t2_effective(a, m, i);
    r.e_relax = a.t_gate / r.t1;
    r.e_dephase = 1.0 - std::exp(-a.t_gate / r.t2);
    r.e_crosstalk = crosstalk_error(a, m, i);
    r.e_total = r.e_relax + r.e_dephase + r.e_crosstalk;
    return r;
}

inline std::vector<ErrorBudgetRow> error_budget(const QubitArraySpec& a, const BusIsolationModel& m) {
    a.validate();
    m.validate();
    std::vector<ErrorBudgetRow> rows;
    for (int i = 0; i < a.n_qubits; ++i) rows.push_back(gate_error(a, m, i));
    return rows;
}

// Array of the template's constants with N qubits on the comb 1..N.
inline QubitArraySpec comb_array(const QubitArraySpec& tmpl, int n) {
    QubitArraySpec a = tmpl;
    a.n_qubits = n;
    a.harmonic_indices.clear();
    a.positions.clear();
    return a.resolved();
}

struct ScalabilityPoint {
    int n = 0;
    double worst_case_error = 0.0;
};

inline std::vector<ScalabilityPoint> scalability_sweep(const QubitArraySpec& tmpl, const BusIsolationModel& m,
                                                       const std::vector<int>& n_range) {
    require(!n_range.empty(), "n_range must not be empty");
    std::vector<ScalabilityPoint> out;
    for (int n : n_range) {
        auto rows = error_budget(comb_array(tmpl, n), m);
        double worst = 0.0;
        for (const auto& r : rows) worst = std::max(worst, r.e_total);
        out.push_back({n, worst});
    }
    return out;
}

struct BudgetDecomposition {
    int qubit = 0;
    double e_relax = 0.0;
    double e_purcell = 0.0;  // share of e_relax caused by the bus
    double e_dephase = 0.0;
    double e_crosstalk = 0.0;
    double e_total = 0.0;
    double fraction_relax() const { return e_relax / e_total; }
    double fraction_dephase() const { return e_dephase / e_total; }
    double fraction_crosstalk() const { return e_crosstalk / e_total; }
};

inline BudgetDecomposition budget_decomposition(const QubitArraySpec& a, const BusIsolationModel& m, int i) {
    auto r = gate_error(a, m, i);
    return {r.qubit, r.e_relax, a.t_gate * r.purcell_rate, r.e_dephase, r.e_crosstalk, r.e_total};
}

}  // namespace stmbus
