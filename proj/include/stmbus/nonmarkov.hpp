#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <optional>
#include <vector>

#include "common.hpp"

namespace stmbus {

// Two-level density matrix with index 0 the excited state, so rho00 is the
// decaying population.
struct TwoLevelState {
    std::array<std::complex<double>, 4> rho{1.0, 0.0, 0.0, 0.0};

    std::complex<double> operator()(int r, int c) const { return rho[2 * r + c]; }
    double excited_population() const { return rho[0].real(); }

    static TwoLevelState excited() { return TwoLevelState{}; }

    // Bloch vector (x, y, z) with z = rho00 - rho11.
    static TwoLevelState from_bloch(double x, double y, double z) {
        TwoLevelState s;
        s.rho = {std::complex<double>(0.5 * (1 + z), 0.0), std::complex<double>(0.5 * x, -0.5 * y),
                 std::complex<double>(0.5 * x, 0.5 * y), std::complex<double>(0.5 * (1 - z), 0.0)};
        return s;
    }
    std::array<double, 3> bloch() const {
        return {2.0 * rho[1].real(), -2.0 * rho[1].imag(), (rho[0] - rho[3]).real()};
    }

    double hermiticity_error() const {
        return std::max({std::abs(rho[0].imag()), std::abs(rho[3].imag()), std::abs(rho[1] - std::conj(rho[2]))});
    }
    double trace() const { return (rho[0] + rho[3]).real(); }
    double min_eigenvalue() const {
        double tr = trace();
        double det = (rho[0] * rho[3] - rho[1] * rho[2]).real();
        return 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
    }
    bool valid(double herm_tol = 1e-12, double trace_tol = 1e-12, double eig_tol = 1e-10) const {
        return hermiticity_error() <= herm_tol && std::abs(trace() - 1.0) <= trace_tol &&
               min_eigenvalue() >= -eig_tol;
    }
};

enum class KernelKind { markovian, exponential_kernel };

struct KernelSpec {
    double amplitude_a = 0.0;     // 1/s^2
    double gamma_memory = 0.0;    // 1/s
    double markovian_gamma = 0.0; // 1/s
    KernelKind kind = KernelKind::exponential_kernel;

    void validate() const {
        if (!(amplitude_a >= 0.0 && gamma_memory >= 0.0 && markovian_gamma >= 0.0))
            throw ConfigError("kernel rates must be non-negative");
        if (kind == KernelKind::exponential_kernel && !(gamma_memory > 0.0))
            throw ConfigError("exponential kernel needs a positive memory decay rate");
    }
};

struct PopulationTrace {
    std::vector<double> t;
    std::vector<double> rho00;
    std::vector<TwoLevelState> states;
};

inline void check_grid(const std::vector<double>& t) {
    require(!t.empty(), "time grid is empty");
    for (std::size_t i = 1; i < t.size(); ++i) require(t[i] > t[i - 1], "time grid must increase strictly");
}

// Amplitude damping with collapse operator sigma^- and no Hamiltonian.
inline PopulationTrace evolve_markovian(const TwoLevelState& s0, double gamma, const std::vector<double>& t) {
    require(gamma >= 0.0, "gamma must be non-negative");
    check_grid(t);
    auto [x0, y0, z0] = s0.bloch();
    const double p0 = s0.excited_population();
    PopulationTrace out;
    for (double ti : t) {
        double c = std::exp(-0.5 * gamma * ti);
        double p = p0 * std::exp(-gamma * ti);
        out.t.push_back(ti);
        out.rho00.push_back(p);
        out.states.push_back(TwoLevelState::from_bloch(x0 * c, y0 * c, 2.0 * p - 1.0));
    }
    (void)z0;
    return out;
}

namespace detail {

using Vec6 = std::array<double, 6>;

// Dissipator of sigma^- acting on a Bloch vector.
inline std::array<double, 3> dissipator(double x, double y, double z) { return {-0.5 * x, -0.5 * y, -(1.0 + z)}; }

template <class F>
Vec6 rk4(const Vec6& u, double h, F&& f) {
    auto add = [](const Vec6& a, const Vec6& b, double s) {
        Vec6 r;
        for (int i = 0; i < 6; ++i) r[i] = a[i] + s * b[i];
        return r;
    };
    Vec6 k1 = f(u), k2 = f(add(u, k1, h / 2)), k3 = f(add(u, k2, h / 2)), k4 = f(add(u, k3, h));
    Vec6 r;
    for (int i = 0; i < 6; ++i) r[i] = u[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return r;
}

template <class F>
PopulationTrace integrate(const TwoLevelState& s0, const std::vector<double>& t, double h_max, F&& f) {
    check_grid(t);
    auto b = s0.bloch();
    Vec6 u{b[0], b[1], b[2], 0.0, 0.0, 0.0};
    PopulationTrace out;
    double now = 0.0;
    require(t.front() >= 0.0, "time grid must start at or after zero");
    for (double ti : t) {
        double span = ti - now;
        if (span > 0.0) {
            int n = static_cast<int>(std::ceil(span / h_max - 1e-12));
            double h = span / n;
            for (int k = 0; k < n; ++k) u = rk4(u, h, f);
            now = ti;
        }
        auto st = TwoLevelState::from_bloch(u[0], u[1], u[2]);
        if (std::abs(st.trace() - 1.0) > 1e-6) throw NumericalError("trace drifted; reduce the step size");
        out.t.push_back(ti);
        out.rho00.push_back(st.excited_population());
        out.states.push_back(st);
    }
    return out;
}

}  // namespace detail

// Lindblad equation integrated with RK4; used to cross-check the closed form.
inline PopulationTrace evolve_markovian_rk4(const TwoLevelState& s0, double gamma, const std::vector<double>& t,
                                            double h_max) {
    require(gamma >= 0.0 && h_max > 0.0, "invalid rate or step");
    return detail::integrate(s0, t, h_max, [gamma](const detail::Vec6& u) {
        auto d = detail::dissipator(u[0], u[1], u[2]);
        return detail::Vec6{gamma * d[0], gamma * d[1], gamma * d[2], 0.0, 0.0, 0.0};
    });
}

// Exponential memory kernel via the auxiliary field M:
//   d rho/dt = M,  dM/dt = -Gamma M + A D[rho].
// Both live on Bloch components so the generator stays Hermitian.
inline PopulationTrace evolve_kernel(const TwoLevelState& s0, const KernelSpec& k, const std::vector<double>& t,
                                     double h_max = 0.0) {
    k.validate();
    if (k.kind != KernelKind::exponential_kernel) throw PreconditionError("kernel kind must be exponential-kernel");
    const double a = k.amplitude_a, g = k.gamma_memory;
    double rate = std::max(g, std::sqrt(a));
    double h = h_max > 0.0 ? h_max : 0.01 / rate;
    return detail::integrate(s0, t, h, [a, g](const detail::Vec6& u) {
        auto d = detail::dissipator(u[0], u[1], u[2]);
        return detail::Vec6{u[3], u[4], u[5], -g * u[3] + a * d[0], -g * u[4] + a * d[1], -g * u[5] + a * d[2]};
    });
}

inline PopulationTrace evolve(const TwoLevelState& s0, const KernelSpec& k, const std::vector<double>& t) {
    k.validate();
    return k.kind == KernelKind::markovian ? evolve_markovian(s0, k.markovian_gamma, t) : evolve_kernel(s0, k, t);
}

// Instantaneous decay rate -d ln(p)/dt on a uniform grid. A window >= 3
// applies local quadratic smoothing to ln(p) before the 5-point stencil.
inline std::vector<double> gamma_eff(const std::vector<double>& t, const std::vector<double>& p,
                                     int smoothing_window = 7) {
    const std::size_t n = p.size();
    require(t.size() == n && n >= 5, "need at least five samples");
    const double h = t[1] - t[0];
    for (std::size_t i = 1; i < n; ++i)
        require(std::abs((t[i] - t[i - 1]) - h) <= 1e-9 * std::abs(h), "time grid must be uniform");
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(p[i] > 0.0)) throw DomainError("population must stay positive for gamma_eff");
        f[i] = std::log(p[i]);
    }
    if (smoothing_window >= 3) {
        const int m = smoothing_window / 2;
        // Savitzky-Golay quadratic smoothing weights.
        std::vector<double> w(2 * m + 1);
        double s2 = 0.0, s4 = 0.0;
        for (int k = -m; k <= m; ++k) {
            s2 += k * k;
            s4 += static_cast<double>(k) * k * k * k;
        }
        const double n0 = 2 * m + 1;
        for (int k = -m; k <= m; ++k) w[k + m] = (s4 - s2 * k * k) / (n0 * s4 - s2 * s2);
        std::vector<double> g = f;
        for (std::size_t i = m; i + m < n; ++i) {
            double acc = 0.0;
            for (int k = -m; k <= m; ++k) acc += w[k + m] * f[i + k];
            g[i] = acc;
        }
        f.swap(g);
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d;
        if (i >= 2 && i + 2 < n)
            d = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
        else if (i == 0)
            d = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
        else if (i + 1 == n)
            d = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
        else
            d = (f[i + 1] - f[i - 1]) / (2.0 * h);
        out[i] = -d;
    }
    return out;
}

// Maximal index ranges [first, last) on which p stays strictly positive.
inline std::vector<std::pair<std::size_t, std::size_t>> positive_segments(const std::vector<double>& p,
                                                                          std::size_t min_len = 5) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t i = 0;
    while (i < p.size()) {
        if (p[i] > 0.0) {
            std::size_t j = i;
            while (j < p.size() && p[j] > 0.0) ++j;
            if (j - i >= min_len) out.emplace_back(i, j);
            i = j;
        } else {
            ++i;
        }
    }
    return out;
}

struct RateSample {
    double t = 0.0;
    double gamma = 0.0;
};

// gamma_eff evaluated on every positive stretch of the trace.
inline std::vector<RateSample> gamma_eff_segments(const PopulationTrace& tr, int smoothing_window = 7) {
    std::vector<RateSample> out;
    for (auto [a, b] : positive_segments(tr.rho00, static_cast<std::size_t>(std::max(5, smoothing_window)))) {
        std::vector<double> t(tr.t.begin() + a, tr.t.begin() + b), p(tr.rho00.begin() + a, tr.rho00.begin() + b);
        auto g = gamma_eff(t, p, smoothing_window);
        for (std::size_t i = 0; i < g.size(); ++i) out.push_back({t[i], g[i]});
    }
    return out;
}

struct Interval {
    double start = 0.0;
    double end = 0.0;
};

// Longest contiguous run of negative rates.
inline std::optional<Interval> backflow_interval(const std::vector<RateSample>& g) {
    std::optional<Interval> best;
    std::size_t i = 0;
    while (i < g.size()) {
        if (g[i].gamma < 0.0) {
            std::size_t j = i;
            while (j + 1 < g.size() && g[j + 1].gamma < 0.0 && g[j + 1].t > g[j].t) ++j;
            if (j > i && (!best || g[j].t - g[i].t > best->end - best->start)) best = Interval{g[i].t, g[j].t};
            i = j + 1;
        } else {
            ++i;
        }
    }
    return best;
}

}  // namespace stmbus
