#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "common.hpp"

namespace stmbus {

enum class NoiseKind { one_over_f, filtered, white };

// Classical frequency noise delta_omega(t). Spectral densities are one-sided,
// in (rad/s)^2/Hz.
struct NoiseModel {
    NoiseKind kind = NoiseKind::one_over_f;
    double amplitude = 6e10;  // S at 1 Hz for 1/f kinds, flat level for white
    double f_min = 1e2;
    double f_max = 1e5;
    double filter_center = 3e4;
    double filter_depth_db = 20.0;
    double filter_width_decades = 0.4;
    int n_components = 400;

    void validate() const {
        if (!(f_min > 0.0 && f_min < f_max)) throw ConfigError("noise band needs 0 < f_min < f_max");
        if (n_components < 100) throw ConfigError("noise synthesis needs at least 100 components");
        if (!(amplitude >= 0.0)) throw ConfigError("noise amplitude must be non-negative");
        if (kind == NoiseKind::filtered &&
            !(filter_center > 0.0 && filter_depth_db >= 0.0 && filter_width_decades > 0.0))
            throw ConfigError("band-stop filter parameters are invalid");
    }

    double band_stop(double f) const {
        double u = std::log10(f / filter_center) / filter_width_decades;
        return 1.0 - (1.0 - std::pow(10.0, -filter_depth_db / 10.0)) * std::exp(-0.5 * u * u);
    }

    double spectral_density(double f) const {
        switch (kind) {
            case NoiseKind::white: return amplitude;
            case NoiseKind::one_over_f: return amplitude / f;
            case NoiseKind::filtered: return amplitude / f * band_stop(f);
        }
        return 0.0;
    }
};

struct NoiseComponents {
    std::vector<double> omega;      // rad/s
    std::vector<double> amplitude;  // rad/s
};

// Log-spaced tones whose powers integrate the target density.
inline NoiseComponents noise_components(const NoiseModel& m) {
    m.validate();
    NoiseComponents c;
    const int n = m.n_components;
    const double dlog = std::log(m.f_max / m.f_min) / (n - 1);
    for (int k = 0; k < n; ++k) {
        double f = m.f_min * std::exp(dlog * k);
        c.omega.push_back(two_pi * f);
        c.amplitude.push_back(std::sqrt(2.0 * m.spectral_density(f) * f * dlog));
    }
    return c;
}

inline std::vector<double> random_phases(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, two_pi);
    std::vector<double> ph(n);
    for (auto& p : ph) p = u(rng);
    return ph;
}

inline std::vector<double> synthesize_noise(const NoiseModel& m, double duration, double dt, std::uint64_t seed) {
    require(duration > 0.0 && dt > 0.0, "duration and dt must be positive");
    auto c = noise_components(m);
    auto ph = random_phases(c.omega.size(), seed);
    // round, not floor: duration/dt is rarely exact in floating point
    const auto n = static_cast<std::size_t>(std::max(1LL, std::llround(duration / dt)));
    std::vector<double> x(n, 0.0);
    for (std::size_t k = 0; k < c.omega.size(); ++k) {
        if (c.amplitude[k] == 0.0) continue;
        const std::complex<double> rot = std::polar(1.0, c.omega[k] * dt);
        std::complex<double> z = std::polar(c.amplitude[k], ph[k]);
        for (std::size_t j = 0; j < n; ++j) {
            if (j % 256 == 0) z = std::polar(c.amplitude[k], c.omega[k] * dt * static_cast<double>(j) + ph[k]);
            x[j] += z.real();
            z *= rot;
        }
    }
    return x;
}

struct Periodogram {
    std::vector<double> f_hz;
    std::vector<double> s_omega;
};

// One-sided Hann periodogram.
inline Periodogram periodogram(const std::vector<double>& x, double dt) {
    const std::size_t n = x.size();
    require(n >= 16, "series too short for a periodogram");
    std::vector<double> w(n);
    double norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        w[j] = (0.5 - 0.5 * std::cos(two_pi * j / n)) * x[j];
        norm += sq(0.5 - 0.5 * std::cos(two_pi * j / n));
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, w);
    Periodogram p;
    for (std::size_t b = 1; b <= n / 2; ++b) {
        p.f_hz.push_back(b / (n * dt));
        p.s_omega.push_back(2.0 * std::norm(spec[b]) * dt / norm);
    }
    return p;
}

inline Periodogram mean_periodogram(const NoiseModel& m, double duration, double dt, int n_realizations,
                                    std::uint64_t seed) {
    require(n_realizations >= 1, "need at least one realization");
    Periodogram acc;
    for (int r = 0; r < n_realizations; ++r) {
        auto p = periodogram(synthesize_noise(m, duration, dt, seed + r), dt);
        if (acc.f_hz.empty()) {
            acc = p;
        } else {
            for (std::size_t i = 0; i < p.s_omega.size(); ++i) acc.s_omega[i] += p.s_omega[i];
        }
    }
    for (auto& s : acc.s_omega) s /= n_realizations;
    return acc;
}

// Least-squares log-log slope after averaging into logarithmic bins.
inline double spectral_slope(const Periodogram& p, double f_lo, double f_hi, int bins_per_decade = 10) {
    require(f_lo > 0.0 && f_hi > f_lo, "invalid fit band");
    const int nb = std::max(2, static_cast<int>(std::ceil(std::log10(f_hi / f_lo) * bins_per_decade)));
    std::vector<double> sx(nb, 0.0), sy(nb, 0.0);
    std::vector<int> cnt(nb, 0);
    for (std::size_t i = 0; i < p.f_hz.size(); ++i) {
        double f = p.f_hz[i];
        if (f < f_lo || f >= f_hi || !(p.s_omega[i] > 0.0)) continue;
        int b = std::min(nb - 1, static_cast<int>(std::log10(f / f_lo) * bins_per_decade));
        sx[b] += std::log10(f);
        sy[b] += p.s_omega[i];
        ++cnt[b];
    }
    double mx = 0, my = 0;
    int used = 0;
    std::vector<double> xs, ys;
    for (int b = 0; b < nb; ++b) {
        if (!cnt[b]) continue;
        xs.push_back(sx[b] / cnt[b]);
        ys.push_back(std::log10(sy[b] / cnt[b]));
        mx += xs.back();
        my += ys.back();
        ++used;
    }
    require(used >= 2, "too few populated bins for a slope");
    mx /= used;
    my /= used;
    double num = 0, den = 0;
    for (int i = 0; i < used; ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += sq(xs[i] - mx);
    }
    return num / den;
}

enum class Sequence { ramsey, echo };

// Phase accumulated by one tone a*cos(w t + th): free evolution over tau, or
// with a refocusing flip at tau/2.
inline double tone_phase(Sequence s, double a, double w, double th, double tau) {
    if (s == Sequence::ramsey) return a / w * (std::sin(w * tau + th) - std::sin(th));
    return a / w * (2.0 * std::sin(0.5 * w * tau + th) - std::sin(th) - std::sin(w * tau + th));
}

// |<exp(i phi(tau))>| over realizations seeded seed, seed+1, ...
inline std::vector<double> dephasing_contrast(const NoiseModel& m, Sequence seq, const std::vector<double>& tau,
                                              int n_realizations, std::uint64_t seed, unsigned threads = 0) {
    require(n_realizations >= 1, "need at least one realization");
    auto c = noise_components(m);
    const std::size_t nt = tau.size();
    std::vector<std::complex<double>> per(static_cast<std::size_t>(n_realizations) * nt);
    auto work = [&](int r0, int r1) {
        for (int r = r0; r < r1; ++r) {
            auto ph = random_phases(c.omega.size(), seed + static_cast<std::uint64_t>(r));
            for (std::size_t j = 0; j < nt; ++j) {
                double phi = 0.0;
                for (std::size_t k = 0; k < c.omega.size(); ++k)
                    phi += tone_phase(seq, c.amplitude[k], c.omega[k], ph[k], tau[j]);
                per[static_cast<std::size_t>(r) * nt + j] = std::polar(1.0, phi);
            }
        }
    };
    unsigned nth = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    nth = std::min<unsigned>(nth, static_cast<unsigned>(n_realizations));
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < nth; ++i) {
        int r0 = static_cast<int>(static_cast<long>(n_realizations) * i / nth);
        int r1 = static_cast<int>(static_cast<long>(n_realizations) * (i + 1) / nth);
        pool.emplace_back(work, r0, r1);
    }
    for (auto& t : pool) t.join();

    std::vector<double> out(nt);
    for (std::size_t j = 0; j < nt; ++j) {
        std::complex<double> acc = 0.0;
        for (int r = 0; r < n_realizations; ++r) acc += per[static_cast<std::size_t>(r) * nt + j];
        out[j] = acc.real() / n_realizations;
    }
    return out;
}

inline std::vector<double> ramsey(const NoiseModel& m, const std::vector<double>& tau, int n_realizations,
                                  std::uint64_t seed) {
    require(n_realizations >= 200, "Ramsey averaging needs at least 200 realizations");
    return dephasing_contrast(m, Sequence::ramsey, tau, n_realizations, seed);
}

inline std::vector<double> hahn_echo(const NoiseModel& m, const std::vector<double>& tau, int n_realizations,
                                     std::uint64_t seed) {
    require(n_realizations >= 200, "echo averaging needs at least 200 realizations");
    return dephasing_contrast(m, Sequence::echo, tau, n_realizations, seed);
}

}  // namespace stmbus
