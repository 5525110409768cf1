#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace stmbus {

enum class DecayModel { exponential, stretched_exponential };

inline std::string to_string(DecayModel m) {
    return m == DecayModel::exponential ? "exponential" : "stretched-exponential";
}

struct DecayFit {
    DecayModel model = DecayModel::stretched_exponential;
    double timescale = 0.0;
    double beta = 1.0;
    double residual = 0.0;  // rms of the weighted log-space residuals
    int iterations = 0;
};

// Least squares for y = exp(-(t/T)^beta) on log-transformed residuals
// weighted by y, by Levenberg-damped Gauss-Newton in (ln T, beta).
inline DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y, DecayModel model,
                          int max_iter = 500) {
    const std::size_t n = t.size();
    require(y.size() == n, "t and y differ in length");
    require(n >= 8, "fit needs at least 8 samples");
    for (std::size_t i = 0; i < n; ++i) {
        require(t[i] >= 0.0, "sample times must be non-negative");
        require(y[i] > 0.0 && y[i] <= 1.0, "samples must lie in (0, 1]");
    }
    const bool free_beta = model == DecayModel::stretched_exponential;

    // Start from the straight line ln(-ln y) = beta ln t - beta ln T.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (t[i] <= 0.0 || y[i] >= 1.0) continue;
        double lx = std::log(t[i]), ly = std::log(-std::log(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    require(m >= 2, "too few decaying samples");
    double beta = 1.0;
    if (free_beta) {
        double den = m * sxx - sx * sx;
        beta = den > 0.0 ? (m * sxy - sx * sy) / den : 1.0;
        beta = std::clamp(beta, 0.2, 4.0);
    }
    double u = (sx * beta - sy) / (m * beta);  // ln T

    auto residuals = [&](double uu, double bb, std::vector<double>& r) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double q = t[i] > 0.0 ? std::exp(bb * (std::log(t[i]) - uu)) : 0.0;
            r[i] = y[i] * (std::log(y[i]) + q);
            c += r[i] * r[i];
        }
        return c;
    };
    std::vector<double> r(n), rt(n);
    double cost = residuals(u, beta, r);
    double lambda = 1e-3;
    int it = 0;
    bool converged = false;
    for (; it < max_iter; ++it) {
        double a11 = 0, a12 = 0, a22 = 0, g1 = 0, g2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (t[i] <= 0.0) continue;
            double lt = std::log(t[i]) - u;
            double q = std::exp(beta * lt);
            double ju = -beta * q * y[i], jb = q * lt * y[i];
            a11 += ju * ju;
            a12 += ju * jb;
            a22 += jb * jb;
            g1 += ju * r[i];
            g2 += jb * r[i];
        }
        if (!free_beta) {
            a12 = 0.0;
            a22 = 1.0;
            g2 = 0.0;
        }
        bool accepted = false;
        for (int tries = 0; tries < 60 && !accepted; ++tries) {
            double b11 = a11 * (1 + lambda), b22 = a22 * (1 + lambda);
            double det = b11 * b22 - a12 * a12;
            if (!(det > 0.0)) {
                lambda *= 4;
                continue;
            }
            double du = -(b22 * g1 - a12 * g2) / det;
            double dbeta = free_beta ? -(b11 * g2 - a12 * g1) / det : 0.0;
            double nb = std::clamp(beta + dbeta, 0.05, 4.0);
            double nc = residuals(u + du, nb, rt);
            if (nc <= cost) {
                double step = std::abs(du) + std::abs(nb - beta);
                double drop = cost - nc;
                u += du;
                beta = nb;
                r.swap(rt);
                cost = nc;
                lambda = std::max(lambda / 3, 1e-12);
                accepted = true;
                if (step < 1e-12 || drop <= 1e-15 * std::max(cost, 1e-300)) converged = true;
            } else {
                lambda *= 4;
            }
        }
        if (!accepted) converged = true;  // no descent direction left: at the minimum
        if (converged) break;
    }
    if (!converged) throw NumericalError("decay fit did not converge");
    return DecayFit{model, std::exp(u), beta, std::sqrt(cost / n), it + 1};
}

// Samples with y >= floor, the part of a decay curve a log fit can use.
inline std::pair<std::vector<double>, std::vector<double>> fit_window(const std::vector<double>& t,
                                                                      const std::vector<double>& y,
                                                                      double floor) {
    std::pair<std::vector<double>, std::vector<double>> out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (y[i] >= floor && y[i] <= 1.0) {
            out.first.push_back(t[i]);
            out.second.push_back(y[i]);
        }
    }
    return out;
}

}  // namespace stmbus
