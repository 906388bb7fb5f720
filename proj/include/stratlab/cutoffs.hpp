#pragma once

#include <cmath>
#include <functional>
#include <string>

namespace stratlab {

/// Scalar function of the spectral variable, applied as m(t * lambda).
struct Multiplier {
    std::string name;
    std::function<double(double)> fn;
    bool bounded = true;

    double operator()(double lambda) const { return fn(lambda); }
};

namespace cutoff {

// g(u) = exp(-1/u) for u > 0, else 0.
inline double flat_exp(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

/// C-infinity transition: 0 for u <= 0, 1 for u >= 1.
inline double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = flat_exp(u);
    const double b = flat_exp(1.0 - u);
    return a / (a + b);
}

/// 1 on [0, 1/2], 0 on [1, inf).
inline double theta0(double lambda) { return smooth_step((1.0 - lambda) / 0.5); }
inline double theta1(double lambda) { return 1.0 - theta0(lambda); }

/// Dyadic band: psi(l) = theta0(l/2) - theta0(l), so sum_j psi(2^-j l) telescopes to theta1.
inline double psi(double lambda) { return theta0(lambda / 2.0) - theta0(lambda); }

inline double psi_tilde(double lambda) { return lambda > 0.0 ? psi(lambda) / lambda : 0.0; }

/// 1 on [0, 1/4], 0 on [1, inf).
inline double phi(double lambda) { return smooth_step((1.0 - lambda) / 0.75); }

/// lambda^(s/2 - 1) (1 - e^-lambda), continuous at 0 for s >= 0.
inline double poincare_symbol(double lambda, double s) {
    if (lambda <= 0.0) return s == 0.0 ? 1.0 : 0.0;
    return std::pow(lambda, s / 2.0 - 1.0) * -std::expm1(-lambda);
}

inline double m_a(double lambda) { return lambda > 0.0 ? theta1(lambda) / lambda : 0.0; }
inline double m_b(double lambda) { return lambda > 0.0 ? std::exp(-lambda) * theta1(lambda) / lambda : 0.0; }

}  // namespace cutoff

/// The named multipliers of the Poincare decomposition and the band-pass family.
struct CutoffFamily {
    Multiplier theta0, theta1, psi, psi_tilde, phi, m, m0, m1, m_a, m_b;
};

inline CutoffFamily build_cutoffs(double s = 0.0) {
    using namespace cutoff;
    CutoffFamily c;
    c.theta0 = {"theta0", theta0};
    c.theta1 = {"theta1", theta1};
    c.psi = {"psi", psi};
    c.psi_tilde = {"psi_tilde", psi_tilde};
    c.phi = {"phi", phi};
    c.m = {"m", [s](double l) { return poincare_symbol(l, s); }};
    c.m0 = {"m0", [s](double l) { return poincare_symbol(l, s) * theta0(l); }};
    c.m1 = {"m1", [s](double l) { return poincare_symbol(l, s) * theta1(l); }};
    c.m_a = {"m_a", m_a};
    c.m_b = {"m_b", m_b};
    return c;
}

inline Multiplier identity_multiplier() { return {"one", [](double) { return 1.0; }}; }
inline Multiplier heat_multiplier() { return {"heat", [](double l) { return std::exp(-l); }}; }
inline Multiplier linear_multiplier() { return {"lambda", [](double l) { return l; }, false}; }

}  // namespace stratlab
