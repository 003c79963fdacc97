#pragma once

// Homogeneous mean-field treatment of the facilitation/decay competition.
//
// Classical:  dn/dt = G_fac n(1-2n) + G_spon (1-n)(1-2n) - kappa n.
// The stationary condition is a quadratic in n,
//     (2 G_spon - 2 G_fac) n^2 + (G_fac - 3 G_spon - kappa) n + G_spon = 0,
// solved in closed form with a Newton polish; stability from the sign of the
// analytic derivative of the right-hand side.
//
// Quantum (coherent facilitation with decay, dephasing off): eliminating the
// in-phase/quadrature components of the Bloch vector from the stationary
// three-variable mean-field system leaves
//     n [ 16 Omega^2 n (2n - 1) + kappa^2 ] = 0,
// i.e. n = 0 always, plus for Omega >= kappa/sqrt(2) the pair
//     n_pm = [1 +- sqrt(1 - kappa^2/(2 Omega^2))] / 4,
// with n_+ stable and n_- unstable; both merge at 1/4 at threshold.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "ode.hpp"

namespace rydkin {

struct MeanFieldParams {
    double rate_fac = 0;  // 1/us
    double rate_spon = 0; // 1/us
    double decay = 0;     // 1/us

    void validate() const {
        if (rate_fac < 0 || rate_spon < 0 || decay < 0)
            throw std::invalid_argument("MeanFieldParams: rates must be >= 0");
        if (rate_fac + rate_spon <= 0)
            throw std::invalid_argument("MeanFieldParams: rate_fac + rate_spon must be > 0");
    }
};

struct StationarySolution {
    double density = 0;
    bool stable = false;
};

inline double mf_rhs(double n, const MeanFieldParams& p) {
    return p.rate_fac * n * (1 - 2 * n) + p.rate_spon * (1 - n) * (1 - 2 * n) - p.decay * n;
}

inline double mf_rhs_derivative(double n, const MeanFieldParams& p) {
    return p.rate_fac * (1 - 4 * n) + p.rate_spon * (4 * n - 3) - p.decay;
}

// Time integration of the classical mean-field equation on a fixed grid.
// t_grid must be non-decreasing and start at >= 0.
inline std::vector<double> mf_trajectory(double n0, const MeanFieldParams& p,
                                         const std::vector<double>& t_grid,
                                         const OdeOptions& opt = {.rtol = 1e-9, .atol = 1e-14}) {
    // weaker precondition than MeanFieldParams::validate(): the integrator is
    // well defined even in the pure-decay limit rate_fac = rate_spon = 0
    if (p.rate_fac < 0 || p.rate_spon < 0 || p.decay < 0)
        throw std::invalid_argument("mf_trajectory: rates must be >= 0");
    if (n0 < 0 || n0 > 1) throw std::invalid_argument("mf_trajectory: n0 must be in [0,1]");
    std::vector<double> out;
    out.reserve(t_grid.size());
    std::vector<double> y{n0};
    auto rhs = [&p](double, const std::vector<double>& yv, std::vector<double>& dydt) {
        dydt[0] = mf_rhs(yv[0], p);
    };
    double t = 0;
    for (double tq : t_grid) {
        if (tq < t) throw std::invalid_argument("mf_trajectory: t_grid must be non-decreasing");
        integrate_adaptive(rhs, y, t, tq, opt);
        t = tq;
        // the flow preserves [0,1]; anything beyond rounding noise is a solver bug
        if (y[0] < -1e-9 || y[0] > 1 + 1e-9)
            throw numeric_error("mf_trajectory: density left [0,1] at t=" + std::to_string(t));
        out.push_back(std::clamp(y[0], 0.0, 1.0));
    }
    return out;
}

namespace detail {
inline void polish_and_push(std::vector<StationarySolution>& roots, double n,
                            const MeanFieldParams& p) {
    // Newton polish on the stationary polynomial
    for (int it = 0; it < 50; ++it) {
        double f = mf_rhs(n, p);
        if (std::abs(f) < 1e-13) break;
        double df = mf_rhs_derivative(n, p);
        if (df == 0) break;
        n -= f / df;
    }
    if (n < -1e-9 || n > 1 + 1e-9) return;
    n = std::clamp(n, 0.0, 1.0);
    for (const auto& r : roots)
        if (std::abs(r.density - n) < 1e-10) return;
    roots.push_back({n, mf_rhs_derivative(n, p) < 0});
}
} // namespace detail

// All stationary densities in [0,1] with stability flags, ordered ascending.
inline std::vector<StationarySolution> mf_stationary(const MeanFieldParams& p) {
    p.validate();
    std::vector<StationarySolution> roots;
    const double a = 2 * p.rate_spon - 2 * p.rate_fac;
    const double b = p.rate_fac - 3 * p.rate_spon - p.decay;
    const double c = p.rate_spon;
    if (std::abs(a) < 1e-300) {
        if (b != 0) detail::polish_and_push(roots, -c / b, p);
    } else {
        double disc = b * b - 4 * a * c;
        if (disc >= 0) {
            double sq = std::sqrt(disc);
            // numerically stable quadratic roots
            double q = -0.5 * (b + (b >= 0 ? sq : -sq));
            detail::polish_and_push(roots, q / a, p);
            if (q != 0) detail::polish_and_push(roots, c / q, p);
            else detail::polish_and_push(roots, 0.0, p);
        }
    }
    std::sort(roots.begin(), roots.end(),
              [](const StationarySolution& u, const StationarySolution& v) {
                  return u.density < v.density;
              });
    return roots;
}

// Critical drive of the coherent facilitation model.
inline double qmf_threshold(double decay) {
    if (decay <= 0) throw std::invalid_argument("qmf_threshold: decay must be > 0");
    return decay / std::sqrt(2.0);
}

// Stationary branches of the coherent facilitation model with decay.
inline std::vector<StationarySolution> qmf_stationary(double rabi, double decay) {
    if (decay <= 0) throw std::invalid_argument("qmf_stationary: decay must be > 0");
    if (rabi < 0) throw std::invalid_argument("qmf_stationary: rabi must be >= 0");
    // reduced dynamics dn/dt = -n [16 Omega^2 n (2n-1) + kappa^2] / kappa:
    // n = 0 is always attracting
    std::vector<StationarySolution> roots{{0.0, true}};
    if (rabi == 0) return roots;
    double disc = 1.0 - decay * decay / (2.0 * rabi * rabi);
    // |disc| below rounding noise counts as the exact threshold
    if (disc < -1e-12) return roots;
    if (disc <= 1e-12) {
        roots.push_back({0.25, false}); // marginal double root
        return roots;
    }
    double sq = std::sqrt(disc);
    roots.push_back({(1.0 - sq) / 4.0, false});
    roots.push_back({(1.0 + sq) / 4.0, true});
    return roots;
}

} // namespace rydkin
