#pragma once

// Adaptive Dormand-Prince 5(4) integrator over flat std::vector states
// (double or complex<double>). Steps land exactly on requested endpoints.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"

namespace rydkin {

namespace detail {
inline double abs2(double x) { return x * x; }
inline double abs2(const std::complex<double>& x) { return std::norm(x); }
} // namespace detail

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double initial_step = 0; // 0 -> span/100
    std::size_t max_steps = 50'000'000;
};

// Integrates y' = f(t, y, dydt) from t0 to t1 in place.
template <typename Scalar, typename Rhs>
void integrate_adaptive(Rhs&& rhs, std::vector<Scalar>& y, double t0, double t1,
                        const OdeOptions& opt = {}) {
    if (t1 <= t0) return;
    const std::size_t n = y.size();
    std::vector<Scalar> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), yerr(n);

    // Dormand-Prince coefficients
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    double t = t0;
    double h = opt.initial_step > 0 ? opt.initial_step : (t1 - t0) / 100.0;
    std::size_t steps = 0;
    rhs(t, y, k1); // FSAL: k1 always holds f(t, y)

    while (t < t1) {
        if (++steps > opt.max_steps)
            throw numeric_error("integrate_adaptive: step budget exhausted at t=" +
                                std::to_string(t) + " h=" + std::to_string(h));
        if (h > t1 - t) h = t1 - t;

        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a21 * k1[i]);
        rhs(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        rhs(t + h, ytmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(t + h, ynew, k7);

        double err2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            Scalar e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
            double sk = opt.atol + opt.rtol * std::sqrt(std::max(detail::abs2(y[i]),
                                                                 detail::abs2(ynew[i])));
            err2 += detail::abs2(e) / (sk * sk);
        }
        double err = std::sqrt(err2 / double(n));

        if (err <= 1.0) {
            t += h;
            y.swap(ynew);
            k1.swap(k7);
        }
        double scale = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        scale = std::min(5.0, std::max(0.2, scale));
        h *= scale;
        if (!(h > 0) || !std::isfinite(h))
            throw numeric_error("integrate_adaptive: step underflow at t=" + std::to_string(t) +
                                " err=" + std::to_string(err));
        if (t + h == t)
            throw numeric_error("integrate_adaptive: step vanished at t=" + std::to_string(t));
    }
}

} // namespace rydkin
