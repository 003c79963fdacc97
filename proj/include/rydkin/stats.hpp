#pragma once

// Counting-statistics and criticality-analysis pipeline: Mandel Q, binomial
// detection thinning, the two-mode seed model, growth-rate extraction from
// N(t), power-law fits with critical-point search, and collapse checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace rydkin {

struct CountRecord {
    std::vector<std::int64_t> shots;
    std::string label;

    void validate() const {
        if (shots.empty()) throw std::invalid_argument("CountRecord: shots must be non-empty");
        for (auto s : shots)
            if (s < 0) throw std::invalid_argument("CountRecord: counts must be >= 0");
    }
    double mean() const {
        double m = 0;
        for (auto s : shots) m += double(s);
        return m / double(shots.size());
    }
    // population variance by default; sample (n-1) variance on request
    double variance(bool sample = false) const {
        double m = mean(), v = 0;
        for (auto s : shots) {
            double d = double(s) - m;
            v += d * d;
        }
        double denom = sample ? double(shots.size()) - 1.0 : double(shots.size());
        return denom > 0 ? v / denom : 0.0;
    }
};

// Q = Var(N)/<N> - 1: zero for Poissonian counting, -1 floor for a
// fluctuation-free source.
inline double mandel_q(const CountRecord& r, bool sample_variance = false) {
    r.validate();
    double m = r.mean();
    if (!(m > 0)) throw undefined_statistic("mandel_q: mean count is zero");
    return r.variance(sample_variance) / m - 1.0;
}

// Detection model: each count survives independently with probability eta.
inline CountRecord thin_counts(const CountRecord& r, double eta, Rng& rng) {
    r.validate();
    if (!(eta > 0 && eta <= 1)) throw std::invalid_argument("thin_counts: eta must be in (0,1]");
    CountRecord out;
    out.label = r.label;
    out.shots.reserve(r.shots.size());
    for (auto s : r.shots)
        out.shots.push_back(std::int64_t(rng.binomial(std::uint64_t(s), eta)));
    return out;
}

struct BimodalParams {
    double n1 = 0;         // mean count without a seed
    double n2 = 0;         // mean count after a triggered avalanche, > n1
    double mean_seeds = 0; // detected mean seed number
    double eta = 1;        // detection efficiency

    void validate() const {
        if (n1 < 0 || !(n2 > n1)) throw std::invalid_argument("BimodalParams: need 0 <= n1 < n2");
        if (mean_seeds < 0) throw std::invalid_argument("BimodalParams: mean_seeds must be >= 0");
        if (!(eta > 0 && eta <= 1)) throw std::invalid_argument("BimodalParams: eta must be in (0,1]");
    }
};

struct BimodalPrediction {
    double mean = 0;
    double q = 0;
};

// Two-delta-peak seed model: alpha = P(no seed) = exp(-mean_seeds/eta),
// mean = alpha n1 + (1-alpha) n2, Q from the exact two-point variance.
inline BimodalPrediction bimodal_predict(const BimodalParams& b) {
    b.validate();
    double alpha = std::exp(-b.mean_seeds / b.eta);
    double mean = alpha * b.n1 + (1.0 - alpha) * b.n2;
    if (!(mean > 0)) throw undefined_statistic("bimodal_predict: mean vanishes (alpha=1, n1=0)");
    double var = alpha * (mean - b.n1) * (mean - b.n1) + (1.0 - alpha) * (mean - b.n2) * (mean - b.n2);
    return {mean, var / mean - 1.0};
}

struct GrowthPoint {
    double time = 0;
    double spacing = 0; // mean distance between excited atoms, (volume/N)^(1/3)
    double rate = 0;    // (dN/dt)/N_g
    double count = 0;   // smoothed N at this time
};

// Growth rate per ground-state atom versus mean Rydberg spacing: moving
// average smoothing, central differences, normalization by N_g. Points where
// the smoothed count is not positive carry no spacing and are dropped.
inline std::vector<GrowthPoint> growth_rate_curve(const std::vector<double>& times,
                                                  const std::vector<double>& mean_counts,
                                                  double n_g, int window, double volume) {
    if (times.size() != mean_counts.size())
        throw std::invalid_argument("growth_rate_curve: times/counts size mismatch");
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("growth_rate_curve: window must be odd and >= 3");
    if (times.size() < std::size_t(window))
        throw std::invalid_argument("growth_rate_curve: fewer points than smoothing window");
    if (!(n_g > 0) || !(volume > 0))
        throw std::invalid_argument("growth_rate_curve: n_g and volume must be > 0");

    const std::size_t n = times.size();
    const std::size_t half = std::size_t(window / 2);
    // smoothed values exist only where the full symmetric window fits
    std::vector<double> smooth(n, 0.0);
    for (std::size_t i = half; i + half < n; ++i) {
        double acc = 0;
        for (std::size_t j = i - half; j <= i + half; ++j) acc += mean_counts[j];
        smooth[i] = acc / double(window);
    }
    std::vector<GrowthPoint> out;
    if (n < 2 * half + 3) return out;
    // central differences restricted to fully smoothed neighbors
    std::size_t first = half + 1;
    std::size_t last = n - 2 - half;
    for (std::size_t i = first; i <= last; ++i) {
        double dt = times[i + 1] - times[i - 1];
        if (!(dt > 0)) continue;
        if (!(smooth[i] > 0)) continue;
        GrowthPoint pt;
        pt.time = times[i];
        pt.count = smooth[i];
        pt.rate = (smooth[i + 1] - smooth[i - 1]) / dt / n_g;
        pt.spacing = std::cbrt(volume / smooth[i]);
        out.push_back(pt);
    }
    return out;
}

struct PowerLawFit {
    double beta = 0;
    double omega_c = 0;
    double goodness = 0; // log-log coefficient of determination
    std::pair<double, double> fit_window{0, 0};
};

struct PowerLawOptions {
    int candidate_grid = 256;
    double window_lo_frac = 0.02; // fit window starts at omega_c + lo_frac*range
    double window_hi_frac = 0.5;  // and ends at omega_c + hi_frac*range
    std::size_t min_points = 4;
};

namespace detail {

struct LogLogFit {
    bool valid = false;
    double slope = 0, intercept = 0, r2 = -std::numeric_limits<double>::infinity();
};

inline LogLogFit loglog_fit_above(const std::vector<std::pair<double, double>>& pts,
                                  double omega_c, double lo, double hi, std::size_t min_points) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    std::size_t m = 0;
    for (const auto& [w, nv] : pts) {
        double d = w - omega_c;
        if (d <= lo || d > hi || !(nv > 0)) continue;
        double x = std::log(d), y = std::log(nv);
        sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
        ++m;
    }
    LogLogFit f;
    if (m < min_points) return f;
    double dm = double(m);
    double cxx = sxx - sx * sx / dm;
    double cxy = sxy - sx * sy / dm;
    double cyy = syy - sy * sy / dm;
    if (!(cxx > 0)) return f;
    f.slope = cxy / cxx;
    f.intercept = (sy - f.slope * sx) / dm;
    f.r2 = cyy > 0 ? (cxy * cxy) / (cxx * cyy) : 1.0;
    f.valid = true;
    return f;
}

} // namespace detail

// Power-law fit n ~ (omega - omega_c)^beta: scans candidate critical points,
// fits log n against log(omega - omega_c) over the window above each
// candidate, keeps the candidate maximizing R^2, then refines it by
// golden-section search around the grid optimum.
inline PowerLawFit fit_powerlaw_beta(std::vector<std::pair<double, double>> points,
                                     const PowerLawOptions& opt = {}) {
    if (points.size() < 8)
        throw numeric_error("fit_powerlaw_beta: need at least 8 points spanning the transition");
    std::sort(points.begin(), points.end());
    double omega_min = points.front().first, omega_max = points.back().first;
    double range = omega_max - omega_min;
    if (!(range > 0)) throw numeric_error("fit_powerlaw_beta: degenerate omega range");
    double lo = opt.window_lo_frac * range, hi = opt.window_hi_frac * range;

    auto score = [&](double wc) {
        return detail::loglog_fit_above(points, wc, lo, hi, opt.min_points);
    };

    double best_wc = 0, best_r2 = -std::numeric_limits<double>::infinity();
    int grid = std::max(8, opt.candidate_grid);
    double wc_max = omega_max - lo;
    for (int i = 0; i < grid; ++i) {
        double wc = omega_min + (wc_max - omega_min) * double(i) / double(grid - 1);
        auto f = score(wc);
        if (f.valid && f.r2 > best_r2) {
            best_r2 = f.r2;
            best_wc = wc;
        }
    }
    if (!(best_r2 > -std::numeric_limits<double>::infinity()))
        throw numeric_error("fit_powerlaw_beta: no candidate critical point with enough usable points");

    // golden-section refinement inside the bracketing grid cells
    double cell = (wc_max - omega_min) / double(grid - 1);
    double a = std::max(omega_min, best_wc - cell);
    double b = std::min(wc_max, best_wc + cell);
    const double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    auto val = [&](double wc) {
        auto f = score(wc);
        return f.valid ? f.r2 : -std::numeric_limits<double>::infinity();
    };
    double f1 = val(x1), f2 = val(x2);
    for (int it = 0; it < 120 && b - a > 1e-12 * (1 + std::abs(b)); ++it) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a);
            f2 = val(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a);
            f1 = val(x1);
        }
    }
    double wc_ref = 0.5 * (a + b);
    auto fit = score(wc_ref);
    if (!fit.valid || fit.r2 < best_r2) { // keep the grid optimum if refinement left the basin
        wc_ref = best_wc;
        fit = score(wc_ref);
    }
    PowerLawFit out;
    out.beta = fit.slope;
    out.omega_c = wc_ref;
    out.goodness = std::max(0.0, std::min(1.0, fit.r2));
    out.fit_window = {wc_ref + lo, wc_ref + hi};
    return out;
}

struct CollapseCurve {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> stderrs; // optional; empty -> raw deviations
    double label = 1;            // Omega for incoherent rescaling
};

enum class CollapseMode { incoherent_rescale, blockade_scaling };

struct CollapseResult {
    double max_deviation = 0;           // combined-SE units when SEs given
    std::optional<double> exponent;     // blockade_scaling mode
};

namespace detail {
inline double lerp_at(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    auto it = std::lower_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return ys.front();
    if (it == xs.end()) return ys.back();
    std::size_t j = std::size_t(it - xs.begin());
    double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return ys[j - 1] + w * (ys[j] - ys[j - 1]);
}
} // namespace detail

// incoherent_rescale: multiplies each curve's time axis by label^2/dephasing
// and reports the maximum pairwise deviation over the overlapping range.
// blockade_scaling: fits the log-log slope of the first curve over t_window.
inline CollapseResult collapse_check(const std::vector<CollapseCurve>& curves, CollapseMode mode,
                                     double dephasing = 1.0,
                                     std::pair<double, double> t_window = {
                                         0, std::numeric_limits<double>::infinity()}) {
    if (curves.empty()) throw std::invalid_argument("collapse_check: need at least one curve");
    CollapseResult out;
    if (mode == CollapseMode::blockade_scaling) {
        const auto& c = curves.front();
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t m = 0;
        for (std::size_t i = 0; i < c.times.size(); ++i) {
            if (c.times[i] < t_window.first || c.times[i] > t_window.second) continue;
            if (!(c.times[i] > 0) || !(c.values[i] > 0)) continue;
            double x = std::log(c.times[i]), y = std::log(c.values[i]);
            sx += x; sy += y; sxx += x * x; sxy += x * y;
            ++m;
        }
        if (m < 3) throw numeric_error("collapse_check: too few usable points for a slope");
        double dm = double(m);
        out.exponent = (sxy - sx * sy / dm) / (sxx - sx * sx / dm);
        return out;
    }

    if (curves.size() < 2) throw std::invalid_argument("collapse_check: rescaling needs >= 2 curves");
    std::vector<CollapseCurve> rs = curves;
    for (auto& c : rs) {
        double f = c.label * c.label / dephasing;
        for (auto& t : c.times) t *= f;
    }
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& c : rs) {
        lo = std::max(lo, c.times.front());
        hi = std::min(hi, c.times.back());
    }
    double worst = 0;
    for (double tau : rs.front().times) {
        if (tau < lo || tau > hi) continue;
        for (std::size_t i = 0; i < rs.size(); ++i)
            for (std::size_t j = i + 1; j < rs.size(); ++j) {
                double vi = detail::lerp_at(rs[i].times, rs[i].values, tau);
                double vj = detail::lerp_at(rs[j].times, rs[j].values, tau);
                double dev = std::abs(vi - vj);
                if (!rs[i].stderrs.empty() && !rs[j].stderrs.empty()) {
                    double si = detail::lerp_at(rs[i].times, rs[i].stderrs, tau);
                    double sj = detail::lerp_at(rs[j].times, rs[j].stderrs, tau);
                    double denom = std::sqrt(si * si + sj * sj);
                    dev = denom > 0 ? dev / denom : (dev > 0 ? std::numeric_limits<double>::infinity() : 0.0);
                }
                worst = std::max(worst, dev);
            }
    }
    out.max_deviation = worst;
    return out;
}

} // namespace rydkin
