#pragma once

// Quantum-jump Monte Carlo for the facilitation-constrained chain
//   H = Omega sum_k (n_{k-1} + n_{k+1}) sigma_x^k
// with radiative decay kappa (dephasing off). Standard unraveling: the
// unnormalized state evolves under H_eff = H - (i kappa/2) sum_k n_k with
// fixed-step RK4; a jump fires when |psi|^2 crosses a pre-drawn uniform
// threshold (crossing time located by bisection), applying sigma^-_k with
// probability proportional to <n_k>.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "lindblad.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace rydkin {

inline constexpr int qjmc_site_limit = 14;

struct ChainModel {
    int sites = 2;
    double rabi = 0;  // Omega, rad/us (constraint-weighted sigma_x amplitude)
    double decay = 0; // kappa, 1/us
    Boundary boundary = Boundary::open;

    void validate() const {
        if (sites < 2 || sites > qjmc_site_limit)
            throw capacity_error("ChainModel: sites must be in [2," +
                                 std::to_string(qjmc_site_limit) + "]");
        if (rabi < 0 || decay < 0)
            throw std::invalid_argument("ChainModel: rates must be >= 0");
    }
    std::size_t dim() const { return std::size_t(1) << sites; }
    // seeded protocol default: one excitation in the middle of the chain
    std::uint64_t center_seed_state() const { return std::uint64_t(1) << (sites / 2); }
};

struct PureState {
    int sites = 0;
    std::vector<cplx> amp; // length 2^sites

    static PureState basis(int sites, std::uint64_t b) {
        PureState s;
        s.sites = sites;
        s.amp.assign(std::size_t(1) << sites, {0, 0});
        s.amp[b] = 1.0;
        return s;
    }
    double norm2() const {
        double v = 0;
        for (const auto& a : amp) v += std::norm(a);
        return v;
    }
    void normalize() {
        double n = std::sqrt(norm2());
        if (n == 0) return;
        for (auto& a : amp) a /= n;
    }
    // excited-site expectation values of the normalized state
    double mean_density() const {
        double v = 0, n2 = 0;
        for (std::size_t b = 0; b < amp.size(); ++b) {
            double w = std::norm(amp[b]);
            v += w * double(std::popcount(b));
            n2 += w;
        }
        return n2 > 0 ? v / (n2 * double(sites)) : 0.0;
    }
};

// Matrix-free action of the constrained Hamiltonian, precomputed as a list of
// directed flip terms (the operator is symmetric; both directions stored).
class ConstraintHamiltonian {
  public:
    explicit ConstraintHamiltonian(const ChainModel& m) : sites_(m.sites), dim_(m.dim()) {
        m.validate();
        bool periodic = m.boundary == Boundary::periodic;
        for (int k = 0; k < m.sites; ++k) {
            for (std::size_t b = 0; b < dim_; ++b) {
                int left = k > 0 ? int((b >> (k - 1)) & 1)
                                 : (periodic ? int((b >> (m.sites - 1)) & 1) : 0);
                int right = k < m.sites - 1 ? int((b >> (k + 1)) & 1)
                                            : (periodic ? int(b & 1) : 0);
                double a = m.rabi * double(left + right);
                if (a != 0) terms_.push_back({std::uint32_t(b), std::uint32_t(b ^ (1u << k)), a});
            }
        }
    }

    // out = H in  (overwrites out)
    void apply(const std::vector<cplx>& in, std::vector<cplx>& out) const {
        out.assign(dim_, {0, 0});
        for (const auto& t : terms_) out[t.dst] += t.amp * in[t.src];
    }

    std::size_t dim() const { return dim_; }
    int sites() const { return sites_; }

  private:
    struct Term {
        std::uint32_t src, dst;
        double amp;
    };
    int sites_;
    std::size_t dim_;
    std::vector<Term> terms_;
};

inline ConstraintHamiltonian build_constraint_hamiltonian(const ChainModel& m) {
    return ConstraintHamiltonian(m);
}

struct JumpEvent {
    double time;
    int site;
};

struct QjmcTrajectory {
    std::vector<double> times;
    std::vector<double> density; // <n>(t) of the normalized state
    std::vector<JumpEvent> jumps;
};

namespace detail {

// drift of the unnormalized state: dpsi/dt = -i H psi - (kappa/2) N_up psi
struct QjmcDrift {
    const ConstraintHamiltonian* h;
    double kappa;
    mutable std::vector<cplx> scratch;

    void operator()(const std::vector<cplx>& psi, std::vector<cplx>& dpsi) const {
        h->apply(psi, scratch);
        const cplx mi(0.0, -1.0);
        for (std::size_t b = 0; b < psi.size(); ++b)
            dpsi[b] = mi * scratch[b] - 0.5 * kappa * double(std::popcount(b)) * psi[b];
    }
};

// classic RK4 step of size h, in place
inline void rk4_step(const QjmcDrift& f, std::vector<cplx>& y, double h, std::vector<cplx>& k1,
                     std::vector<cplx>& k2, std::vector<cplx>& k3, std::vector<cplx>& k4,
                     std::vector<cplx>& tmp) {
    const std::size_t n = y.size();
    f(y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    f(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    f(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    f(tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
        y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

} // namespace detail

// Core trajectory loop. Calls on_segment(t0, t1, n0, n1) for every smooth
// piece of the normalized density (segments never straddle a jump) and
// on_grid(index, n) at every requested grid time.
template <typename OnGrid, typename OnSegment>
void qjmc_run(const ChainModel& m, const ConstraintHamiltonian& h, const PureState& initial,
              const std::vector<double>& t_grid, Rng& rng, std::vector<JumpEvent>* jumps,
              OnGrid&& on_grid, OnSegment&& on_segment) {
    m.validate();
    if (initial.sites != m.sites)
        throw std::invalid_argument("qjmc_run: initial state size mismatch");
    const double jump_time_tol = 1e-6; // us
    const double scale = std::max(m.rabi, m.decay);
    const double dt_max = scale > 0 ? 0.01 / scale : 0.1;

    std::vector<cplx> psi = initial.amp;
    {
        double n2 = 0;
        for (auto& a : psi) n2 += std::norm(a);
        if (!(n2 > 0)) throw std::invalid_argument("qjmc_run: initial state has zero norm");
        double inv = 1.0 / std::sqrt(n2);
        for (auto& a : psi) a *= inv;
    }

    detail::QjmcDrift drift{&h, m.decay, std::vector<cplx>(h.dim())};
    std::vector<cplx> k1(h.dim()), k2(h.dim()), k3(h.dim()), k4(h.dim()), tmp(h.dim()),
        saved(h.dim());

    auto norm2_of = [](const std::vector<cplx>& v) {
        double s = 0;
        for (const auto& a : v) s += std::norm(a);
        return s;
    };
    auto density_of = [&](const std::vector<cplx>& v) {
        double s = 0, n2 = 0;
        for (std::size_t b = 0; b < v.size(); ++b) {
            double w = std::norm(v[b]);
            s += w * double(std::popcount(b));
            n2 += w;
        }
        return n2 > 0 ? s / (n2 * double(m.sites)) : 0.0;
    };

    double t = 0;
    double threshold = rng.uniform();
    double norm2 = 1.0;

    for (std::size_t gi = 0; gi < t_grid.size(); ++gi) {
        double tq = t_grid[gi];
        if (tq < t) throw std::invalid_argument("qjmc_run: t_grid must be non-decreasing");
        while (t < tq) {
            double h_step = std::min(dt_max, tq - t);
            saved = psi;
            double n_before = density_of(psi);
            detail::rk4_step(drift, psi, h_step, k1, k2, k3, k4, tmp);
            double norm2_new = norm2_of(psi);
            if (norm2_new > threshold) {
                on_segment(t, t + h_step, n_before, density_of(psi));
                t += h_step;
                norm2 = norm2_new;
                continue;
            }
            // jump inside (t, t+h]: bisect the crossing time
            double lo = 0, hi = h_step;
            while (hi - lo > jump_time_tol) {
                double mid = 0.5 * (lo + hi);
                psi = saved;
                detail::rk4_step(drift, psi, mid, k1, k2, k3, k4, tmp);
                (norm2_of(psi) > threshold ? lo : hi) = mid;
            }
            psi = saved;
            if (hi > 0) detail::rk4_step(drift, psi, hi, k1, k2, k3, k4, tmp);
            on_segment(t, t + hi, n_before, density_of(psi));
            t += hi;

            // choose the decaying site with probability ~ <n_k>
            double weights_total = 0;
            std::vector<double> w(m.sites, 0.0);
            for (std::size_t b = 0; b < psi.size(); ++b) {
                double p = std::norm(psi[b]);
                for (int k = 0; k < m.sites; ++k)
                    if ((b >> k) & 1) w[k] += p;
            }
            for (double v : w) weights_total += v;
            if (weights_total <= 0) {
                // state is (numerically) the vacuum: no jump possible
                threshold = rng.uniform();
                norm2 = norm2_of(psi);
                continue;
            }
            double pick = rng.uniform() * weights_total;
            int site = 0;
            for (; site < m.sites - 1; ++site) {
                pick -= w[site];
                if (pick < 0) break;
            }
            // apply sigma^-_site and renormalize
            const std::size_t bit = std::size_t(1) << site;
            for (std::size_t b = 0; b < psi.size(); ++b) {
                if (b & bit) {
                    psi[b ^ bit] = psi[b];
                    psi[b] = 0;
                }
            }
            double n2 = norm2_of(psi);
            double inv = 1.0 / std::sqrt(n2);
            for (auto& a : psi) a *= inv;
            if (jumps) jumps->push_back({t, site});
            threshold = rng.uniform();
            norm2 = 1.0;
        }
        on_grid(gi, density_of(psi));
    }
    (void)norm2;
}

inline QjmcTrajectory qjmc_trajectory(const ChainModel& m, const std::vector<double>& t_grid,
                                      Rng& rng, const PureState* initial = nullptr) {
    ConstraintHamiltonian h(m);
    PureState psi0 = initial ? *initial : PureState::basis(m.sites, m.center_seed_state());
    QjmcTrajectory traj;
    traj.times = t_grid;
    traj.density.assign(t_grid.size(), 0.0);
    qjmc_run(m, h, psi0, t_grid, rng, &traj.jumps,
             [&](std::size_t gi, double n) { traj.density[gi] = n; },
             [](double, double, double, double) {});
    return traj;
}

struct QjmcHistogram {
    std::vector<double> bin_edges;   // size bins+1, over [0,1]
    std::vector<double> probability; // size bins, sums to 1
    std::vector<double> samples;     // per-trajectory late-time mean density
};

// Steady-state histogram P(n) of the excitation density: each trajectory
// contributes its time-averaged density over the second half of [0, t_end].
inline QjmcHistogram qjmc_histogram(const ChainModel& m, double t_end, std::size_t trajectories,
                                    std::uint64_t seed, int bins = 20, unsigned threads = 0,
                                    const PureState* initial = nullptr) {
    m.validate();
    if (!(t_end > 0)) throw std::invalid_argument("qjmc_histogram: t_end must be > 0");
    if (trajectories < 1) throw std::invalid_argument("qjmc_histogram: trajectories must be >= 1");
    ConstraintHamiltonian h(m);
    PureState psi0 = initial ? *initial : PureState::basis(m.sites, m.center_seed_state());

    const double t_half = 0.5 * t_end;
    std::vector<double> samples(trajectories, 0.0);
    parallel_for(trajectories, threads, [&](std::size_t traj) {
        Rng rng(seed, traj);
        double integral = 0;
        std::vector<double> grid{t_end};
        qjmc_run(m, h, psi0, grid, rng, nullptr, [](std::size_t, double) {},
                 [&](double t0, double t1, double n0, double n1) {
                     // accumulate the part of the trapezoid inside [t_half, t_end]
                     if (t1 <= t_half || t1 == t0) return;
                     double a = std::max(t0, t_half);
                     double na = n0 + (n1 - n0) * (a - t0) / (t1 - t0);
                     integral += 0.5 * (na + n1) * (t1 - a);
                 });
        samples[traj] = integral / (t_end - t_half);
    });

    QjmcHistogram out;
    out.samples = samples;
    out.bin_edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) out.bin_edges[i] = double(i) / bins;
    out.probability.assign(bins, 0.0);
    for (double v : samples) {
        int b = std::min(bins - 1, std::max(0, int(v * bins)));
        out.probability[b] += 1.0;
    }
    for (auto& p : out.probability) p /= double(trajectories);
    return out;
}

} // namespace rydkin
