#pragma once

// Dense Lindblad integration for small systems (N <= 6). Used as the exact
// oracle against both the classical KMC limit and the quantum-jump sampler.
//
// Master equation:
//   drho/dt = -i[H,rho] + kappa sum_k D[sigma^-_k] rho + 2 gamma sum_k D[n_k] rho
// with H either the full gas Hamiltonian
//   H = Omega/2 sum_k sigma_x^k + Delta sum_k n_k + sum_{k<m} V_km n_k n_m
// or the facilitation-constrained chain H = Omega sum_k (n_{k-1}+n_{k+1}) sigma_x^k.
//
// Every Hamiltonian handled here has the form H = diag + sum_k A_k sigma_x^k
// with [A_k, sigma_x^k] = 0, so the action is applied bitwise instead of via
// dense matrix products.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "ode.hpp"
#include "params.hpp"

namespace rydkin {

using cplx = std::complex<double>;

inline constexpr int dense_site_limit = 6;

struct LindbladModel {
    int sites = 0;
    std::vector<double> diag;             // H diagonal, indexed by basis state
    std::vector<std::vector<double>> amp; // amp[k][b]: sigma_x^k amplitude (independent of bit k)
    double decay = 0;                     // kappa
    double dephasing = 0;                 // gamma (0 allowed)

    std::size_t dim() const { return std::size_t(1) << sites; }
};

// Full gas model at fixed atom positions.
inline LindbladModel dense_gas_model(const PhysicalParams& p, const std::vector<Vec3>& positions) {
    p.validate();
    int n = static_cast<int>(positions.size());
    if (n < 1 || n > dense_site_limit)
        throw capacity_error("dense_gas_model: needs 1.." + std::to_string(dense_site_limit) +
                             " atoms, got " + std::to_string(n));
    LindbladModel m;
    m.sites = n;
    m.decay = p.decay;
    m.dephasing = p.dephasing;
    std::size_t dim = m.dim();
    m.diag.assign(dim, 0.0);
    for (std::size_t b = 0; b < dim; ++b) {
        double d = p.detuning * double(std::popcount(b));
        for (int k = 0; k < n; ++k)
            for (int q = k + 1; q < n; ++q)
                if (((b >> k) & 1) && ((b >> q) & 1)) {
                    double r2 = dist2(positions[k], positions[q]);
                    double r6 = r2 * r2 * r2;
                    d += p.c6 / r6;
                }
        m.diag[b] = d;
    }
    m.amp.assign(n, std::vector<double>(dim, p.rabi / 2.0));
    return m;
}

// Facilitation-constrained chain (dephasing-free), for the QJMC cross-check.
inline LindbladModel dense_chain_model(int sites, double rabi, double decay,
                                       bool periodic = false) {
    if (sites < 1 || sites > dense_site_limit)
        throw capacity_error("dense_chain_model: needs 1.." + std::to_string(dense_site_limit) +
                             " sites, got " + std::to_string(sites));
    LindbladModel m;
    m.sites = sites;
    m.decay = decay;
    m.dephasing = 0;
    std::size_t dim = m.dim();
    m.diag.assign(dim, 0.0);
    m.amp.assign(sites, std::vector<double>(dim, 0.0));
    for (int k = 0; k < sites; ++k)
        for (std::size_t b = 0; b < dim; ++b) {
            int left = k > 0 ? int((b >> (k - 1)) & 1) : (periodic ? int((b >> (sites - 1)) & 1) : 0);
            int right = k < sites - 1 ? int((b >> (k + 1)) & 1) : (periodic ? int(b & 1) : 0);
            m.amp[k][b] = rabi * double(left + right);
        }
    return m;
}

struct DenseDensityMatrix {
    int sites = 0;
    std::vector<cplx> rho; // row-major dim x dim

    std::size_t dim() const { return std::size_t(1) << sites; }
    cplx& at(std::size_t i, std::size_t j) { return rho[i * dim() + j]; }
    const cplx& at(std::size_t i, std::size_t j) const { return rho[i * dim() + j]; }

    static DenseDensityMatrix basis_state(int sites, std::uint64_t b) {
        DenseDensityMatrix r;
        r.sites = sites;
        r.rho.assign((std::size_t(1) << sites) * (std::size_t(1) << sites), {0, 0});
        r.at(b, b) = 1.0;
        return r;
    }
    static DenseDensityMatrix vacuum(int sites) { return basis_state(sites, 0); }
    static DenseDensityMatrix all_excited(int sites) {
        return basis_state(sites, (std::uint64_t(1) << sites) - 1);
    }

    double trace_real() const {
        double t = 0;
        for (std::size_t i = 0; i < dim(); ++i) t += at(i, i).real();
        return t;
    }
    double hermiticity_error() const {
        double e = 0;
        for (std::size_t i = 0; i < dim(); ++i)
            for (std::size_t j = i; j < dim(); ++j)
                e = std::max(e, std::abs(at(i, j) - std::conj(at(j, i))));
        return e;
    }
    double site_occupation(int k) const {
        double v = 0;
        for (std::size_t b = 0; b < dim(); ++b)
            if ((b >> k) & 1) v += at(b, b).real();
        return v;
    }
    double mean_density() const {
        double v = 0;
        for (std::size_t b = 0; b < dim(); ++b) v += double(std::popcount(b)) * at(b, b).real();
        return v / double(sites);
    }
};

struct LindbladSeries {
    std::vector<double> times;
    std::vector<double> mean_density;             // <n>(t), per-atom
    std::vector<std::vector<double>> site_occ;    // [time][site]
    std::vector<double> trace_deviation;          // |Tr rho - 1|
    DenseDensityMatrix final_state;
};

namespace detail {

inline void lindblad_rhs(const LindbladModel& m, const std::vector<cplx>& rho,
                         std::vector<cplx>& out) {
    const std::size_t dim = m.dim();
    const int n = m.sites;
    const double kappa = m.decay;
    const double gamma = m.dephasing;
    const cplx mi(0.0, -1.0);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const cplx rij = rho[i * dim + j];
            // -i [H, rho]
            cplx h = (m.diag[i] - m.diag[j]) * rij;
            for (int k = 0; k < n; ++k) {
                const std::size_t bit = std::size_t(1) << k;
                h += m.amp[k][i] * rho[(i ^ bit) * dim + j];
                h -= m.amp[k][j] * rho[i * dim + (j ^ bit)];
            }
            cplx d = mi * h;
            // decay: sum_k sigma- rho sigma+ - (n_k(i)+n_k(j))/2 rho
            if (kappa > 0) {
                double pops = 0;
                for (int k = 0; k < n; ++k) {
                    const std::size_t bit = std::size_t(1) << k;
                    if (!(i & bit) && !(j & bit)) d += kappa * rho[(i | bit) * dim + (j | bit)];
                    pops += double(((i >> k) & 1) + ((j >> k) & 1));
                }
                d -= 0.5 * kappa * pops * rij;
            }
            // dephasing: coherences decay at gamma per differing bit
            if (gamma > 0) d -= gamma * double(std::popcount(i ^ j)) * rij;
            out[i * dim + j] = d;
        }
    }
}

} // namespace detail

// Integrates the master equation, reporting observables on t_grid (which must
// be non-decreasing, starting at >= 0; evolution starts at t = 0).
inline LindbladSeries dense_lindblad_evolve(const LindbladModel& m, DenseDensityMatrix rho0,
                                            const std::vector<double>& t_grid,
                                            const OdeOptions& opt = {.rtol = 1e-9, .atol = 1e-13}) {
    if (m.sites != rho0.sites)
        throw std::invalid_argument("dense_lindblad_evolve: model/state size mismatch");
    LindbladSeries out;
    auto rhs = [&m](double, const std::vector<cplx>& y, std::vector<cplx>& dydt) {
        detail::lindblad_rhs(m, y, dydt);
    };
    double t = 0;
    for (double tq : t_grid) {
        if (tq < t) throw std::invalid_argument("dense_lindblad_evolve: t_grid must be non-decreasing");
        integrate_adaptive(rhs, rho0.rho, t, tq, opt);
        t = tq;
        out.times.push_back(tq);
        out.mean_density.push_back(rho0.mean_density());
        std::vector<double> occ(m.sites);
        for (int k = 0; k < m.sites; ++k) occ[k] = rho0.site_occupation(k);
        out.site_occ.push_back(std::move(occ));
        double tr = rho0.trace_real();
        out.trace_deviation.push_back(std::abs(tr - 1.0));
        if (std::abs(tr - 1.0) > 1e-6)
            throw numeric_error("dense_lindblad_evolve: trace drifted to " + std::to_string(tr));
    }
    out.final_state = std::move(rho0);
    return out;
}

// Closed-form steady state of the driven, damped, dephased two-level atom.
// Used as an oracle for the single-atom limit.
inline double optical_bloch_excited_fraction(double rabi, double detuning, double dephasing,
                                             double decay) {
    double gcoh = dephasing + decay / 2.0; // total coherence decay rate
    double g = 0.5 * rabi * rabi * gcoh / (detuning * detuning + gcoh * gcoh);
    return g / (2.0 * g + decay);
}

} // namespace rydkin
