#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "rydkin/lindblad.hpp"
#include "rydkin/parallel.hpp"
#include "rydkin/qjmc.hpp"
#include "rydkin/units.hpp"

using namespace rydkin;
using Catch::Approx;

namespace {

// smallest eigenvalue estimate of a Hermitian matrix via power iteration on
// the shifted operator c*I - rho
double min_eigenvalue_estimate(const DenseDensityMatrix& rho) {
    const std::size_t d = rho.dim();
    const double c = 1.5;
    std::vector<cplx> v(d), w(d);
    Rng rng(4242, 0);
    for (auto& x : v) x = {rng.normal(), rng.normal()};
    double lam = 0;
    for (int it = 0; it < 400; ++it) {
        for (std::size_t i = 0; i < d; ++i) {
            cplx acc = c * v[i];
            for (std::size_t j = 0; j < d; ++j) acc -= rho.at(i, j) * v[j];
            w[i] = acc;
        }
        double nrm = 0;
        for (auto& x : w) nrm += std::norm(x);
        nrm = std::sqrt(nrm);
        lam = nrm;
        for (std::size_t i = 0; i < d; ++i) v[i] = w[i] / nrm;
    }
    return c - lam;
}

// classical two-atom master equation (4 configurations) built on the same
// rate kernel; exact reference for the dissipative limit
std::vector<double> classical_two_atom_density(const PhysicalParams& p, double pair_shift,
                                               const std::vector<double>& t_grid) {
    auto up = [&](double shift) { return flip_rate(p, shift); };
    // states 00,01,10,11; index bit0 = atom A, bit1 = atom B
    auto rhs = [&](double, const std::vector<double>& y, std::vector<double>& d) {
        double g0 = up(0), g1 = up(pair_shift), k = p.decay;
        // A flips: 00<->01 at g0 (B ground), 10<->11 at g1 (B excited)
        // plus decay on every excited atom
        d.assign(4, 0.0);
        auto move = [&](int from, int to, double rate) {
            d[from] -= rate * y[from];
            d[to] += rate * y[from];
        };
        move(0, 1, g0);
        move(1, 0, g0 + k);
        move(2, 3, g1);
        move(3, 2, g1 + k);
        move(0, 2, g0);
        move(2, 0, g0 + k);
        move(1, 3, g1);
        move(3, 1, g1 + k);
    };
    std::vector<double> y{1, 0, 0, 0}, out;
    double t = 0;
    for (double tq : t_grid) {
        integrate_adaptive(rhs, y, t, tq, {.rtol = 1e-10, .atol = 1e-14});
        t = tq;
        out.push_back(0.5 * (y[1] + y[2]) + y[3]);
    }
    return out;
}

} // namespace

TEST_CASE("constrained Hamiltonian action", "[qjmc]") {
    ChainModel m{4, 0.7, 0.0, Boundary::open};
    ConstraintHamiltonian h(m);

    SECTION("vacuum is annihilated") {
        std::vector<cplx> in(16, {0, 0}), out;
        in[0] = 1.0;
        h.apply(in, out);
        for (auto& a : out) CHECK(std::abs(a) == 0.0);
    }
    SECTION("two sites: |10> couples only to |11>") {
        ChainModel m2{2, 0.7, 0.0, Boundary::open};
        ConstraintHamiltonian h2(m2);
        std::vector<cplx> in(4, {0, 0}), out;
        in[1] = 1.0; // first site excited
        h2.apply(in, out);
        CHECK(std::abs(out[0]) == 0.0);
        CHECK(std::abs(out[1]) == 0.0);
        CHECK(std::abs(out[2]) == 0.0);
        CHECK(out[3].real() == Approx(0.7));
    }
    SECTION("periodic two-site chain: wrapped neighbor counts twice") {
        ChainModel m2{2, 0.7, 0.0, Boundary::periodic};
        ConstraintHamiltonian h2(m2);
        std::vector<cplx> in(4, {0, 0}), out;
        in[1] = 1.0;
        h2.apply(in, out);
        // site 0's neighbors on a 2-ring are both site 1, which is ground, so
        // |10> does not couple to |00>; site 1 is doubly facilitated by site 0
        CHECK(std::abs(out[0]) == 0.0);
        CHECK(out[3].real() == Approx(2 * 0.7));
    }
    SECTION("Hermitian on random vectors") {
        Rng rng(3, 0);
        std::vector<cplx> u(16), v(16), hu, hv;
        for (int trial = 0; trial < 100; ++trial) {
            for (auto& x : u) x = {rng.normal(), rng.normal()};
            for (auto& x : v) x = {rng.normal(), rng.normal()};
            h.apply(u, hu);
            h.apply(v, hv);
            cplx a = 0, b = 0;
            for (int i = 0; i < 16; ++i) {
                a += std::conj(u[i]) * hv[i];
                b += std::conj(hu[i]) * v[i];
            }
            CHECK(std::abs(a - b) < 1e-12 * (1 + std::abs(a)));
        }
    }
    SECTION("capacity limits") {
        CHECK_THROWS_AS(ConstraintHamiltonian(ChainModel{15, 1.0, 1.0, Boundary::open}),
                        capacity_error);
        CHECK_THROWS_AS(ConstraintHamiltonian(ChainModel{1, 1.0, 1.0, Boundary::open}),
                        capacity_error);
    }
}

TEST_CASE("quantum jumps in the decay-only limit", "[qjmc]") {
    // Omega = 0, single excitation: exactly one jump, waiting ~ Exp(kappa)
    ChainModel m{3, 0.0, 0.5, Boundary::open};
    const int traj = 4000;
    double sum = 0, sum2 = 0;
    int bad = 0;
    for (int i = 0; i < traj; ++i) {
        Rng rng(60, std::uint64_t(i));
        auto res = qjmc_trajectory(m, {40.0}, rng);
        if (res.jumps.size() != 1) {
            ++bad;
            continue;
        }
        sum += res.jumps[0].time;
        sum2 += res.jumps[0].time * res.jumps[0].time;
        CHECK(res.density.back() == 0.0);
    }
    CHECK(bad == 0); // P(no jump by t=40/kappa=20 lifetimes) ~ 2e-9
    double mean = sum / traj;
    double se = std::sqrt((sum2 / traj - mean * mean) / (traj - 1));
    CHECK(std::abs(mean - 1.0 / 0.5) < 3 * se);
}

TEST_CASE("vacuum invariance", "[qjmc][lindblad]") {
    ChainModel m{4, 1.3, 0.4, Boundary::open};
    Rng rng(8, 0);
    PureState vac = PureState::basis(4, 0);
    auto res = qjmc_trajectory(m, {1.0, 5.0, 20.0}, rng, &vac);
    CHECK(res.jumps.empty());
    for (double n : res.density) CHECK(n == 0.0);

    auto dm = dense_lindblad_evolve(dense_chain_model(4, 1.3, 0.4), DenseDensityMatrix::vacuum(4),
                                    {5.0, 20.0});
    for (double n : dm.mean_density) CHECK(std::abs(n) < 1e-12);
}

TEST_CASE("norm is non-increasing between jumps", "[qjmc]") {
    ChainModel m{5, 2.0, 0.7, Boundary::open};
    ConstraintHamiltonian h(m);
    detail::QjmcDrift drift{&h, m.decay, std::vector<cplx>(h.dim())};
    Rng rng(17, 0);
    std::vector<cplx> psi(h.dim());
    for (auto& a : psi) a = {rng.normal(), rng.normal()};
    double n2 = 0;
    for (auto& a : psi) n2 += std::norm(a);
    for (auto& a : psi) a /= std::sqrt(n2);
    std::vector<cplx> k1(h.dim()), k2(h.dim()), k3(h.dim()), k4(h.dim()), tmp(h.dim());
    double prev = 1.0;
    for (int i = 0; i < 400; ++i) {
        detail::rk4_step(drift, psi, 0.004, k1, k2, k3, k4, tmp);
        double cur = 0;
        for (auto& a : psi) cur += std::norm(a);
        CHECK(cur <= prev * (1 + 1e-12));
        prev = cur;
    }
}

TEST_CASE("dense Lindblad limits", "[lindblad]") {
    SECTION("pure decay of the fully excited gas, populations decouple") {
        PhysicalParams p;
        p.rabi = 0;
        p.detuning = units::mhz(3);
        p.dephasing = units::mhz(2);
        p.decay = 0.25;
        p.c6 = units::ghz_um6(869.7);
        std::vector<Vec3> pos{{0, 0, 0}, {4, 0, 0}, {9, 0, 0}};
        auto series = dense_lindblad_evolve(dense_gas_model(p, pos),
                                            DenseDensityMatrix::all_excited(3),
                                            {0.5, 2.0, 6.0, 12.0});
        for (std::size_t i = 0; i < series.times.size(); ++i)
            CHECK(series.mean_density[i] == Approx(std::exp(-0.25 * series.times[i])).margin(1e-8));
    }
    SECTION("single atom reaches the optical Bloch fixed point") {
        PhysicalParams p;
        p.rabi = 1.0;
        p.detuning = 0.0;
        p.dephasing = 50.0;
        p.decay = 0.02;
        p.c6 = 1.0;
        auto series = dense_lindblad_evolve(dense_gas_model(p, {{0, 0, 0}}),
                                            DenseDensityMatrix::vacuum(1), {150.0, 400.0});
        double exact = optical_bloch_excited_fraction(p.rabi, p.detuning, p.dephasing, p.decay);
        CHECK(series.mean_density.back() == Approx(exact).margin(1e-6));
        // dissipative-limit rate picture: Gamma/(2 Gamma + kappa) within 2%
        double g = p.rabi * p.rabi / (2 * p.dephasing);
        CHECK(series.mean_density.back() == Approx(g / (2 * g + p.decay)).epsilon(0.02));
    }
    SECTION("trace, hermiticity and positivity are preserved") {
        PhysicalParams p;
        p.rabi = 2.0;
        p.detuning = 1.5;
        p.dephasing = 1.0;
        p.decay = 0.3;
        p.c6 = 20.0;
        std::vector<Vec3> pos{{0, 0, 0}, {1.3, 0, 0}, {2.9, 0, 0}};
        auto series = dense_lindblad_evolve(dense_gas_model(p, pos),
                                            DenseDensityMatrix::basis_state(3, 0b101), {3.0});
        CHECK(series.trace_deviation.back() < 1e-8);
        CHECK(series.final_state.hermiticity_error() < 1e-10);
        CHECK(min_eigenvalue_estimate(series.final_state) > -1e-6);
    }
    SECTION("capacity limit") {
        PhysicalParams p;
        p.dephasing = 1.0;
        std::vector<Vec3> pos(7, Vec3{});
        CHECK_THROWS_AS(dense_gas_model(p, pos), capacity_error);
    }
}

TEST_CASE("trajectory average matches the dense master equation", "[qjmc][lindblad][slow]") {
    // chain model, several sizes and drives; ensemble mean within 3 SE
    struct Case {
        int sites;
        double rabi, decay;
    };
    Rng pick(1234, 0);
    std::vector<Case> cases;
    for (int sites : {2, 2, 3, 3, 3, 4, 4, 4, 5, 5})
        cases.push_back({sites, 0.3 + 1.2 * pick.uniform(), 0.5 + pick.uniform()});

    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const auto& c = cases[ci];
        ChainModel m{c.sites, c.rabi, c.decay, Boundary::open};
        std::vector<double> grid;
        for (int i = 1; i <= 6; ++i) grid.push_back(0.5 * i);

        auto dense = dense_lindblad_evolve(
            dense_chain_model(c.sites, c.rabi, c.decay),
            DenseDensityMatrix::basis_state(c.sites, m.center_seed_state()), grid);

        const std::size_t traj = 250;
        std::vector<std::vector<double>> samples(traj);
        parallel_for(traj, 0, [&](std::size_t i) {
            Rng rng(9000 + ci, i);
            samples[i] = qjmc_trajectory(m, grid, rng).density;
        });
        for (std::size_t g = 0; g < grid.size(); ++g) {
            double mean = 0, var = 0;
            for (const auto& s : samples) mean += s[g];
            mean /= double(traj);
            for (const auto& s : samples) var += (s[g] - mean) * (s[g] - mean);
            double se = std::sqrt(var / double(traj - 1) / double(traj));
            INFO("case " << ci << " grid " << g);
            CHECK(std::abs(mean - dense.mean_density[g]) < 3 * se + 2e-3);
        }
    }
}

TEST_CASE("dephasing sweep converges to the classical limit", "[lindblad][slow]") {
    // two atoms at 0.9 R; deviation of the dense solution from the classical
    // master equation shrinks monotonically as gamma/Omega grows
    const double omega = 1.0, kappa = 0.05;
    std::vector<double> gammas{1.0, 2.0, 5.0, 15.0, 50.0};
    std::vector<double> devs;
    for (double gamma : gammas) {
        PhysicalParams p;
        p.rabi = omega;
        p.detuning = 0;
        p.dephasing = gamma;
        p.decay = kappa;
        double blockade = 1.8; // um, fixed geometry across the sweep
        p.c6 = gamma * std::pow(blockade, 6) * 0.53; // pair shift fixed at 0.53*gamma*(R/r)^6
        std::vector<Vec3> pos{{0, 0, 0}, {blockade, 0, 0}};
        double pair_shift = p.c6 / std::pow(blockade, 6);

        double gmax = flip_rate(p, 0);
        std::vector<double> grid;
        for (double tau : {0.4, 1.0, 2.0, 4.0}) grid.push_back(tau / gmax);

        auto dense = dense_lindblad_evolve(dense_gas_model(p, pos),
                                           DenseDensityMatrix::vacuum(2), grid);
        auto classical = classical_two_atom_density(p, pair_shift, grid);
        double dev = 0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            dev = std::max(dev, std::abs(dense.mean_density[i] - classical[i]));
        devs.push_back(dev);
    }
    for (std::size_t i = 1; i < devs.size(); ++i) CHECK(devs[i] < devs[i - 1]);
    CHECK(devs.back() < 1e-3);
}

TEST_CASE("steady-state histograms", "[qjmc][slow]") {
    SECTION("weak drive piles up in the lowest bin") {
        ChainModel m{6, 0.3, 1.0, Boundary::open};
        auto hist = qjmc_histogram(m, 12.0, 200, 404, 12);
        double total = 0;
        for (double p : hist.probability) total += p;
        CHECK(total == Approx(1.0).margin(1e-12));
        std::size_t arg = 0;
        for (std::size_t i = 1; i < hist.probability.size(); ++i)
            if (hist.probability[i] > hist.probability[arg]) arg = i;
        CHECK(arg == 0);
    }
}
