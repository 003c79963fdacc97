#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "rydkin/rng.hpp"
#include "rydkin/stats.hpp"

using namespace rydkin;
using Catch::Approx;

TEST_CASE("Mandel Q", "[stats]") {
    SECTION("Poisson counts are Q = 0 within 0.02 at 1e5 shots") {
        Rng rng(11, 0);
        CountRecord r;
        for (int i = 0; i < 100000; ++i) r.shots.push_back(std::int64_t(rng.poisson(20.0)));
        CHECK(mandel_q(r) == Approx(0.0).margin(0.02));
    }
    SECTION("constant counts sit on the -1 floor") {
        CountRecord r{{7, 7, 7, 7, 7}, ""};
        CHECK(mandel_q(r) == Approx(-1.0).margin(1e-15));
    }
    SECTION("two-point record {0,0,40,40}") {
        CountRecord r{{0, 0, 40, 40}, ""};
        CHECK(mandel_q(r) == Approx(19.0).margin(1e-12));
    }
    SECTION("reordering and duplication leave Q unchanged") {
        CountRecord r{{3, 9, 1, 14, 2, 2, 8}, ""};
        double q0 = mandel_q(r);
        CountRecord shuffled{{14, 2, 8, 3, 2, 9, 1}, ""};
        CHECK(mandel_q(shuffled) == Approx(q0).margin(1e-12));
        CountRecord doubled = r;
        doubled.shots.insert(doubled.shots.end(), r.shots.begin(), r.shots.end());
        CHECK(mandel_q(doubled) == Approx(q0).margin(1e-12));
    }
    SECTION("zero mean is undefined") {
        CountRecord r{{0, 0, 0}, ""};
        CHECK_THROWS_AS(mandel_q(r), undefined_statistic);
        CHECK_THROWS_AS(mandel_q(CountRecord{{}, ""}), std::invalid_argument);
    }
}

TEST_CASE("binomial detection thinning", "[stats]") {
    Rng rng(21, 0);

    SECTION("eta = 1 is the identity") {
        CountRecord r{{5, 0, 12, 3}, "tag"};
        auto t = thin_counts(r, 1.0, rng);
        CHECK(t.shots == r.shots);
        CHECK(t.label == r.label);
    }
    SECTION("thinned Poisson stays Poissonian") {
        CountRecord r;
        for (int i = 0; i < 100000; ++i) r.shots.push_back(std::int64_t(rng.poisson(30.0)));
        auto t = thin_counts(r, 0.4, rng);
        CHECK(mandel_q(t) == Approx(0.0).margin(0.02));
        CHECK(t.shots.size() == r.shots.size());
    }
    SECTION("thinning law Q_obs = eta * Q on a super-Poissonian record") {
        // bursty record: mixture of two Poisson modes
        CountRecord r;
        Rng mk(77, 0);
        for (int i = 0; i < 20000; ++i)
            r.shots.push_back(std::int64_t(mk.poisson(mk.uniform() < 0.5 ? 5.0 : 45.0)));
        double q = mandel_q(r);
        const double eta = 0.4;
        const int reps = 300;
        double sum = 0, sum2 = 0;
        for (int k = 0; k < reps; ++k) {
            Rng tr(500 + k, 0);
            double qt = mandel_q(thin_counts(r, eta, tr));
            sum += qt;
            sum2 += qt * qt;
        }
        double mean = sum / reps;
        double se = std::sqrt((sum2 / reps - mean * mean) / (reps - 1));
        CHECK(std::abs(mean - eta * q) < 3 * se + 1e-3);
    }
    SECTION("invalid efficiency") {
        CountRecord r{{1}, ""};
        CHECK_THROWS_AS(thin_counts(r, 0.0, rng), std::invalid_argument);
        CHECK_THROWS_AS(thin_counts(r, 1.5, rng), std::invalid_argument);
    }
}

TEST_CASE("bimodal seed model", "[stats]") {
    SECTION("many seeds: single avalanche peak") {
        auto pred = bimodal_predict({0.0, 40.0, 60.0, 0.4});
        CHECK(pred.mean == Approx(40.0).margin(1e-8));
        CHECK(pred.q == Approx(-1.0).margin(1e-8));
    }
    SECTION("no seeds with n1 > 0: delta peak at n1") {
        auto pred = bimodal_predict({3.0, 40.0, 0.0, 0.4});
        CHECK(pred.mean == Approx(3.0));
        CHECK(pred.q == Approx(-1.0).margin(1e-12));
    }
    SECTION("alpha = 1/2 two-point example") {
        double eta = 0.4;
        double seeds = eta * std::log(2.0); // alpha = exp(-seeds/eta) = 1/2
        auto pred = bimodal_predict({0.0, 40.0, seeds, eta});
        CHECK(pred.mean == Approx(20.0).margin(1e-12));
        CHECK(pred.q == Approx(19.0).margin(1e-11));
    }
    SECTION("algebraic identity against mandel_q on the matching two-point sample") {
        // alpha = 1/4: record with one shot at n1 and three at n2
        double eta = 0.5;
        double seeds = -eta * std::log(0.25);
        auto pred = bimodal_predict({2.0, 10.0, seeds, eta});
        CountRecord r{{2, 10, 10, 10}, ""};
        CHECK(pred.mean == Approx(r.mean()).margin(1e-12));
        CHECK(pred.q == Approx(mandel_q(r)).margin(1e-12));
    }
    SECTION("zero mean undefined") {
        CHECK_THROWS_AS(bimodal_predict({0.0, 40.0, 0.0, 0.4}), undefined_statistic);
    }
    SECTION("Q versus seed number: rises to a small-seed maximum, then falls to -1") {
        BimodalParams b{1.0, 40.0, 0.0, 0.4};
        double best_q = -2, best_s = 0;
        std::vector<double> grid;
        for (double s = 0.01; s <= 20.0; s += 0.01) grid.push_back(s);
        for (double s : grid) {
            b.mean_seeds = s;
            double q = bimodal_predict(b).q;
            if (q > best_q) {
                best_q = q;
                best_s = s;
            }
        }
        CHECK(best_q > 0);
        CHECK(best_s < 2.0); // the maximum sits at small seed numbers
        b.mean_seeds = 20.0;
        CHECK(bimodal_predict(b).q == Approx(-1.0).margin(1e-6));
        b.mean_seeds = 0.01;
        CHECK(bimodal_predict(b).q < best_q);
    }
}

TEST_CASE("growth rate extraction", "[stats]") {
    SECTION("linear data gives the exact constant rate") {
        std::vector<double> t, n;
        for (int i = 0; i < 50; ++i) {
            t.push_back(0.5 * i);
            n.push_back(3.0 * 0.5 * i + 2.0);
        }
        auto pts = growth_rate_curve(t, n, 7.0, 5, 1000.0);
        REQUIRE(!pts.empty());
        for (const auto& p : pts) CHECK(p.rate == Approx(3.0 / 7.0).margin(1e-12));
    }
    SECTION("exponential saturation: early rate recovers Gamma within 2%") {
        double gamma = 0.5, ng = 100;
        std::vector<double> t, n;
        for (int i = 0; i < 400; ++i) {
            t.push_back(0.002 * i);
            n.push_back(ng * (1.0 - std::exp(-gamma * 0.002 * i)));
        }
        auto pts = growth_rate_curve(t, n, ng, 5, 1000.0);
        REQUIRE(!pts.empty());
        CHECK(pts.front().rate == Approx(gamma).epsilon(0.02));
    }
    SECTION("commutes with uniform time shifts") {
        std::vector<double> t, n;
        for (int i = 0; i < 30; ++i) {
            t.push_back(0.1 * i);
            n.push_back(5.0 + i * i * 0.03);
        }
        auto a = growth_rate_curve(t, n, 10.0, 3, 500.0);
        for (auto& x : t) x += 123.0;
        auto b = growth_rate_curve(t, n, 10.0, 3, 500.0);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].rate == Approx(b[i].rate).margin(1e-12));
            CHECK(a[i].spacing == Approx(b[i].spacing).margin(1e-12));
        }
    }
    SECTION("validation") {
        std::vector<double> t{0, 1, 2}, n{1, 2, 3};
        CHECK_THROWS_AS(growth_rate_curve(t, n, 1.0, 5, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(growth_rate_curve(t, n, 1.0, 4, 1.0), std::invalid_argument);
    }
}

TEST_CASE("power-law fit", "[stats]") {
    SECTION("exact linear data recovers beta = 1 and the exact critical point") {
        std::vector<std::pair<double, double>> pts;
        double wc = 0.31;
        for (int i = 0; i < 40; ++i) {
            double w = 0.1 + 0.02 * i;
            pts.push_back({w, w > wc ? (w - wc) : 0.0});
        }
        auto fit = fit_powerlaw_beta(pts);
        CHECK(fit.beta == Approx(1.0).margin(1e-6));
        CHECK(fit.omega_c == Approx(wc).margin(1e-6));
        CHECK(fit.goodness > 0.999999);
    }
    SECTION("synthetic DP-like data with 1% noise") {
        Rng rng(8, 0);
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < 40; ++i) {
            double w = 0.05 + (0.30 - 0.05) * i / 39.0;
            double n = w > 0.08 ? 2.0 * std::pow(w - 0.08, 0.27) : 0.0;
            n *= 1.0 + 0.01 * rng.normal();
            pts.push_back({w, std::max(0.0, n)});
        }
        auto fit = fit_powerlaw_beta(pts);
        CHECK(fit.beta == Approx(0.27).margin(0.03));
        CHECK(fit.omega_c == Approx(0.08).margin(0.005));
    }
    SECTION("scale equivariance") {
        Rng rng(9, 0);
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < 30; ++i) {
            double w = 0.1 + 0.01 * i;
            double n = w > 0.15 ? std::pow(w - 0.15, 0.4) * (1 + 0.005 * rng.normal()) : 0.0;
            pts.push_back({w, n});
        }
        auto f1 = fit_powerlaw_beta(pts);
        for (auto& p : pts) p.second *= 17.0;
        auto f2 = fit_powerlaw_beta(pts);
        CHECK(f1.beta == Approx(f2.beta).margin(1e-9));
        CHECK(f1.omega_c == Approx(f2.omega_c).margin(1e-9));
        CHECK(f1.goodness == Approx(f2.goodness).margin(1e-9));
    }
    SECTION("failure paths") {
        std::vector<std::pair<double, double>> few{{0.1, 0.0}, {0.2, 0.1}};
        CHECK_THROWS_AS(fit_powerlaw_beta(few), numeric_error);
        std::vector<std::pair<double, double>> zeros;
        for (int i = 0; i < 10; ++i) zeros.push_back({0.1 + 0.01 * i, 0.0});
        CHECK_THROWS_AS(fit_powerlaw_beta(zeros), numeric_error);
    }
}

TEST_CASE("collapse checks", "[stats]") {
    SECTION("identical curves collapse to zero deviation") {
        CollapseCurve a;
        for (int i = 1; i <= 20; ++i) {
            a.times.push_back(0.1 * i);
            a.values.push_back(std::sqrt(0.1 * i));
        }
        a.label = 1.0;
        CollapseCurve b = a; // same curve, same label
        auto res = collapse_check({a, b}, CollapseMode::incoherent_rescale, 1.0);
        CHECK(res.max_deviation == Approx(0.0).margin(1e-14));
    }
    SECTION("rescaling brings Omega and Omega/2 onto one curve") {
        // N(t) = f(t * Omega^2 / gamma) with f(x) = 1 - exp(-x)
        double gamma = 2.0;
        auto make = [&](double omega) {
            CollapseCurve c;
            c.label = omega;
            for (int i = 1; i <= 40; ++i) {
                double tau = 0.05 * i;
                c.times.push_back(tau * gamma / (omega * omega));
                c.values.push_back(1.0 - std::exp(-tau));
            }
            return c;
        };
        auto res = collapse_check({make(1.0), make(0.5)}, CollapseMode::incoherent_rescale, gamma);
        CHECK(res.max_deviation < 1e-12);
        // without rescaling (labels equal) the curves disagree badly
        auto c1 = make(1.0), c2 = make(0.5);
        c2.label = 1.0;
        auto bad = collapse_check({c1, c2}, CollapseMode::incoherent_rescale, gamma);
        CHECK(bad.max_deviation > 0.1);
    }
    SECTION("blockade-scaling exponent from a pure power law") {
        CollapseCurve c;
        for (int i = 0; i < 60; ++i) {
            double t = std::pow(10.0, -1.0 + 0.05 * i);
            c.times.push_back(t);
            c.values.push_back(3.0 * std::pow(t, 1.0 / 13.0));
        }
        auto res = collapse_check({c}, CollapseMode::blockade_scaling);
        REQUIRE(res.exponent.has_value());
        CHECK(*res.exponent == Approx(1.0 / 13.0).margin(1e-9));
    }
}
