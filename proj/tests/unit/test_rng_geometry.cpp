#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "rydkin/geometry.hpp"
#include "rydkin/rng.hpp"

using namespace rydkin;
using Catch::Approx;

TEST_CASE("rng determinism and stream separation", "[rng]") {
    Rng a(42, 7), b(42, 7), c(42, 8);
    bool same = true, differ = false;
    for (int i = 0; i < 1000; ++i) {
        auto va = a.next_u64();
        same &= va == b.next_u64();
        differ |= va != c.next_u64();
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("sampler moments", "[rng]") {
    Rng rng(123, 0);
    const int n = 100000;

    SECTION("uniform") {
        double s = 0;
        for (int i = 0; i < n; ++i) {
            double u = rng.uniform();
            REQUIRE(u >= 0.0);
            REQUIRE(u < 1.0);
            s += u;
        }
        CHECK(s / n == Approx(0.5).margin(0.005));
    }
    SECTION("exponential mean 1/lambda within 1% over 1e5 draws") {
        double lambda = 3.0, s = 0;
        for (int i = 0; i < n; ++i) s += rng.exponential(lambda);
        CHECK(s / n == Approx(1.0 / lambda).epsilon(0.01));
    }
    SECTION("normal") {
        double s = 0, s2 = 0;
        for (int i = 0; i < n; ++i) {
            double x = rng.normal();
            s += x;
            s2 += x * x;
        }
        CHECK(s / n == Approx(0.0).margin(0.02));
        CHECK(s2 / n == Approx(1.0).margin(0.03));
    }
    SECTION("poisson, including the chunked large-mean path") {
        for (double mean : {6.0, 100.0}) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += double(rng.poisson(mean));
            CHECK(s / n == Approx(mean).margin(3 * std::sqrt(mean / n)));
        }
    }
    SECTION("binomial") {
        double s = 0;
        for (int i = 0; i < n; ++i) s += double(rng.binomial(40, 0.4));
        CHECK(s / n == Approx(16.0).margin(3 * std::sqrt(40 * 0.4 * 0.6 / n)));
    }
}

TEST_CASE("choose draws distinct indices", "[rng]") {
    Rng rng(5, 0);
    std::vector<std::size_t> pool{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    auto got = rng.choose(pool, 4);
    CHECK(got.size() == 4);
    CHECK(std::set<std::size_t>(got.begin(), got.end()).size() == 4);
    auto all = rng.choose(pool, 25); // capped at pool size
    CHECK(all.size() == pool.size());
}

TEST_CASE("lattice sampling", "[geometry]") {
    GasGeometry g;
    g.mode = GeometryMode::lattice;
    g.dimension = 1;
    g.atom_count = 5;
    g.lattice_spacing = 1.0;
    Rng rng(1, 0);
    auto cfg = sample_geometry(g, rng);
    REQUIRE(cfg.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(cfg.positions[i].x == Approx(double(i)));
        CHECK(cfg.positions[i].y == 0.0);
    }

    g.dimension = 2;
    g.atom_count = 9;
    g.lattice_spacing = 2.0;
    auto cfg2 = sample_geometry(g, rng);
    CHECK(cfg2.positions[4].x == Approx(2.0)); // row-major 3x3
    CHECK(cfg2.positions[4].y == Approx(2.0));

    g.boundary = Boundary::periodic;
    g.atom_count = 8; // not a 2D square
    CHECK_THROWS_AS(sample_geometry(g, rng), std::invalid_argument);
}

TEST_CASE("continuum sampling statistics", "[geometry]") {
    Rng rng(99, 0);
    GasGeometry g;
    g.mode = GeometryMode::continuum;
    g.dimension = 3;
    g.atom_count = 100000;
    g.cloud.shape = CloudSpec::Shape::gaussian;
    g.cloud.sigma_x = g.cloud.sigma_y = g.cloud.sigma_z = 1.0;
    auto cfg = sample_geometry(g, rng);
    double sx = 0, sx2 = 0;
    for (const auto& p : cfg.positions) {
        sx += p.x;
        sx2 += p.x * p.x;
    }
    double n = double(cfg.size());
    double var = sx2 / n - (sx / n) * (sx / n);
    CHECK(std::sqrt(var) == Approx(1.0).epsilon(0.01)); // law of large numbers

    SECTION("cylinder stays inside its envelope") {
        g.cloud.shape = CloudSpec::Shape::cylinder;
        g.cloud.radius = 0.5;
        g.cloud.length = 60;
        g.atom_count = 5000;
        auto cyl = sample_geometry(g, rng);
        for (const auto& p : cyl.positions) {
            CHECK(std::abs(p.x) <= 30.0);
            CHECK(p.y * p.y + p.z * p.z <= 0.25 + 1e-12);
        }
    }
}

TEST_CASE("thermal velocities reproduce the mean speed", "[geometry]") {
    Rng rng(7, 0);
    GasGeometry g;
    g.mode = GeometryMode::continuum;
    g.dimension = 3;
    g.atom_count = 100000;
    auto cfg = sample_geometry(g, rng, 0.11);
    REQUIRE(cfg.velocities.size() == cfg.size());
    double s = 0;
    for (const auto& v : cfg.velocities) s += std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
    CHECK(s / double(cfg.size()) == Approx(0.11).epsilon(0.02));
}

TEST_CASE("neighbor index agrees with brute force", "[geometry]") {
    Rng rng(2024, 0);
    const std::size_t n = 300;
    std::vector<Vec3> pos;
    for (std::size_t i = 0; i < n; ++i)
        pos.push_back({10 * rng.uniform(), 10 * rng.uniform(), 10 * rng.uniform()});

    auto check_against_brute = [&](bool periodic, std::array<double, 3> box, double cutoff) {
        NeighborIndex idx(pos, cutoff, periodic, box);
        std::vector<std::size_t> got;
        for (std::size_t k = 0; k < n; k += 17) {
            idx.within(pos[k], pos, got);
            std::set<std::size_t> fast(got.begin(), got.end());
            std::set<std::size_t> brute;
            for (std::size_t j = 0; j < n; ++j)
                if (idx.distance2(pos[k], pos[j]) <= cutoff * cutoff) brute.insert(j);
            CHECK(fast == brute);
        }
    };
    check_against_brute(false, {0, 0, 0}, 1.7);
    check_against_brute(false, {0, 0, 0}, 25.0); // cutoff beyond the box
    check_against_brute(true, {10, 10, 10}, 1.7);
    check_against_brute(true, {10, 10, 10}, 4.9); // fewer than 3 cells per axis
}

TEST_CASE("minimum-image distance", "[geometry]") {
    NeighborIndex idx({}, 1.0, true, {10, 10, 10});
    CHECK(idx.distance2({0.5, 0, 0}, {9.5, 0, 0}) == Approx(1.0));
    CHECK(idx.distance2({1, 1, 1}, {9, 9, 9}) == Approx(12.0));
}
