#pragma once

// Gas geometry: lattice or continuum atom placement, thermal velocities, and
// the cell-list neighbor index used for cutoff interaction sums.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "params.hpp"
#include "rng.hpp"
#include "units.hpp"

namespace rydkin {

enum class GeometryMode { lattice, continuum };
enum class Boundary { open, periodic };

struct CloudSpec {
    // Gaussian cloud: sigma per axis. Cylinder: uniform along x over `length`,
    // uniform disk of `radius` in y-z (the quasi-1D beam geometry).
    enum class Shape { gaussian, cylinder } shape = Shape::gaussian;
    double sigma_x = 1, sigma_y = 1, sigma_z = 1; // um
    double radius = 1, length = 1;                // um
};

struct GasGeometry {
    GeometryMode mode = GeometryMode::lattice;
    int dimension = 1; // d in {1,2,3}
    double lattice_spacing = 1;
    CloudSpec cloud;
    std::size_t atom_count = 1;
    Boundary boundary = Boundary::open;

    void validate() const {
        if (atom_count < 1) throw std::invalid_argument("GasGeometry: atom_count must be >= 1");
        if (dimension < 1 || dimension > 3)
            throw std::invalid_argument("GasGeometry: dimension must be 1, 2 or 3");
        if (mode == GeometryMode::lattice && !(lattice_spacing > 0))
            throw std::invalid_argument("GasGeometry: lattice_spacing must be > 0");
        if (mode == GeometryMode::continuum) {
            if (boundary == Boundary::periodic)
                throw std::invalid_argument("GasGeometry: periodic boundary requires lattice mode");
            if (cloud.shape == CloudSpec::Shape::gaussian) {
                if (!(cloud.sigma_x > 0 && cloud.sigma_y > 0 && cloud.sigma_z > 0))
                    throw std::invalid_argument("GasGeometry: cloud sigmas must be > 0");
            } else if (!(cloud.radius > 0 && cloud.length > 0)) {
                throw std::invalid_argument("GasGeometry: cylinder radius/length must be > 0");
            }
        }
    }

    // lattice grid side lengths (atoms per axis)
    std::array<std::size_t, 3> grid_shape() const {
        std::array<std::size_t, 3> shape{1, 1, 1};
        if (mode != GeometryMode::lattice) return shape;
        std::size_t side = static_cast<std::size_t>(
            std::ceil(std::pow(double(atom_count), 1.0 / dimension) - 1e-9));
        if (side < 1) side = 1;
        for (int a = 0; a < dimension; ++a) shape[a] = side;
        return shape;
    }

    // periodic box lengths (lattice mode only)
    std::array<double, 3> box_lengths() const {
        auto shape = grid_shape();
        return {shape[0] * lattice_spacing, shape[1] * lattice_spacing, shape[2] * lattice_spacing};
    }

    bool periodic() const { return boundary == Boundary::periodic; }
};

// Isotropic thermal velocity with Maxwell-Boltzmann speed statistics scaled
// so that the ensemble mean speed equals `mean_speed`.
inline Vec3 sample_velocity(double mean_speed, Rng& rng) {
    double sigma = mean_speed * std::sqrt(std::numbers::pi / 8.0);
    return {sigma * rng.normal(), sigma * rng.normal(), sigma * rng.normal()};
}

// Draw atom positions (and velocities when mean_speed is set).
// Lattice mode fills a d-dimensional grid row-major; periodic lattices must
// fill the grid completely so minimum-image distances are well defined.
inline SpinConfiguration sample_geometry(const GasGeometry& g, Rng& rng,
                                         std::optional<double> mean_speed = std::nullopt) {
    g.validate();
    SpinConfiguration cfg;
    cfg.excited.assign(g.atom_count, 0);
    cfg.positions.reserve(g.atom_count);

    if (g.mode == GeometryMode::lattice) {
        auto shape = g.grid_shape();
        if (g.periodic() && shape[0] * shape[1] * shape[2] != g.atom_count)
            throw std::invalid_argument(
                "sample_geometry: periodic lattice needs atom_count = side^dimension");
        for (std::size_t i = 0; i < g.atom_count; ++i) {
            std::size_t ix = i % shape[0];
            std::size_t iy = (i / shape[0]) % shape[1];
            std::size_t iz = i / (shape[0] * shape[1]);
            cfg.positions.push_back({double(ix) * g.lattice_spacing,
                                     double(iy) * g.lattice_spacing,
                                     double(iz) * g.lattice_spacing});
        }
    } else if (g.cloud.shape == CloudSpec::Shape::gaussian) {
        for (std::size_t i = 0; i < g.atom_count; ++i) {
            double x = g.dimension >= 1 ? g.cloud.sigma_x * rng.normal() : 0.0;
            double y = g.dimension >= 2 ? g.cloud.sigma_y * rng.normal() : 0.0;
            double z = g.dimension >= 3 ? g.cloud.sigma_z * rng.normal() : 0.0;
            cfg.positions.push_back({x, y, z});
        }
    } else {
        for (std::size_t i = 0; i < g.atom_count; ++i) {
            double x = (rng.uniform() - 0.5) * g.cloud.length;
            // uniform over the disk cross-section
            double r = g.cloud.radius * std::sqrt(rng.uniform());
            double phi = units::two_pi * rng.uniform();
            cfg.positions.push_back({x, r * std::cos(phi), r * std::sin(phi)});
        }
    }

    if (mean_speed) {
        cfg.velocities.reserve(g.atom_count);
        for (std::size_t i = 0; i < g.atom_count; ++i)
            cfg.velocities.push_back(sample_velocity(*mean_speed, rng));
    }
    return cfg;
}

// Cell list over (optionally periodic) space; query returns all atoms within
// `cutoff` of a given atom. Rebuilt wholesale after motion updates.
class NeighborIndex {
  public:
    NeighborIndex() = default;

    NeighborIndex(const std::vector<Vec3>& pos, double cutoff, bool periodic = false,
                  std::array<double, 3> box = {0, 0, 0}) {
        build(pos, cutoff, periodic, box);
    }

    void build(const std::vector<Vec3>& pos, double cutoff, bool periodic = false,
               std::array<double, 3> box = {0, 0, 0}) {
        cutoff_ = cutoff;
        periodic_ = periodic;
        box_ = box;
        const double eps = 1e-12;
        Vec3 lo{0, 0, 0};
        if (periodic_) {
            origin_ = {0, 0, 0};
            for (int a = 0; a < 3; ++a) {
                double len = box_[a] > 0 ? box_[a] : 1.0;
                ncell_[a] = std::max<std::size_t>(1, static_cast<std::size_t>(len / cutoff_));
                cell_len_[a] = len / double(ncell_[a]);
            }
        } else {
            Vec3 hi{0, 0, 0};
            if (!pos.empty()) {
                lo = hi = pos[0];
                for (const auto& p : pos) {
                    lo.x = std::min(lo.x, p.x); hi.x = std::max(hi.x, p.x);
                    lo.y = std::min(lo.y, p.y); hi.y = std::max(hi.y, p.y);
                    lo.z = std::min(lo.z, p.z); hi.z = std::max(hi.z, p.z);
                }
            }
            origin_ = lo;
            double ext[3] = {hi.x - lo.x + eps, hi.y - lo.y + eps, hi.z - lo.z + eps};
            for (int a = 0; a < 3; ++a) {
                // cell length must stay >= cutoff for the +-1 stencil to cover
                ncell_[a] = std::max<std::size_t>(1, static_cast<std::size_t>(ext[a] / cutoff_));
                cell_len_[a] = ext[a] / double(ncell_[a]);
            }
        }
        cells_.assign(ncell_[0] * ncell_[1] * ncell_[2], {});
        cell_of_.resize(pos.size());
        for (std::size_t i = 0; i < pos.size(); ++i) {
            std::size_t c = cell_index(pos[i]);
            cell_of_[i] = c;
            cells_[c].push_back(i);
        }
    }

    // Appends indices of atoms with distance <= cutoff from pos (self included
    // when `self` is in range; callers filter it).
    void within(const Vec3& p, const std::vector<Vec3>& pos, std::vector<std::size_t>& out) const {
        out.clear();
        double r2cut = cutoff_ * cutoff_;
        std::array<long, 3> c = cell_coords(p);
        // distinct in-range cell coordinates per axis (wrapping can alias
        // neighbors when an axis has fewer than 3 cells)
        long coords[3][3];
        int ncoords[3];
        for (int a = 0; a < 3; ++a) {
            ncoords[a] = 0;
            for (long d = -1; d <= 1; ++d) {
                long v = c[a] + d;
                if (periodic_) v = wrap(v, ncell_[a]);
                else if (v < 0 || v >= long(ncell_[a])) continue;
                bool dup = false;
                for (int i = 0; i < ncoords[a]; ++i) dup |= coords[a][i] == v;
                if (!dup) coords[a][ncoords[a]++] = v;
            }
        }
        for (int iz = 0; iz < ncoords[2]; ++iz)
            for (int iy = 0; iy < ncoords[1]; ++iy)
                for (int ix = 0; ix < ncoords[0]; ++ix) {
                    std::size_t cell = (std::size_t(coords[2][iz]) * ncell_[1] +
                                        std::size_t(coords[1][iy])) * ncell_[0] +
                                       std::size_t(coords[0][ix]);
                    for (std::size_t j : cells_[cell])
                        if (distance2(p, pos[j]) <= r2cut) out.push_back(j);
                }
    }

    // squared distance honoring minimum image when periodic
    double distance2(const Vec3& a, const Vec3& b) const {
        double d[3] = {a.x - b.x, a.y - b.y, a.z - b.z};
        if (periodic_) {
            for (int ax = 0; ax < 3; ++ax) {
                if (box_[ax] <= 0) continue;
                d[ax] -= box_[ax] * std::round(d[ax] / box_[ax]);
            }
        }
        return d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    }

    double cutoff() const { return cutoff_; }

  private:
    static long wrap(long v, std::size_t n) {
        long m = static_cast<long>(n);
        return ((v % m) + m) % m;
    }
    std::array<long, 3> cell_coords(const Vec3& p) const {
        std::array<long, 3> c;
        double rel[3] = {p.x - origin_.x, p.y - origin_.y, p.z - origin_.z};
        for (int a = 0; a < 3; ++a) {
            long v = static_cast<long>(std::floor(rel[a] / cell_len_[a]));
            if (periodic_) v = wrap(v, ncell_[a]);
            else v = std::clamp(v, 0L, long(ncell_[a]) - 1);
            c[a] = v;
        }
        return c;
    }
    std::size_t cell_index(const Vec3& p) const {
        auto c = cell_coords(p);
        return (std::size_t(c[2]) * ncell_[1] + std::size_t(c[1])) * ncell_[0] + std::size_t(c[0]);
    }

    double cutoff_ = 1;
    bool periodic_ = false;
    std::array<double, 3> box_{0, 0, 0};
    Vec3 origin_{0, 0, 0};
    std::array<std::size_t, 3> ncell_{1, 1, 1};
    std::array<double, 3> cell_len_{1, 1, 1};
    std::vector<std::vector<std::size_t>> cells_;
    std::vector<std::size_t> cell_of_;
};

} // namespace rydkin
