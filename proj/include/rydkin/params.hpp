#pragma once

// Physical parameters of the driven-dissipative Rydberg gas and the derived
// length/rate scales of the strongly dephased (incoherent) limit.
//
// Sign convention: the effective detuning seen by atom k is
//     delta_eff = detuning - shift_k,    shift_k = sum C6 / r^6 >= 0,
// so a positive (blue) detuning is compensated by the repulsive van der Waals
// shift; facilitation happens where shift == detuning.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "errors.hpp"

namespace rydkin {

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

inline double dist2(const Vec3& a, const Vec3& b) {
    double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

struct PhysicalParams {
    double rabi = 0;          // Omega, rad/us
    double detuning = 0;      // Delta, rad/us; >0 compensates repulsive C6
    double dephasing = 0;     // gamma, rad/us; must be > 0
    double decay = 0;         // kappa, 1/us
    double c6 = 0;            // rad um^6/us
    double detection_eff = 1; // eta in (0,1]

    void validate() const {
        if (!(dephasing > 0)) throw std::invalid_argument("PhysicalParams: dephasing must be > 0");
        if (rabi < 0) throw std::invalid_argument("PhysicalParams: rabi must be >= 0");
        if (decay < 0) throw std::invalid_argument("PhysicalParams: decay must be >= 0");
        if (!(detection_eff > 0 && detection_eff <= 1))
            throw std::invalid_argument("PhysicalParams: detection_eff must be in (0,1]");
        if (c6 < 0) throw std::invalid_argument("PhysicalParams: c6 must be >= 0");
    }

    // same bath, different drive (used by protocol segments)
    PhysicalParams with_drive(double new_rabi, double new_detuning) const {
        PhysicalParams p = *this;
        p.rabi = new_rabi;
        p.detuning = new_detuning;
        return p;
    }
};

struct TwoPhotonParams {
    double rabi_420 = 0;    // rad/us
    double rabi_1013 = 0;   // rad/us
    double detuning_6p = 0; // rad/us, nonzero
};

// Omega = Omega_420 * Omega_1013 / (2 |Delta_6P|)
inline double two_photon_rabi(const TwoPhotonParams& tp) {
    if (tp.detuning_6p == 0)
        throw std::invalid_argument("two_photon_rabi: intermediate-state detuning must be nonzero");
    return std::sqrt(tp.rabi_420 * tp.rabi_420 * tp.rabi_1013 * tp.rabi_1013 /
                     (4.0 * tp.detuning_6p * tp.detuning_6p));
}

// Incoherent single-atom flip rate at a given interaction shift:
//     Gamma = (Omega^2 / 2 gamma) / (1 + ((Delta - shift)/gamma)^2)
// Maximal (= Omega^2/2gamma) when the shift matches the detuning.
inline double flip_rate(const PhysicalParams& p, double shift) {
    double x = (p.detuning - shift) / p.dephasing;
    return p.rabi * p.rabi / (2.0 * p.dephasing) / (1.0 + x * x);
}

struct DerivedScales {
    double blockade_radius = 0;                        // R = (C6/gamma)^(1/6), um
    std::optional<double> facilitation_radius;         // r_fac = (C6/Delta)^(1/6), um
    std::optional<double> facilitation_shell_width;    // gamma r_fac / (6 Delta), um
    double rate_fac = 0;                               // Omega^2/2gamma, 1/us
    std::optional<double> rate_spon;                   // Omega^2 gamma / 2 Delta^2, 1/us
};

inline DerivedScales derive_scales(const PhysicalParams& p) {
    p.validate();
    DerivedScales s;
    s.blockade_radius = std::pow(p.c6 / p.dephasing, 1.0 / 6.0);
    s.rate_fac = p.rabi * p.rabi / (2.0 * p.dephasing);
    if (p.detuning > 0) {
        double rf = std::pow(p.c6 / p.detuning, 1.0 / 6.0);
        s.facilitation_radius = rf;
        s.facilitation_shell_width = p.dephasing * rf / (6.0 * p.detuning);
        s.rate_spon = s.rate_fac * (p.dephasing / p.detuning) * (p.dephasing / p.detuning);
    }
    return s;
}

// Default interaction cutoff: distance where the pair shift has dropped to
// gamma/100 (relative rate perturbation < 1e-4 beyond it).
inline double default_cutoff(const PhysicalParams& p) {
    return std::pow(100.0 * p.c6 / p.dephasing, 1.0 / 6.0);
}

// Default shift clamp; rates at this shift are ~1e-12 of the resonant rate,
// so clamping only prevents overflow for near-coincident positions.
inline double default_shift_clamp(const PhysicalParams& p) { return 1e6 * p.dephasing; }

struct SpinConfiguration {
    std::vector<std::uint8_t> excited; // n_k in {0,1}
    std::vector<Vec3> positions;       // um
    std::vector<Vec3> velocities;      // um/us; empty unless motion is on

    std::size_t size() const { return excited.size(); }
    std::size_t excited_count() const {
        std::size_t n = 0;
        for (auto e : excited) n += e;
        return n;
    }
    double density() const { return excited.empty() ? 0.0 : double(excited_count()) / double(size()); }
};

// Sum of pair shifts from excited atoms within `cutoff` of atom k, clamped to
// v_max. Open-boundary distances; the KMC engine applies minimum-image
// wrapping itself where periodic.
inline double interaction_shift(const SpinConfiguration& cfg, double c6, std::size_t k,
                                double cutoff, double v_max) {
    if (k >= cfg.size()) throw std::invalid_argument("interaction_shift: atom index out of range");
    if (!(cutoff > 0)) throw std::invalid_argument("interaction_shift: cutoff must be > 0");
    double r2cut = cutoff * cutoff;
    double shift = 0;
    for (std::size_t q = 0; q < cfg.size(); ++q) {
        if (q == k || !cfg.excited[q]) continue;
        double r2 = dist2(cfg.positions[k], cfg.positions[q]);
        if (r2 > r2cut) continue;
        double r6 = r2 * r2 * r2;
        shift += r6 > 0 ? c6 / r6 : v_max;
    }
    return shift < v_max ? shift : v_max;
}

} // namespace rydkin
