#pragma once

// Continuous-time kinetic Monte Carlo for the classical master equation of
// the dephased Rydberg gas: operator-valued flip rates (blockade and
// facilitation constraints), radiative decay, protocol segments (seed pulses,
// off-resonant drive, de-excitation drive, dark times) and optional ballistic
// thermal motion.
//
// Two rate kernels:
//   vdw      flip rate Gamma_k = (Omega^2/2gamma) / (1 + ((Delta - V_k)/gamma)^2)
//            with V_k the C6 shift from excited atoms within the cutoff;
//   contact  the three-process 1D lattice model (facilitated (de-)excitation
//            next to an excited atom at Gamma_fac, optional spontaneous flips,
//            decay), used for the absorbing-state criticality scans.
//
// Determinism contract: a trajectory is a pure function of (rng_seed,
// trajectory index); ensembles merge by index, so results are bitwise
// independent of thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"
#include "params.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace rydkin {

enum class DriveMode { excitation, deexcitation, off };
enum class RateKernel { vdw, contact };

struct SeedInjection {
    double mean_seeds = 0;
};

struct ProtocolSegment {
    double duration = 0; // us
    DriveMode drive = DriveMode::off;
    double rabi = 0;     // rad/us
    double detuning = 0; // rad/us
    std::optional<SeedInjection> seed_injection;

    void validate() const {
        if (!(duration > 0)) throw std::invalid_argument("ProtocolSegment: duration must be > 0");
        if (rabi < 0) throw std::invalid_argument("ProtocolSegment: rabi must be >= 0");
        if (seed_injection) {
            if (seed_injection->mean_seeds < 0)
                throw std::invalid_argument("ProtocolSegment: mean_seeds must be >= 0");
            if (drive == DriveMode::deexcitation)
                throw std::invalid_argument(
                    "ProtocolSegment: seed injection only valid with drive off or excitation");
        }
    }
};

struct KmcConfig {
    std::vector<double> record_times; // strictly increasing, >= 0
    std::uint64_t rng_seed = 0;
    std::size_t trajectories = 1;
    bool motion_enabled = false;
    double motion_update_interval = 0.5; // us
    double mean_speed = 0.11;            // um/us
    double cutoff = 0;                   // 0 -> default_cutoff(params)

    // engine knobs beyond the paper model
    RateKernel kernel = RateKernel::vdw;
    bool contact_spontaneous = false; // include the spontaneous channel (contact kernel)
    double rate_floor = 0;            // drop drive channels below this rate
    bool record_configurations = false; // store excitation bitmasks (needs N <= 64)
    std::uint64_t rate_rebuild_interval = 1u << 18; // fp hygiene for incremental shifts

    void validate() const {
        if (trajectories < 1) throw std::invalid_argument("KmcConfig: trajectories must be >= 1");
        if (motion_enabled && !(motion_update_interval > 0))
            throw std::invalid_argument("KmcConfig: motion_update_interval must be > 0");
        if (motion_enabled && mean_speed < 0)
            throw std::invalid_argument("KmcConfig: mean_speed must be >= 0");
        if (rate_floor < 0) throw std::invalid_argument("KmcConfig: rate_floor must be >= 0");
        for (std::size_t i = 0; i < record_times.size(); ++i) {
            if (record_times[i] < 0 || (i > 0 && record_times[i] <= record_times[i - 1]))
                throw std::invalid_argument("KmcConfig: record_times must be strictly increasing and >= 0");
        }
    }
};

// Indexed sampling over per-atom total rates (power-of-two segment tree).
// Parent nodes are recomputed, not incremented, so no drift accumulates.
class RateTree {
  public:
    void init(std::size_t n) {
        n_ = n;
        size_ = 1;
        while (size_ < n_) size_ <<= 1;
        tree_.assign(2 * size_, 0.0);
    }
    void set(std::size_t i, double v) {
        std::size_t node = i + size_;
        tree_[node] = v;
        for (node >>= 1; node >= 1; node >>= 1) {
            tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
            if (node == 1) break;
        }
    }
    double get(std::size_t i) const { return tree_[i + size_]; }
    double total() const { return tree_[1]; }

    // picks the leaf containing mass coordinate x in [0, total)
    std::size_t sample(double x) const {
        std::size_t node = 1;
        while (node < size_) {
            node <<= 1;
            if (x >= tree_[node]) {
                x -= tree_[node];
                node |= 1;
            }
        }
        std::size_t idx = node - size_;
        if (idx >= n_ || tree_[node] <= 0) {
            // fp fallback: walk to the nearest positive-rate leaf
            std::size_t j = std::min(idx, n_ - 1);
            while (j > 0 && tree_[j + size_] <= 0) --j;
            if (tree_[j + size_] <= 0)
                while (j + 1 < n_ && tree_[j + size_] <= 0) ++j;
            idx = j;
        }
        return idx;
    }

  private:
    std::size_t n_ = 0, size_ = 1;
    std::vector<double> tree_;
};

struct Channels {
    double drive = 0; // flip channel (direction depends on atom state and segment)
    double decay = 0;
};

// Recomputes the full rate table from scratch (vdw kernel); the engine keeps
// an incrementally updated copy of exactly this table.
struct ChannelTable {
    std::vector<Channels> atoms;
    double total = 0;
};

inline ChannelTable build_channels(const SpinConfiguration& s, const PhysicalParams& p,
                                   const ProtocolSegment& seg, double cutoff,
                                   double rate_floor = 0,
                                   std::optional<double> v_max = std::nullopt) {
    p.validate();
    seg.validate();
    double vmax = v_max ? *v_max : default_shift_clamp(p);
    PhysicalParams drive = p.with_drive(seg.rabi, seg.detuning);
    ChannelTable table;
    table.atoms.resize(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        Channels c;
        if (seg.drive != DriveMode::off && (seg.drive == DriveMode::excitation || s.excited[k])) {
            double shift = interaction_shift(s, p.c6, k, cutoff, vmax);
            double g = flip_rate(drive, shift);
            c.drive = g >= rate_floor ? g : 0.0;
        }
        c.decay = s.excited[k] ? p.decay : 0.0;
        table.atoms[k] = c;
        table.total += c.drive + c.decay;
    }
    return table;
}

struct EventRecord {
    enum class Kind { flip_up, flip_down, decay };
    double time = 0;
    std::size_t atom = 0;
    Kind kind = Kind::flip_up;
};

struct KmcStep {
    bool frozen = false;   // no channel has positive rate
    double waiting = 0;    // exponential waiting time (valid unless frozen)
    EventRecord event;     // applied event (valid unless frozen)
};

class KmcEngine {
  public:
    KmcEngine(const GasGeometry& g, const PhysicalParams& p, const KmcConfig& cfg,
              SpinConfiguration state)
        : geom_(g), p_(p), cfg_(cfg), s_(std::move(state)) {
        p_.validate();
        cfg_.validate();
        if (cfg_.kernel == RateKernel::contact &&
            (g.mode != GeometryMode::lattice || g.dimension != 1))
            throw std::invalid_argument("KmcEngine: contact kernel requires a 1D lattice");
        cutoff_ = cfg_.cutoff > 0 ? cfg_.cutoff : default_cutoff(p_);
        vmax_ = default_shift_clamp(p_);
        tree_.init(s_.size());
        n_excited_ = s_.excited_count();
        rebuild_geometry_index();
        rebuild_shifts();
    }

    void begin_segment(const ProtocolSegment& seg) {
        seg.validate();
        if (cfg_.kernel == RateKernel::contact && seg.drive == DriveMode::deexcitation)
            throw std::invalid_argument("KmcEngine: de-excitation drive needs the vdw kernel");
        seg_ = seg;
        drive_params_ = p_.with_drive(seg.rabi, seg.detuning);
        refresh_all_rates();
    }

    // Poisson seed pulse: excites Poisson(mean) distinct ground atoms.
    std::size_t inject_seeds(double mean, Rng& rng) {
        std::vector<std::size_t> ground;
        for (std::size_t k = 0; k < s_.size(); ++k)
            if (!s_.excited[k]) ground.push_back(k);
        std::size_t want = static_cast<std::size_t>(rng.poisson(mean));
        auto chosen = rng.choose(std::move(ground), want);
        for (std::size_t k : chosen) apply_flip(k, true);
        return chosen.size();
    }

    double total_rate() const { return tree_.total(); }

    // Event identity drawn with probability proportional to its rate and
    // applied in place.
    EventRecord apply_random_event(Rng& rng) {
        double total = tree_.total();
        std::size_t atom = tree_.sample(rng.uniform() * total);
        const Channels& c = ch_[atom];
        double inner = rng.uniform() * (c.drive + c.decay);
        bool is_drive = inner < c.drive || c.decay == 0;
        EventRecord ev;
        if (is_drive) {
            bool up = !s_.excited[atom];
            ev = {0, atom, up ? EventRecord::Kind::flip_up : EventRecord::Kind::flip_down};
            apply_flip(atom, up);
        } else {
            ev = {0, atom, EventRecord::Kind::decay};
            apply_flip(atom, false);
        }
        return ev;
    }

    // One event of the embedded chain: waiting time ~ Exp(total rate), then
    // the event draw. Returns frozen when no channel has positive rate.
    KmcStep kmc_step(Rng& rng) {
        double total = tree_.total();
        if (total <= 0) return {.frozen = true};
        KmcStep st;
        st.waiting = rng.exponential(total);
        st.event = apply_random_event(rng);
        return st;
    }

    // Ballistic motion: advance positions, rebuild index, shifts and rates.
    void advance_motion(double dt) {
        if (s_.velocities.empty()) return;
        auto box = geom_.box_lengths();
        for (std::size_t k = 0; k < s_.size(); ++k) {
            auto& r = s_.positions[k];
            const auto& v = s_.velocities[k];
            r.x += v.x * dt;
            r.y += v.y * dt;
            r.z += v.z * dt;
            if (geom_.periodic()) {
                r.x -= box[0] * std::floor(r.x / box[0]);
                if (geom_.dimension >= 2) r.y -= box[1] * std::floor(r.y / box[1]);
                if (geom_.dimension >= 3) r.z -= box[2] * std::floor(r.z / box[2]);
            }
        }
        rebuild_geometry_index();
        rebuild_shifts();
        refresh_all_rates();
    }

    const SpinConfiguration& state() const { return s_; }
    std::size_t excited_count() const { return n_excited_; }
    double shift_of(std::size_t k) const { return shift_[k]; }

    std::uint64_t excitation_mask() const {
        std::uint64_t m = 0;
        for (std::size_t k = 0; k < s_.size(); ++k)
            if (s_.excited[k]) m |= std::uint64_t(1) << k;
        return m;
    }

    ChannelTable channel_snapshot() const {
        ChannelTable t;
        t.atoms = ch_;
        t.total = tree_.total();
        return t;
    }

  private:
    void rebuild_geometry_index() {
        if (cfg_.kernel == RateKernel::contact) return; // index neighbors, no cell list
        nbr_.build(s_.positions, cutoff_, geom_.periodic(), geom_.box_lengths());
    }

    double pair_shift(std::size_t k, std::size_t q) const {
        double r2 = nbr_.distance2(s_.positions[k], s_.positions[q]);
        double r6 = r2 * r2 * r2;
        double v = r6 > 0 ? p_.c6 / r6 : vmax_;
        return v < vmax_ ? v : vmax_;
    }

    void rebuild_shifts() {
        shift_.assign(s_.size(), 0.0);
        if (cfg_.kernel == RateKernel::contact) {
            for (std::size_t k = 0; k < s_.size(); ++k)
                if (s_.excited[k])
                    for (std::size_t q : chain_neighbors(k)) shift_[q] += 1.0;
            return;
        }
        for (std::size_t k = 0; k < s_.size(); ++k) {
            if (!s_.excited[k]) continue;
            nbr_.within(s_.positions[k], s_.positions, scratch_);
            for (std::size_t q : scratch_)
                if (q != k) shift_[q] += pair_shift(k, q);
        }
        events_since_rebuild_ = 0;
    }

    void refresh_all_rates() {
        ch_.assign(s_.size(), Channels{});
        for (std::size_t k = 0; k < s_.size(); ++k) set_atom_rate(k);
    }

    std::vector<std::size_t> chain_neighbors(std::size_t k) const {
        std::vector<std::size_t> out;
        std::size_t n = s_.size();
        if (geom_.periodic()) {
            out.push_back((k + 1) % n);
            out.push_back((k + n - 1) % n);
        } else {
            if (k + 1 < n) out.push_back(k + 1);
            if (k > 0) out.push_back(k - 1);
        }
        return out;
    }

    double drive_rate(std::size_t k) const {
        if (seg_.drive == DriveMode::off) return 0;
        if (seg_.drive == DriveMode::deexcitation && !s_.excited[k]) return 0;
        double g;
        if (cfg_.kernel == RateKernel::contact) {
            double fac = seg_.rabi * seg_.rabi / (2.0 * p_.dephasing);
            g = shift_[k] > 0 ? fac : 0.0;
            if (cfg_.contact_spontaneous) g += flip_rate(drive_params_, 0.0);
        } else {
            double shift = shift_[k] < vmax_ ? shift_[k] : vmax_;
            g = flip_rate(drive_params_, shift);
        }
        return g >= cfg_.rate_floor ? g : 0.0;
    }

    void set_atom_rate(std::size_t k) {
        Channels c;
        c.drive = drive_rate(k);
        c.decay = s_.excited[k] ? p_.decay : 0.0;
        ch_[k] = c;
        tree_.set(k, c.drive + c.decay);
    }

    void apply_flip(std::size_t k, bool to_excited) {
        s_.excited[k] = to_excited ? 1 : 0;
        n_excited_ += to_excited ? 1 : std::size_t(-1);
        if (cfg_.kernel == RateKernel::contact) {
            for (std::size_t q : chain_neighbors(k)) {
                shift_[q] += to_excited ? 1.0 : -1.0;
                set_atom_rate(q);
            }
            set_atom_rate(k);
            return;
        }
        nbr_.within(s_.positions[k], s_.positions, scratch_);
        double sign = to_excited ? 1.0 : -1.0;
        for (std::size_t q : scratch_) {
            if (q == k) continue;
            shift_[q] += sign * pair_shift(k, q);
            set_atom_rate(q);
        }
        set_atom_rate(k);
        if (++events_since_rebuild_ >= cfg_.rate_rebuild_interval) {
            rebuild_shifts();
            refresh_all_rates();
        }
    }

    GasGeometry geom_;
    PhysicalParams p_;
    PhysicalParams drive_params_;
    KmcConfig cfg_;
    SpinConfiguration s_;
    ProtocolSegment seg_{.duration = 1, .drive = DriveMode::off};
    double cutoff_ = 1, vmax_ = 1;
    std::size_t n_excited_ = 0;
    NeighborIndex nbr_;
    std::vector<double> shift_;
    RateTree tree_;
    std::vector<Channels> ch_;
    std::vector<std::size_t> scratch_;
    std::uint64_t events_since_rebuild_ = 0;
};

struct TrajectoryResult {
    std::vector<std::uint32_t> counts;          // N(t) at record times
    std::vector<std::uint64_t> config_samples;  // excitation bitmasks (optional)
    SpinConfiguration final_config;
    std::uint64_t stream = 0;
};

struct EnsembleResult {
    std::vector<double> record_times;
    std::vector<TrajectoryResult> trajectories;
    std::uint64_t seed = 0;

    std::vector<double> mean_counts() const {
        std::vector<double> m(record_times.size(), 0.0);
        for (const auto& tr : trajectories)
            for (std::size_t i = 0; i < m.size(); ++i) m[i] += tr.counts[i];
        for (auto& v : m) v /= double(trajectories.size());
        return m;
    }
    // standard error of the mean, per record time
    std::vector<double> stderr_counts() const {
        std::vector<double> m = mean_counts();
        std::vector<double> se(record_times.size(), 0.0);
        if (trajectories.size() < 2) return se;
        for (const auto& tr : trajectories)
            for (std::size_t i = 0; i < se.size(); ++i) {
                double d = tr.counts[i] - m[i];
                se[i] += d * d;
            }
        double norm = double(trajectories.size()) * double(trajectories.size() - 1);
        for (auto& v : se) v = std::sqrt(v / norm);
        return se;
    }
};

inline double protocol_duration(const std::vector<ProtocolSegment>& segments) {
    double d = 0;
    for (const auto& s : segments) d += s.duration;
    return d;
}

inline TrajectoryResult run_protocol(const GasGeometry& g, const PhysicalParams& p,
                                     const std::vector<ProtocolSegment>& segments,
                                     const KmcConfig& cfg, std::uint64_t trajectory_index) {
    if (segments.empty()) throw std::invalid_argument("run_protocol: segments must be non-empty");
    for (const auto& s : segments) s.validate();
    cfg.validate();
    double total_duration = protocol_duration(segments);
    if (!cfg.record_times.empty() && cfg.record_times.back() > total_duration * (1 + 1e-12))
        throw std::invalid_argument("run_protocol: record time beyond total protocol duration");
    if (cfg.record_configurations && g.atom_count > 64)
        throw std::invalid_argument("run_protocol: configuration recording needs <= 64 atoms");

    Rng rng(cfg.rng_seed, trajectory_index);
    SpinConfiguration initial = sample_geometry(
        g, rng, cfg.motion_enabled ? std::optional<double>(cfg.mean_speed) : std::nullopt);
    KmcEngine engine(g, p, cfg, std::move(initial));

    TrajectoryResult out;
    out.stream = trajectory_index;
    out.counts.reserve(cfg.record_times.size());

    const double inf = std::numeric_limits<double>::infinity();
    double t = 0;
    std::size_t rec = 0;
    auto record_through = [&](double t_limit) {
        // tiny slop absorbs rounding in summed segment durations
        double limit = t_limit + 1e-12 * (1.0 + std::abs(t_limit));
        while (rec < cfg.record_times.size() && cfg.record_times[rec] <= limit) {
            out.counts.push_back(static_cast<std::uint32_t>(engine.excited_count()));
            if (cfg.record_configurations) out.config_samples.push_back(engine.excitation_mask());
            ++rec;
        }
    };

    record_through(0.0); // record times at t = 0 see the pre-protocol state
    double seg_start = 0;
    double next_motion = cfg.motion_enabled ? cfg.motion_update_interval : inf;
    double last_motion_t = 0;
    for (const auto& seg : segments) {
        double seg_end = seg_start + seg.duration;
        engine.begin_segment(seg);
        if (seg.seed_injection) engine.inject_seeds(seg.seed_injection->mean_seeds, rng);
        while (t < seg_end) {
            double bound = std::min(seg_end, next_motion);
            double total = engine.total_rate();
            double t_event = total > 0 ? t + rng.exponential(total) : inf;
            if (t_event >= bound) {
                // truncating the exponential clock at a rate-table change is
                // exact by memorylessness; redraw after the boundary
                record_through(bound);
                t = bound;
                if (t >= next_motion && t < seg_end) {
                    engine.advance_motion(t - last_motion_t);
                    last_motion_t = t;
                    next_motion += cfg.motion_update_interval;
                }
                continue;
            }
            record_through(t_event); // pre-event state for times <= t_event
            engine.apply_random_event(rng);
            t = t_event;
        }
        if (cfg.motion_enabled && t > last_motion_t) {
            // catch positions up through the segment boundary
            engine.advance_motion(t - last_motion_t);
            last_motion_t = t;
        }
        seg_start = seg_end;
    }
    record_through(total_duration);
    out.final_config = engine.state();
    return out;
}

inline EnsembleResult run_ensemble(const GasGeometry& g, const PhysicalParams& p,
                                   const std::vector<ProtocolSegment>& segments,
                                   const KmcConfig& cfg, unsigned threads = 0) {
    EnsembleResult out;
    out.record_times = cfg.record_times;
    out.seed = cfg.rng_seed;
    out.trajectories.resize(cfg.trajectories);
    parallel_for(cfg.trajectories, threads, [&](std::size_t i) {
        out.trajectories[i] = run_protocol(g, p, segments, cfg, i);
    });
    return out;
}

} // namespace rydkin
