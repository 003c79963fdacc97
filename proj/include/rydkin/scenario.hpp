#pragma once

// Declarative scenario runner: strict JSON configs (every physical quantity
// carries an explicit unit, unknown keys are rejected with their path) wired
// to the engines and the analysis pipeline. One scenario kind per experiment
// family; each run produces plot-ready CSV tables plus a manifest.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "geometry.hpp"
#include "kmc.hpp"
#include "lindblad.hpp"
#include "meanfield.hpp"
#include "output.hpp"
#include "params.hpp"
#include "qjmc.hpp"
#include "stats.hpp"
#include "units.hpp"

namespace rydkin {

using json = nlohmann::json;

enum class ScenarioKind {
    blockade_growth,
    facilitation,
    seeded_facilitation,
    phase_diagram,
    criticality_1d,
    deexcitation_spectrum,
    qjmc_histogram,
    meanfield_scan,
    collapse_demo,
};

inline const std::map<std::string, ScenarioKind>& scenario_kind_names() {
    static const std::map<std::string, ScenarioKind> names{
        {"blockade_growth", ScenarioKind::blockade_growth},
        {"facilitation", ScenarioKind::facilitation},
        {"seeded_facilitation", ScenarioKind::seeded_facilitation},
        {"phase_diagram", ScenarioKind::phase_diagram},
        {"criticality_1d", ScenarioKind::criticality_1d},
        {"deexcitation_spectrum", ScenarioKind::deexcitation_spectrum},
        {"qjmc_histogram", ScenarioKind::qjmc_histogram},
        {"meanfield_scan", ScenarioKind::meanfield_scan},
        {"collapse_demo", ScenarioKind::collapse_demo},
    };
    return names;
}

namespace cfgdetail {

inline void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw config_error(path + ": expected an object");
}

inline void allow_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> keys) {
    expect_object(obj, path);
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : keys) ok |= it.key() == k;
        if (!ok) throw config_error(path + "." + it.key() + ": unknown key");
    }
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
    expect_object(obj, path);
    auto it = obj.find(key);
    if (it == obj.end()) throw config_error(path + "." + key + ": missing required key");
    return *it;
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw config_error(path + ": expected a number");
    return j.get<double>();
}

inline std::uint64_t uinteger(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw config_error(path + ": expected a non-negative integer");
    return j.get<std::uint64_t>();
}

inline bool boolean(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw config_error(path + ": expected a boolean");
    return j.get<bool>();
}

inline std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) throw config_error(path + ": expected a string");
    return j.get<std::string>();
}

enum class Dim { frequency, rate, time, length, speed, c6, volume };

inline const char* internal_unit(Dim d) {
    switch (d) {
        case Dim::frequency: return "rad/us";
        case Dim::rate: return "1/us";
        case Dim::time: return "us";
        case Dim::length: return "um";
        case Dim::speed: return "um/us";
        case Dim::c6: return "rad um^6/us";
        case Dim::volume: return "um^3";
    }
    return "";
}

// {"value": x, "unit": "..."} -> internal units. `tp` multiplies ordinary
// frequencies by 2pi (the times_two_pi convention).
inline double quantity(const json& q, const std::string& path, Dim dim, double tp) {
    allow_keys(q, path, {"value", "unit"});
    double v = number(require(q, path, "value"), path + ".value");
    std::string u = text(require(q, path, "unit"), path + ".unit");
    auto bad = [&]() -> double {
        throw config_error(path + ".unit: '" + u + "' is not a valid " +
                           std::string(internal_unit(dim)) + " unit");
    };
    switch (dim) {
        case Dim::frequency:
            if (u == "rad/us") return v;
            if (u == "GHz") return v * 1e3 * tp;
            if (u == "MHz") return v * tp;
            if (u == "kHz") return v * 1e-3 * tp;
            return bad();
        case Dim::rate:
            if (u == "1/us") return v;
            if (u == "1/ms") return v * 1e-3;
            if (u == "1/s") return v * 1e-6;
            return bad();
        case Dim::time:
            if (u == "us") return v;
            if (u == "ns") return v * 1e-3;
            if (u == "ms") return v * 1e3;
            if (u == "s") return v * 1e6;
            return bad();
        case Dim::length:
            if (u == "um") return v;
            if (u == "nm") return v * 1e-3;
            if (u == "mm") return v * 1e3;
            return bad();
        case Dim::speed:
            if (u == "um/us" || u == "m/s") return v;
            return bad();
        case Dim::c6:
            if (u == "rad um^6/us") return v;
            if (u == "GHz um^6") return v * 1e3 * tp;
            if (u == "MHz um^6") return v * tp;
            return bad();
        case Dim::volume:
            if (u == "um^3") return v;
            return bad();
    }
    return bad();
}

inline json resolved_quantity(double internal_value, Dim dim) {
    return json{{"value", internal_value}, {"unit", internal_unit(dim)}};
}

inline std::vector<double> quantity_list(const json& arr, const std::string& path, Dim dim,
                                         double tp) {
    if (!arr.is_array()) throw config_error(path + ": expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < arr.size(); ++i)
        out.push_back(quantity(arr[i], path + "[" + std::to_string(i) + "]", dim, tp));
    return out;
}

} // namespace cfgdetail

struct ScenarioRun {
    std::uint64_t seed = 1;
    std::size_t trajectories = 100;
    unsigned threads = 0; // 0 -> RYDKIN_THREADS or hardware
};

struct Scenario {
    ScenarioKind kind = ScenarioKind::meanfield_scan;
    std::string kind_name;
    ScenarioRun run;
    PhysicalParams physics;
    GasGeometry geometry;
    std::vector<ProtocolSegment> protocol;
    KmcConfig engine; // kernel, cutoff, motion, rate floor; record times filled per kind
    json scan;        // resolved (internal-unit) scan parameters, kind-specific
    json resolved;    // full resolved config (canonical, internal units)

    std::string resolved_text() const { return resolved.dump(2) + "\n"; }
};

// ---------------------------------------------------------------------------
// parsing

inline Scenario parse_scenario(const json& root);

inline Scenario parse_scenario_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config: JSON parse error: ") + e.what());
    }
    return parse_scenario(root);
}

namespace cfgdetail {

struct ParsedCommon {
    double tp = units::two_pi;
};

inline void parse_physics(const json& root, Scenario& s, double& tp, json& resolved) {
    const json& ph = require(root, "config", "physics");
    allow_keys(ph, "physics",
               {"times_two_pi", "rabi", "detuning", "dephasing", "decay", "c6", "detection_eff"});
    bool times_two_pi = ph.contains("times_two_pi")
                            ? boolean(ph["times_two_pi"], "physics.times_two_pi")
                            : true;
    tp = times_two_pi ? units::two_pi : 1.0;
    PhysicalParams p;
    p.rabi = quantity(require(ph, "physics", "rabi"), "physics.rabi", Dim::frequency, tp);
    p.detuning = ph.contains("detuning")
                     ? quantity(ph["detuning"], "physics.detuning", Dim::frequency, tp)
                     : 0.0;
    p.dephasing =
        quantity(require(ph, "physics", "dephasing"), "physics.dephasing", Dim::frequency, tp);
    p.decay = ph.contains("decay") ? quantity(ph["decay"], "physics.decay", Dim::rate, 1.0) : 0.0;
    p.c6 = ph.contains("c6") ? quantity(ph["c6"], "physics.c6", Dim::c6, tp) : 0.0;
    p.detection_eff = ph.contains("detection_eff")
                          ? number(ph["detection_eff"], "physics.detection_eff")
                          : 1.0;
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("physics: ") + e.what());
    }
    s.physics = p;
    resolved["physics"] = {
        {"times_two_pi", false},
        {"rabi", resolved_quantity(p.rabi, Dim::frequency)},
        {"detuning", resolved_quantity(p.detuning, Dim::frequency)},
        {"dephasing", resolved_quantity(p.dephasing, Dim::frequency)},
        {"decay", resolved_quantity(p.decay, Dim::rate)},
        {"c6", resolved_quantity(p.c6, Dim::c6)},
        {"detection_eff", p.detection_eff},
    };
}

inline void parse_geometry(const json& root, Scenario& s, double tp, json& resolved) {
    const json& g = require(root, "config", "geometry");
    allow_keys(g, "geometry",
               {"mode", "dimension", "atom_count", "lattice_spacing", "boundary", "cloud"});
    GasGeometry geo;
    std::string mode = text(require(g, "geometry", "mode"), "geometry.mode");
    if (mode == "lattice") geo.mode = GeometryMode::lattice;
    else if (mode == "continuum") geo.mode = GeometryMode::continuum;
    else throw config_error("geometry.mode: must be 'lattice' or 'continuum'");
    geo.dimension = int(uinteger(require(g, "geometry", "dimension"), "geometry.dimension"));
    geo.atom_count = uinteger(require(g, "geometry", "atom_count"), "geometry.atom_count");
    json rg{{"mode", mode}, {"dimension", geo.dimension}, {"atom_count", geo.atom_count}};
    if (g.contains("boundary")) {
        std::string b = text(g["boundary"], "geometry.boundary");
        if (b == "open") geo.boundary = Boundary::open;
        else if (b == "periodic") geo.boundary = Boundary::periodic;
        else throw config_error("geometry.boundary: must be 'open' or 'periodic'");
        rg["boundary"] = b;
    }
    if (geo.mode == GeometryMode::lattice) {
        geo.lattice_spacing = quantity(require(g, "geometry", "lattice_spacing"),
                                       "geometry.lattice_spacing", Dim::length, tp);
        rg["lattice_spacing"] = resolved_quantity(geo.lattice_spacing, Dim::length);
    } else {
        const json& c = require(g, "geometry", "cloud");
        std::string shape = text(require(c, "geometry.cloud", "shape"), "geometry.cloud.shape");
        if (shape == "gaussian") {
            allow_keys(c, "geometry.cloud", {"shape", "sigma_x", "sigma_y", "sigma_z"});
            geo.cloud.shape = CloudSpec::Shape::gaussian;
            geo.cloud.sigma_x = quantity(require(c, "geometry.cloud", "sigma_x"),
                                         "geometry.cloud.sigma_x", Dim::length, tp);
            geo.cloud.sigma_y = quantity(require(c, "geometry.cloud", "sigma_y"),
                                         "geometry.cloud.sigma_y", Dim::length, tp);
            geo.cloud.sigma_z = quantity(require(c, "geometry.cloud", "sigma_z"),
                                         "geometry.cloud.sigma_z", Dim::length, tp);
            rg["cloud"] = {{"shape", "gaussian"},
                           {"sigma_x", resolved_quantity(geo.cloud.sigma_x, Dim::length)},
                           {"sigma_y", resolved_quantity(geo.cloud.sigma_y, Dim::length)},
                           {"sigma_z", resolved_quantity(geo.cloud.sigma_z, Dim::length)}};
        } else if (shape == "cylinder") {
            allow_keys(c, "geometry.cloud", {"shape", "radius", "length"});
            geo.cloud.shape = CloudSpec::Shape::cylinder;
            geo.cloud.radius = quantity(require(c, "geometry.cloud", "radius"),
                                        "geometry.cloud.radius", Dim::length, tp);
            geo.cloud.length = quantity(require(c, "geometry.cloud", "length"),
                                        "geometry.cloud.length", Dim::length, tp);
            rg["cloud"] = {{"shape", "cylinder"},
                           {"radius", resolved_quantity(geo.cloud.radius, Dim::length)},
                           {"length", resolved_quantity(geo.cloud.length, Dim::length)}};
        } else {
            throw config_error("geometry.cloud.shape: must be 'gaussian' or 'cylinder'");
        }
    }
    try {
        geo.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("geometry: ") + e.what());
    }
    s.geometry = geo;
    resolved["geometry"] = rg;
}

inline void parse_protocol(const json& root, Scenario& s, double tp, json& resolved) {
    if (!root.contains("protocol")) {
        resolved["protocol"] = json::array();
        return;
    }
    const json& arr = root["protocol"];
    if (!arr.is_array()) throw config_error("protocol: expected an array");
    json rp = json::array();
    for (std::size_t i = 0; i < arr.size(); ++i) {
        std::string path = "protocol[" + std::to_string(i) + "]";
        const json& e = arr[i];
        allow_keys(e, path, {"drive", "duration", "rabi", "detuning", "seed_mean"});
        ProtocolSegment seg;
        std::string drive = text(require(e, path, "drive"), path + ".drive");
        if (drive == "excitation") seg.drive = DriveMode::excitation;
        else if (drive == "deexcitation") seg.drive = DriveMode::deexcitation;
        else if (drive == "off") seg.drive = DriveMode::off;
        else throw config_error(path + ".drive: must be excitation|deexcitation|off");
        seg.duration = quantity(require(e, path, "duration"), path + ".duration", Dim::time, tp);
        seg.rabi = e.contains("rabi") ? quantity(e["rabi"], path + ".rabi", Dim::frequency, tp)
                                      : s.physics.rabi;
        seg.detuning = e.contains("detuning")
                           ? quantity(e["detuning"], path + ".detuning", Dim::frequency, tp)
                           : s.physics.detuning;
        if (e.contains("seed_mean"))
            seg.seed_injection = SeedInjection{number(e["seed_mean"], path + ".seed_mean")};
        try {
            seg.validate();
        } catch (const std::invalid_argument& ex) {
            throw config_error(path + ": " + ex.what());
        }
        s.protocol.push_back(seg);
        json re{{"drive", drive},
                {"duration", resolved_quantity(seg.duration, Dim::time)},
                {"rabi", resolved_quantity(seg.rabi, Dim::frequency)},
                {"detuning", resolved_quantity(seg.detuning, Dim::frequency)}};
        if (seg.seed_injection) re["seed_mean"] = seg.seed_injection->mean_seeds;
        rp.push_back(re);
    }
    resolved["protocol"] = rp;
}

inline void parse_scenario_section(const json& root, Scenario& s, double tp, json& resolved) {
    const json& sc = require(root, "config", "scenario");
    allow_keys(sc, "scenario",
               {"kind", "seed", "trajectories", "threads", "kernel", "spontaneous", "cutoff",
                "rate_floor", "motion"});
    std::string kind = text(require(sc, "scenario", "kind"), "scenario.kind");
    auto it = scenario_kind_names().find(kind);
    if (it == scenario_kind_names().end())
        throw config_error("scenario.kind: unknown scenario '" + kind + "'");
    s.kind = it->second;
    s.kind_name = kind;
    if (sc.contains("seed")) s.run.seed = uinteger(sc["seed"], "scenario.seed");
    if (sc.contains("trajectories"))
        s.run.trajectories = uinteger(sc["trajectories"], "scenario.trajectories");
    if (s.run.trajectories < 1) throw config_error("scenario.trajectories: must be >= 1");
    if (sc.contains("threads")) s.run.threads = unsigned(uinteger(sc["threads"], "scenario.threads"));

    json rs{{"kind", kind},
            {"seed", s.run.seed},
            {"trajectories", s.run.trajectories},
            {"threads", s.run.threads}};

    if (sc.contains("kernel")) {
        std::string k = text(sc["kernel"], "scenario.kernel");
        if (k == "vdw") s.engine.kernel = RateKernel::vdw;
        else if (k == "contact") s.engine.kernel = RateKernel::contact;
        else throw config_error("scenario.kernel: must be 'vdw' or 'contact'");
    }
    rs["kernel"] = s.engine.kernel == RateKernel::vdw ? "vdw" : "contact";
    if (sc.contains("spontaneous"))
        s.engine.contact_spontaneous = boolean(sc["spontaneous"], "scenario.spontaneous");
    rs["spontaneous"] = s.engine.contact_spontaneous;
    if (sc.contains("cutoff"))
        s.engine.cutoff = quantity(sc["cutoff"], "scenario.cutoff", Dim::length, tp);
    rs["cutoff"] = resolved_quantity(s.engine.cutoff, Dim::length);
    if (sc.contains("rate_floor"))
        s.engine.rate_floor = quantity(sc["rate_floor"], "scenario.rate_floor", Dim::rate, 1.0);
    rs["rate_floor"] = resolved_quantity(s.engine.rate_floor, Dim::rate);
    if (sc.contains("motion")) {
        const json& m = sc["motion"];
        allow_keys(m, "scenario.motion", {"enabled", "update_interval", "mean_speed"});
        s.engine.motion_enabled = boolean(require(m, "scenario.motion", "enabled"),
                                          "scenario.motion.enabled");
        if (m.contains("update_interval"))
            s.engine.motion_update_interval =
                quantity(m["update_interval"], "scenario.motion.update_interval", Dim::time, tp);
        if (m.contains("mean_speed"))
            s.engine.mean_speed = quantity(m["mean_speed"], "scenario.motion.mean_speed",
                                           Dim::speed, tp);
    }
    rs["motion"] = {{"enabled", s.engine.motion_enabled},
                    {"update_interval", resolved_quantity(s.engine.motion_update_interval, Dim::time)},
                    {"mean_speed", resolved_quantity(s.engine.mean_speed, Dim::speed)}};
    resolved["scenario"] = rs;
}

// kind-specific scan parsing; stores internal-unit values into s.scan
inline void parse_scan(const json& root, Scenario& s, double tp, json& resolved) {
    json sc = root.contains("scan") ? root["scan"] : json::object();
    std::string P = "scan";
    json r = json::object();
    auto times = [&](const json& j, const std::string& p) { return quantity(j, p, Dim::time, tp); };

    switch (s.kind) {
        case ScenarioKind::blockade_growth: {
            allow_keys(sc, P, {"duration", "interaction_volume", "smoothing_window", "record_count"});
            double dur = times(require(sc, P, "duration"), P + ".duration");
            double vol = quantity(require(sc, P, "interaction_volume"), P + ".interaction_volume",
                                  Dim::volume, tp);
            int win = sc.contains("smoothing_window")
                          ? int(uinteger(sc["smoothing_window"], P + ".smoothing_window"))
                          : 5;
            int rc = sc.contains("record_count")
                         ? int(uinteger(sc["record_count"], P + ".record_count"))
                         : 60;
            r["duration"] = resolved_quantity(dur, Dim::time);
            r["interaction_volume"] = resolved_quantity(vol, Dim::volume);
            r["smoothing_window"] = win;
            r["record_count"] = rc;
            break;
        }
        case ScenarioKind::facilitation: {
            allow_keys(sc, P, {"duration", "detunings", "record_count"});
            double dur = times(require(sc, P, "duration"), P + ".duration");
            auto dets = quantity_list(require(sc, P, "detunings"), P + ".detunings",
                                      Dim::frequency, tp);
            int rc = sc.contains("record_count")
                         ? int(uinteger(sc["record_count"], P + ".record_count"))
                         : 40;
            r["duration"] = resolved_quantity(dur, Dim::time);
            json arr = json::array();
            for (double d : dets) arr.push_back(resolved_quantity(d, Dim::frequency));
            r["detunings"] = arr;
            r["record_count"] = rc;
            break;
        }
        case ScenarioKind::seeded_facilitation: {
            allow_keys(sc, P, {"drive_duration", "seed_means", "record_count"});
            double dur = times(require(sc, P, "drive_duration"), P + ".drive_duration");
            const json& sm = require(sc, P, "seed_means");
            if (!sm.is_array()) throw config_error(P + ".seed_means: expected an array");
            json arr = json::array();
            for (std::size_t i = 0; i < sm.size(); ++i)
                arr.push_back(number(sm[i], P + ".seed_means[" + std::to_string(i) + "]"));
            int rc = sc.contains("record_count")
                         ? int(uinteger(sc["record_count"], P + ".record_count"))
                         : 30;
            r["drive_duration"] = resolved_quantity(dur, Dim::time);
            r["seed_means"] = arr;
            r["record_count"] = rc;
            break;
        }
        case ScenarioKind::phase_diagram: {
            allow_keys(sc, P, {"rabi_values", "detuning_values", "duration", "seed_mean"});
            auto rabis = quantity_list(require(sc, P, "rabi_values"), P + ".rabi_values",
                                       Dim::frequency, tp);
            auto dets = quantity_list(require(sc, P, "detuning_values"), P + ".detuning_values",
                                      Dim::frequency, tp);
            double dur = times(require(sc, P, "duration"), P + ".duration");
            double seed_mean = number(require(sc, P, "seed_mean"), P + ".seed_mean");
            json ra = json::array(), da = json::array();
            for (double v : rabis) ra.push_back(resolved_quantity(v, Dim::frequency));
            for (double v : dets) da.push_back(resolved_quantity(v, Dim::frequency));
            r["rabi_values"] = ra;
            r["detuning_values"] = da;
            r["duration"] = resolved_quantity(dur, Dim::time);
            r["seed_mean"] = seed_mean;
            break;
        }
        case ScenarioKind::criticality_1d: {
            allow_keys(sc, P, {"rabi_values", "duration", "seed_mean", "window_lo_frac",
                               "window_hi_frac"});
            auto rabis = quantity_list(require(sc, P, "rabi_values"), P + ".rabi_values",
                                       Dim::frequency, tp);
            double dur = times(require(sc, P, "duration"), P + ".duration");
            double seed_mean = number(require(sc, P, "seed_mean"), P + ".seed_mean");
            json ra = json::array();
            for (double v : rabis) ra.push_back(resolved_quantity(v, Dim::frequency));
            r["rabi_values"] = ra;
            r["duration"] = resolved_quantity(dur, Dim::time);
            r["seed_mean"] = seed_mean;
            r["window_lo_frac"] = sc.contains("window_lo_frac")
                                      ? number(sc["window_lo_frac"], P + ".window_lo_frac")
                                      : 0.02;
            r["window_hi_frac"] = sc.contains("window_hi_frac")
                                      ? number(sc["window_hi_frac"], P + ".window_hi_frac")
                                      : 0.5;
            break;
        }
        case ScenarioKind::deexcitation_spectrum: {
            allow_keys(sc, P, {"build_duration", "build_seed_mean", "deex_duration", "deex_rabi",
                               "deex_detunings", "cases"});
            double bd = times(require(sc, P, "build_duration"), P + ".build_duration");
            double bs = number(require(sc, P, "build_seed_mean"), P + ".build_seed_mean");
            double dd = times(require(sc, P, "deex_duration"), P + ".deex_duration");
            double dr = quantity(require(sc, P, "deex_rabi"), P + ".deex_rabi", Dim::frequency, tp);
            auto dets = quantity_list(require(sc, P, "deex_detunings"), P + ".deex_detunings",
                                      Dim::frequency, tp);
            const json& cases = require(sc, P, "cases");
            if (!cases.is_array() || cases.empty())
                throw config_error(P + ".cases: expected a non-empty array");
            json rcases = json::array();
            for (std::size_t i = 0; i < cases.size(); ++i) {
                std::string cp = P + ".cases[" + std::to_string(i) + "]";
                allow_keys(cases[i], cp, {"dark_time", "motion"});
                double dark = times(require(cases[i], cp, "dark_time"), cp + ".dark_time");
                bool motion = boolean(require(cases[i], cp, "motion"), cp + ".motion");
                rcases.push_back(json{{"dark_time", resolved_quantity(dark, Dim::time)},
                                      {"motion", motion}});
            }
            json da = json::array();
            for (double v : dets) da.push_back(resolved_quantity(v, Dim::frequency));
            r["build_duration"] = resolved_quantity(bd, Dim::time);
            r["build_seed_mean"] = bs;
            r["deex_duration"] = resolved_quantity(dd, Dim::time);
            r["deex_rabi"] = resolved_quantity(dr, Dim::frequency);
            r["deex_detunings"] = da;
            r["cases"] = rcases;
            break;
        }
        case ScenarioKind::qjmc_histogram: {
            allow_keys(sc, P, {"t_end", "bins"});
            double te = times(require(sc, P, "t_end"), P + ".t_end");
            int bins = sc.contains("bins") ? int(uinteger(sc["bins"], P + ".bins")) : 20;
            r["t_end"] = resolved_quantity(te, Dim::time);
            r["bins"] = bins;
            break;
        }
        case ScenarioKind::meanfield_scan: {
            allow_keys(sc, P, {"model", "rate_fac_values", "rate_spon", "rabi_values"});
            std::string model = text(require(sc, P, "model"), P + ".model");
            r["model"] = model;
            if (model == "classical") {
                auto vals = require(sc, P, "rate_fac_values");
                if (!vals.is_array()) throw config_error(P + ".rate_fac_values: expected an array");
                json arr = json::array();
                for (std::size_t i = 0; i < vals.size(); ++i)
                    arr.push_back(resolved_quantity(
                        quantity(vals[i], P + ".rate_fac_values[" + std::to_string(i) + "]",
                                 Dim::rate, 1.0),
                        Dim::rate));
                r["rate_fac_values"] = arr;
                r["rate_spon"] = resolved_quantity(
                    sc.contains("rate_spon")
                        ? quantity(sc["rate_spon"], P + ".rate_spon", Dim::rate, 1.0)
                        : 0.0,
                    Dim::rate);
            } else if (model == "quantum") {
                auto rabis = quantity_list(require(sc, P, "rabi_values"), P + ".rabi_values",
                                           Dim::frequency, tp);
                json arr = json::array();
                for (double v : rabis) arr.push_back(resolved_quantity(v, Dim::frequency));
                r["rabi_values"] = arr;
            } else {
                throw config_error(P + ".model: must be 'classical' or 'quantum'");
            }
            break;
        }
        case ScenarioKind::collapse_demo: {
            allow_keys(sc, P, {"rabi_values", "tau_min", "tau_max", "tau_count"});
            auto rabis = quantity_list(require(sc, P, "rabi_values"), P + ".rabi_values",
                                       Dim::frequency, tp);
            if (rabis.size() < 2) throw config_error(P + ".rabi_values: need at least two drives");
            json arr = json::array();
            for (double v : rabis) arr.push_back(resolved_quantity(v, Dim::frequency));
            r["rabi_values"] = arr;
            r["tau_min"] = sc.contains("tau_min") ? number(sc["tau_min"], P + ".tau_min") : 0.1;
            r["tau_max"] = sc.contains("tau_max") ? number(sc["tau_max"], P + ".tau_max") : 2.0;
            r["tau_count"] = sc.contains("tau_count")
                                 ? int(uinteger(sc["tau_count"], P + ".tau_count"))
                                 : 12;
            break;
        }
    }
    s.scan = r;
    resolved["scan"] = r;
}

} // namespace cfgdetail

inline Scenario parse_scenario(const json& root) {
    using namespace cfgdetail;
    allow_keys(root, "config", {"scenario", "physics", "geometry", "protocol", "scan", "output"});
    Scenario s;
    json resolved = json::object();
    double tp = units::two_pi;
    parse_physics(root, s, tp, resolved);
    parse_geometry(root, s, tp, resolved);
    parse_protocol(root, s, tp, resolved);
    parse_scenario_section(root, s, tp, resolved);
    parse_scan(root, s, tp, resolved);
    if (root.contains("output")) {
        allow_keys(root["output"], "output", {"prefix"});
        resolved["output"] = root["output"];
    } else {
        resolved["output"] = json::object();
    }
    s.resolved = resolved;
    return s;
}

// ---------------------------------------------------------------------------
// execution

namespace scenariodetail {

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    if (n == 1) {
        v.push_back(b);
        return v;
    }
    for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * double(i) / double(n - 1));
    return v;
}

inline double qty(const json& j) { return j.at("value").get<double>(); }

struct SeriesStats {
    std::vector<double> mean, se;
};

inline SeriesStats ensemble_series(const EnsembleResult& ens) {
    return {ens.mean_counts(), ens.stderr_counts()};
}

inline Table n_of_t_table(const std::string& key_name, double key, const EnsembleResult& ens,
                          Table table) {
    auto st = ensemble_series(ens);
    for (std::size_t i = 0; i < ens.record_times.size(); ++i) {
        auto rb = table.row();
        if (!key_name.empty()) rb.num(key);
        rb.num(ens.record_times[i]).num(st.mean[i]).num(st.se[i]).done();
    }
    return table;
}

inline OutputBundle run_blockade_growth(const Scenario& s) {
    OutputBundle out;
    double duration = qty(s.scan.at("duration"));
    double volume = qty(s.scan.at("interaction_volume"));
    int window = s.scan.at("smoothing_window").get<int>();
    int record_count = s.scan.at("record_count").get<int>();

    KmcConfig cfg = s.engine;
    cfg.rng_seed = s.run.seed;
    cfg.trajectories = s.run.trajectories;
    cfg.record_times = linspace(duration / record_count, duration, record_count);
    ProtocolSegment seg{duration, DriveMode::excitation, s.physics.rabi, s.physics.detuning, {}};
    auto ens = run_ensemble(s.geometry, s.physics, {seg}, cfg, s.run.threads);
    auto st = ensemble_series(ens);

    Table nt{"n_of_t", {"time_us", "mean_n", "stderr_n"}, {}};
    out.tables.push_back(n_of_t_table("", 0, ens, nt));

    auto growth = growth_rate_curve(ens.record_times, st.mean, double(s.geometry.atom_count),
                                    window, volume);
    Table gr{"growth_rate", {"time_us", "spacing_um", "rate_per_atom", "smoothed_n"}, {}};
    for (const auto& p : growth)
        gr.row().num(p.time).num(p.spacing).num(p.rate).num(p.count).done();
    out.tables.push_back(std::move(gr));

    Table mq{"mandel_q", {"time_us", "q"}, {}};
    for (std::size_t i = 0; i < ens.record_times.size(); ++i) {
        CountRecord rec;
        for (const auto& tr : ens.trajectories) rec.shots.push_back(tr.counts[i]);
        double q;
        try {
            q = mandel_q(rec);
        } catch (const undefined_statistic&) {
            continue;
        }
        mq.row().num(ens.record_times[i]).num(q).done();
    }
    out.tables.push_back(std::move(mq));
    return out;
}

inline OutputBundle run_facilitation(const Scenario& s) {
    OutputBundle out;
    double duration = qty(s.scan.at("duration"));
    int record_count = s.scan.at("record_count").get<int>();
    Table nt{"n_of_t", {"detuning_rad_per_us", "time_us", "mean_n", "stderr_n"}, {}};
    Table mq{"mandel_q", {"detuning_rad_per_us", "time_us", "q"}, {}};
    int idx = 0;
    for (const auto& dj : s.scan.at("detunings")) {
        double det = qty(dj);
        KmcConfig cfg = s.engine;
        cfg.rng_seed = s.run.seed + std::uint64_t(idx) * 1000003ull;
        cfg.trajectories = s.run.trajectories;
        cfg.record_times = linspace(duration / record_count, duration, record_count);
        ProtocolSegment seg{duration, DriveMode::excitation, s.physics.rabi, det, {}};
        auto ens = run_ensemble(s.geometry, s.physics, {seg}, cfg, s.run.threads);
        nt = n_of_t_table("detuning", det, ens, std::move(nt));
        for (std::size_t i = 0; i < ens.record_times.size(); ++i) {
            CountRecord rec;
            for (const auto& tr : ens.trajectories) rec.shots.push_back(tr.counts[i]);
            try {
                mq.row().num(det).num(ens.record_times[i]).num(mandel_q(rec)).done();
            } catch (const undefined_statistic&) {
            }
        }
        ++idx;
    }
    out.tables.push_back(std::move(nt));
    out.tables.push_back(std::move(mq));
    return out;
}

inline OutputBundle run_seeded_facilitation(const Scenario& s) {
    OutputBundle out;
    double duration = qty(s.scan.at("drive_duration"));
    int record_count = s.scan.at("record_count").get<int>();
    Table nt{"n_of_t", {"mean_seeds", "time_us", "mean_n", "stderr_n"}, {}};
    Table fin{"final_vs_seeds",
              {"mean_seeds", "mean_n", "q", "mean_detected", "q_detected"},
              {}};
    int idx = 0;
    for (const auto& smj : s.scan.at("seed_means")) {
        double seeds = smj.get<double>();
        KmcConfig cfg = s.engine;
        cfg.rng_seed = s.run.seed + std::uint64_t(idx) * 7777843ull;
        cfg.trajectories = s.run.trajectories;
        cfg.record_times = linspace(duration / record_count, duration, record_count);
        ProtocolSegment seg{duration, DriveMode::excitation, s.physics.rabi, s.physics.detuning,
                            SeedInjection{seeds}};
        auto ens = run_ensemble(s.geometry, s.physics, {seg}, cfg, s.run.threads);
        nt = n_of_t_table("mean_seeds", seeds, ens, std::move(nt));

        CountRecord rec;
        for (const auto& tr : ens.trajectories) rec.shots.push_back(tr.counts.back());
        Rng thinner(s.run.seed ^ 0x5eedull, std::uint64_t(idx));
        CountRecord det = thin_counts(rec, s.physics.detection_eff, thinner);
        auto safe_q = [](const CountRecord& r) {
            try {
                return mandel_q(r);
            } catch (const undefined_statistic&) {
                return 0.0;
            }
        };
        fin.row()
            .num(seeds)
            .num(rec.mean())
            .num(safe_q(rec))
            .num(det.mean())
            .num(safe_q(det))
            .done();
        ++idx;
    }
    out.tables.push_back(std::move(nt));
    out.tables.push_back(std::move(fin));
    return out;
}

inline OutputBundle run_phase_diagram(const Scenario& s) {
    OutputBundle out;
    double duration = qty(s.scan.at("duration"));
    double seed_mean = s.scan.at("seed_mean").get<double>();
    Table t{"mean_n", {"rabi_rad_per_us", "detuning_rad_per_us", "mean_n", "var_n"}, {}};
    int idx = 0;
    for (const auto& dj : s.scan.at("detuning_values")) {
        for (const auto& rj : s.scan.at("rabi_values")) {
            double det = qty(dj), rabi = qty(rj);
            KmcConfig cfg = s.engine;
            cfg.rng_seed = s.run.seed + std::uint64_t(idx) * 64007ull;
            cfg.trajectories = s.run.trajectories;
            cfg.record_times = {duration};
            ProtocolSegment seg{duration, DriveMode::excitation, rabi, det,
                                SeedInjection{seed_mean}};
            auto ens = run_ensemble(s.geometry, s.physics, {seg}, cfg, s.run.threads);
            CountRecord rec;
            for (const auto& tr : ens.trajectories) rec.shots.push_back(tr.counts[0]);
            t.row().num(rabi).num(det).num(rec.mean()).num(rec.variance()).done();
            ++idx;
        }
    }
    out.tables.push_back(std::move(t));
    return out;
}

inline OutputBundle run_criticality(const Scenario& s) {
    OutputBundle out;
    double duration = qty(s.scan.at("duration"));
    double seed_mean = s.scan.at("seed_mean").get<double>();
    PowerLawOptions popt;
    popt.window_lo_frac = s.scan.at("window_lo_frac").get<double>();
    popt.window_hi_frac = s.scan.at("window_hi_frac").get<double>();

    Table dens{"density_scan", {"rabi_rad_per_us", "n_ss", "stderr_n_ss"}, {}};
    std::vector<std::pair<double, double>> points;
    int idx = 0;
    for (const auto& rj : s.scan.at("rabi_values")) {
        double rabi = qty(rj);
        KmcConfig cfg = s.engine;
        cfg.kernel = RateKernel::contact;
        cfg.rng_seed = s.run.seed + std::uint64_t(idx) * 90001ull;
        cfg.trajectories = s.run.trajectories;
        cfg.record_times = linspace(duration / 2, duration, 17); // quasi-stationary window
        ProtocolSegment seg{duration, DriveMode::excitation, rabi, s.physics.detuning,
                            SeedInjection{seed_mean}};
        auto ens = run_ensemble(s.geometry, s.physics, {seg}, cfg, s.run.threads);
        double L = double(s.geometry.atom_count);
        std::vector<double> per_traj;
        for (const auto& tr : ens.trajectories) {
            double acc = 0;
            for (auto c : tr.counts) acc += double(c);
            per_traj.push_back(acc / double(tr.counts.size()) / L);
        }
        double mean = 0;
        for (double v : per_traj) mean += v;
        mean /= double(per_traj.size());
        double var = 0;
        for (double v : per_traj) var += (v - mean) * (v - mean);
        double se = per_traj.size() > 1
                        ? std::sqrt(var / double(per_traj.size() - 1) / double(per_traj.size()))
                        : 0.0;
        dens.row().num(rabi).num(mean).num(se).done();
        points.push_back({rabi, mean});
        ++idx;
    }
    out.tables.push_back(std::move(dens));

    Table fit{"powerlaw_fit", {"beta", "omega_c_rad_per_us", "goodness", "window_lo", "window_hi"},
              {}};
    auto f = fit_powerlaw_beta(points, popt);
    fit.row().num(f.beta).num(f.omega_c).num(f.goodness).num(f.fit_window.first)
        .num(f.fit_window.second).done();
    out.tables.push_back(std::move(fit));
    return out;
}

inline OutputBundle run_deexcitation(const Scenario& s) {
    OutputBundle out;
    double build_dur = qty(s.scan.at("build_duration"));
    double build_seeds = s.scan.at("build_seed_mean").get<double>();
    double deex_dur = qty(s.scan.at("deex_duration"));
    double deex_rabi = qty(s.scan.at("deex_rabi"));

    Table t{"remaining_fraction",
            {"dark_time_us", "motion", "detuning_rad_per_us", "fraction", "stderr_fraction",
             "mean_n_in"},
            {}};
    int case_idx = 0;
    for (const auto& cj : s.scan.at("cases")) {
        double dark = qty(cj.at("dark_time"));
        bool motion = cj.at("motion").get<bool>();
        int det_idx = 0;
        for (const auto& dj : s.scan.at("deex_detunings")) {
            double det = qty(dj);
            KmcConfig cfg = s.engine;
            cfg.motion_enabled = motion;
            cfg.rng_seed = s.run.seed + std::uint64_t(case_idx) * 17000023ull +
                           std::uint64_t(det_idx) * 971ull;
            cfg.trajectories = s.run.trajectories;
            cfg.record_times = {build_dur + dark, build_dur + dark + deex_dur};
            std::vector<ProtocolSegment> segs{
                {build_dur, DriveMode::excitation, s.physics.rabi, s.physics.detuning,
                 SeedInjection{build_seeds}},
                {dark, DriveMode::off, 0, 0, {}},
                {deex_dur, DriveMode::deexcitation, deex_rabi, det, {}},
            };
            auto ens = run_ensemble(s.geometry, s.physics, segs, cfg, s.run.threads);
            double in_sum = 0, end_sum = 0, in2 = 0, end2 = 0;
            double m = double(ens.trajectories.size());
            for (const auto& tr : ens.trajectories) {
                in_sum += tr.counts[0];
                end_sum += tr.counts[1];
                in2 += double(tr.counts[0]) * tr.counts[0];
                end2 += double(tr.counts[1]) * tr.counts[1];
            }
            double mean_in = in_sum / m, mean_end = end_sum / m;
            double frac = mean_in > 0 ? mean_end / mean_in : 0.0;
            double se = 0;
            if (mean_in > 0 && m > 1) {
                double v_in = (in2 / m - mean_in * mean_in) / (m - 1);
                double v_end = (end2 / m - mean_end * mean_end) / (m - 1);
                double rel = v_end / (mean_end * mean_end + 1e-300) + v_in / (mean_in * mean_in);
                se = frac * std::sqrt(std::max(0.0, rel));
            }
            t.row().num(dark).text(motion ? "on" : "off").num(det).num(frac).num(se).num(mean_in)
                .done();
            ++det_idx;
        }
        ++case_idx;
    }
    out.tables.push_back(std::move(t));
    return out;
}

inline OutputBundle run_qjmc_histogram(const Scenario& s) {
    OutputBundle out;
    if (s.geometry.mode != GeometryMode::lattice || s.geometry.dimension != 1)
        throw config_error("qjmc_histogram: geometry must be a 1D lattice (chain)");
    ChainModel m;
    m.sites = int(s.geometry.atom_count);
    m.rabi = s.physics.rabi;
    m.decay = s.physics.decay;
    m.boundary = s.geometry.boundary;
    double t_end = qty(s.scan.at("t_end"));
    int bins = s.scan.at("bins").get<int>();
    auto hist = qjmc_histogram(m, t_end, s.run.trajectories, s.run.seed, bins, s.run.threads);
    Table t{"histogram", {"bin_lo", "bin_hi", "probability"}, {}};
    for (int b = 0; b < bins; ++b)
        t.row().num(hist.bin_edges[b]).num(hist.bin_edges[b + 1]).num(hist.probability[b]).done();
    out.tables.push_back(std::move(t));
    return out;
}

inline OutputBundle run_meanfield_scan(const Scenario& s) {
    OutputBundle out;
    std::string model = s.scan.at("model").get<std::string>();
    if (model == "classical") {
        double rate_spon = qty(s.scan.at("rate_spon"));
        Table t{"stationary",
                {"rate_fac_per_us", "selected_density", "root_count", "roots", "stable_flags"},
                {}};
        for (const auto& gj : s.scan.at("rate_fac_values")) {
            double gf = qty(gj);
            auto roots = mf_stationary({gf, rate_spon, s.physics.decay});
            double selected = 0;
            std::string rtxt, stxt;
            for (const auto& r : roots) {
                if (r.stable) selected = std::max(selected, r.density);
                rtxt += (rtxt.empty() ? "" : ";") + format_double(r.density);
                stxt += (stxt.empty() ? "" : ";") + std::string(r.stable ? "1" : "0");
            }
            t.row().num(gf).num(selected).integer(static_cast<long long>(roots.size()))
                .text(rtxt).text(stxt).done();
        }
        out.tables.push_back(std::move(t));
    } else {
        Table t{"branches",
                {"rabi_rad_per_us", "absorbing", "n_minus", "n_plus", "threshold_rad_per_us"},
                {}};
        double thr = qmf_threshold(s.physics.decay);
        for (const auto& rj : s.scan.at("rabi_values")) {
            double w = qty(rj);
            auto roots = qmf_stationary(w, s.physics.decay);
            double nm = std::numeric_limits<double>::quiet_NaN();
            double np = std::numeric_limits<double>::quiet_NaN();
            if (roots.size() == 2) nm = np = roots[1].density;
            if (roots.size() == 3) {
                nm = roots[1].density;
                np = roots[2].density;
            }
            t.row().num(w).num(0.0).num(nm).num(np).num(thr).done();
        }
        out.tables.push_back(std::move(t));
    }
    return out;
}

inline OutputBundle run_collapse_demo(const Scenario& s) {
    OutputBundle out;
    double tau_min = s.scan.at("tau_min").get<double>();
    double tau_max = s.scan.at("tau_max").get<double>();
    int tau_count = s.scan.at("tau_count").get<int>();
    auto taus = linspace(tau_min, tau_max, tau_count);

    std::vector<CollapseCurve> curves;
    Table ct{"curves", {"rabi_rad_per_us", "time_us", "tau", "mean_n", "stderr_n"}, {}};
    int idx = 0;
    for (const auto& rj : s.scan.at("rabi_values")) {
        double rabi = qty(rj);
        double gmax = rabi * rabi / (2 * s.physics.dephasing);
        KmcConfig cfg = s.engine;
        cfg.rng_seed = s.run.seed + std::uint64_t(idx) * 4241ull;
        cfg.trajectories = s.run.trajectories;
        for (double tau : taus) cfg.record_times.push_back(tau / gmax);
        ProtocolSegment seg{taus.back() / gmax, DriveMode::excitation, rabi, 0.0, {}};
        auto ens = run_ensemble(s.geometry, s.physics, {seg}, cfg, s.run.threads);
        auto st = ensemble_series(ens);
        CollapseCurve c;
        c.times = cfg.record_times;
        c.values = st.mean;
        c.stderrs = st.se;
        c.label = rabi;
        for (std::size_t i = 0; i < taus.size(); ++i)
            ct.row().num(rabi).num(c.times[i]).num(taus[i]).num(c.values[i]).num(c.stderrs[i])
                .done();
        curves.push_back(std::move(c));
        ++idx;
    }
    out.tables.push_back(std::move(ct));
    // rescaled deviation in combined-stderr units
    auto res = collapse_check(curves, CollapseMode::incoherent_rescale, s.physics.dephasing);
    Table dt{"collapse", {"max_deviation_sigma"}, {}};
    dt.row().num(res.max_deviation).done();
    out.tables.push_back(std::move(dt));
    return out;
}

} // namespace scenariodetail

inline OutputBundle run_scenario(const Scenario& s) {
    auto t0 = std::chrono::steady_clock::now();
    OutputBundle out;
    switch (s.kind) {
        case ScenarioKind::blockade_growth: out = scenariodetail::run_blockade_growth(s); break;
        case ScenarioKind::facilitation: out = scenariodetail::run_facilitation(s); break;
        case ScenarioKind::seeded_facilitation:
            out = scenariodetail::run_seeded_facilitation(s);
            break;
        case ScenarioKind::phase_diagram: out = scenariodetail::run_phase_diagram(s); break;
        case ScenarioKind::criticality_1d: out = scenariodetail::run_criticality(s); break;
        case ScenarioKind::deexcitation_spectrum:
            out = scenariodetail::run_deexcitation(s);
            break;
        case ScenarioKind::qjmc_histogram: out = scenariodetail::run_qjmc_histogram(s); break;
        case ScenarioKind::meanfield_scan: out = scenariodetail::run_meanfield_scan(s); break;
        case ScenarioKind::collapse_demo: out = scenariodetail::run_collapse_demo(s); break;
    }
    out.scenario_name = s.kind_name;
    out.resolved_config = s.resolved_text();
    out.seed = s.run.seed;
    out.threads_requested = s.run.threads;
    out.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

} // namespace rydkin
