#pragma once

// Built-in scenario presets mirroring the quoted experimental parameters
// (70S rubidium: C6 = 869.7 GHz um^6, gamma = 2pi x 0.7 MHz, kappa = 1/80 us,
// eta = 0.4, two-photon Rabi frequencies up to 2pi x 250 kHz), sized so each
// demo completes on a desktop. The files under presets/ are generated from
// these strings via `rydkin <kind> --dump-preset`.

#include <map>
#include <string>

#include "errors.hpp"

namespace rydkin {

namespace presetdetail {

inline const std::map<std::string, std::pair<const char*, const char*>>& table() {
    static const std::map<std::string, std::pair<const char*, const char*>> presets{

        {"blockade_growth",
         {"resonant excitation of a dense lattice gas: growth curve, growth rate vs spacing, Mandel Q",
          R"json({
  "scenario": {"kind": "blockade_growth", "seed": 1, "trajectories": 100},
  "physics": {
    "rabi": {"value": 0.25, "unit": "MHz"},
    "detuning": {"value": 0, "unit": "MHz"},
    "dephasing": {"value": 0.7, "unit": "MHz"},
    "decay": {"value": 0, "unit": "1/us"},
    "c6": {"value": 869.7, "unit": "GHz um^6"},
    "detection_eff": 0.4
  },
  "geometry": {"mode": "lattice", "dimension": 3, "atom_count": 1000,
               "lattice_spacing": {"value": 4, "unit": "um"}, "boundary": "open"},
  "scan": {"duration": {"value": 40, "unit": "us"},
           "interaction_volume": {"value": 64000, "unit": "um^3"},
           "smoothing_window": 5, "record_count": 60}
})json"}},

        {"facilitation",
         {"off-resonant drive of a 3D cloud at +Delta, -Delta and resonance: nucleation and avalanche stages",
          R"json({
  "scenario": {"kind": "facilitation", "seed": 1, "trajectories": 60},
  "physics": {
    "rabi": {"value": 0.25, "unit": "MHz"},
    "detuning": {"value": 19, "unit": "MHz"},
    "dephasing": {"value": 0.7, "unit": "MHz"},
    "decay": {"value": 0, "unit": "1/us"},
    "c6": {"value": 869.7, "unit": "GHz um^6"},
    "detection_eff": 0.4
  },
  "geometry": {"mode": "continuum", "dimension": 3, "atom_count": 2000,
               "cloud": {"shape": "gaussian",
                         "sigma_x": {"value": 12, "unit": "um"},
                         "sigma_y": {"value": 12, "unit": "um"},
                         "sigma_z": {"value": 12, "unit": "um"}}},
  "scan": {"duration": {"value": 60, "unit": "us"}, "record_count": 40,
           "detunings": [{"value": 19, "unit": "MHz"},
                          {"value": -19, "unit": "MHz"},
                          {"value": 0, "unit": "MHz"}]}
})json"}},

        {"seeded_facilitation",
         {"seed pulse plus strongly detuned drive: avalanche statistics vs mean seed number",
          R"json({
  "scenario": {"kind": "seeded_facilitation", "seed": 1, "trajectories": 100},
  "physics": {
    "rabi": {"value": 0.25, "unit": "MHz"},
    "detuning": {"value": 75, "unit": "MHz"},
    "dephasing": {"value": 0.7, "unit": "MHz"},
    "decay": {"value": 0, "unit": "1/us"},
    "c6": {"value": 869.7, "unit": "GHz um^6"},
    "detection_eff": 0.4
  },
  "geometry": {"mode": "continuum", "dimension": 3, "atom_count": 2000,
               "cloud": {"shape": "gaussian",
                         "sigma_x": {"value": 12, "unit": "um"},
                         "sigma_y": {"value": 12, "unit": "um"},
                         "sigma_z": {"value": 12, "unit": "um"}}},
  "scan": {"drive_duration": {"value": 70, "unit": "us"}, "record_count": 30,
           "seed_means": [0.25, 0.5, 1, 2, 3, 5, 8, 12]}
})json"}},

        {"phase_diagram",
         {"seeded off-resonant drive scanned over (Omega, Delta): absorbing versus active stationary states",
          R"json({
  "scenario": {"kind": "phase_diagram", "seed": 1, "trajectories": 40},
  "physics": {
    "rabi": {"value": 0.25, "unit": "MHz"},
    "detuning": {"value": 16, "unit": "MHz"},
    "dephasing": {"value": 0.7, "unit": "MHz"},
    "decay": {"value": 0.0125, "unit": "1/us"},
    "c6": {"value": 869.7, "unit": "GHz um^6"},
    "detection_eff": 0.4
  },
  "geometry": {"mode": "continuum", "dimension": 3, "atom_count": 600,
               "cloud": {"shape": "cylinder",
                         "radius": {"value": 3.5, "unit": "um"},
                         "length": {"value": 100, "unit": "um"}}},
  "scan": {"duration": {"value": 200, "unit": "us"}, "seed_mean": 6,
           "rabi_values": [{"value": 0.03, "unit": "MHz"}, {"value": 0.06, "unit": "MHz"},
                            {"value": 0.1, "unit": "MHz"}, {"value": 0.15, "unit": "MHz"},
                            {"value": 0.2, "unit": "MHz"}, {"value": 0.25, "unit": "MHz"}],
           "detuning_values": [{"value": 8, "unit": "MHz"}, {"value": 16, "unit": "MHz"},
                                {"value": 24, "unit": "MHz"}]}
})json"}},

        {"criticality_1d",
         {"1D facilitation lattice with decay (spontaneous channel off): stationary-density scan and power-law fit",
          R"json({
  "scenario": {"kind": "criticality_1d", "seed": 1, "trajectories": 48,
               "kernel": "contact", "spontaneous": false},
  "physics": {
    "rabi": {"value": 0.1, "unit": "MHz"},
    "detuning": {"value": 10, "unit": "MHz"},
    "dephasing": {"value": 0.7, "unit": "MHz"},
    "decay": {"value": 0.0125, "unit": "1/us"},
    "c6": {"value": 869.7, "unit": "GHz um^6"},
    "detection_eff": 0.4
  },
  "geometry": {"mode": "lattice", "dimension": 1, "atom_count": 1024,
               "lattice_spacing": {"value": 5.98, "unit": "um"}, "boundary": "periodic"},
  "scan": {"duration": {"value": 8000, "unit": "us"}, "seed_mean": 6,
           "rabi_values": [{"value": 0.055, "unit": "MHz"}, {"value": 0.06, "unit": "MHz"},
                            {"value": 0.065, "unit": "MHz"}, {"value": 0.07, "unit": "MHz"},
                            {"value": 0.075, "unit": "MHz"}, {"value": 0.08, "unit": "MHz"},
                            {"value": 0.09, "unit": "MHz"}, {"value": 0.1, "unit": "MHz"},
                            {"value": 0.11, "unit": "MHz"}, {"value": 0.125, "unit": "MHz"},
                            {"value": 0.14, "unit": "MHz"}, {"value": 0.16, "unit": "MHz"}]}
})json"}},

        {"deexcitation_spectrum",
         {"facilitation-built chain, dark time, then a de-excitation frequency scan: interaction-shifted resonances",
          R"json({
  "scenario": {"kind": "deexcitation_spectrum", "seed": 1, "trajectories": 150,
               "motion": {"enabled": false,
                          "update_interval": {"value": 0.5, "unit": "us"},
                          "mean_speed": {"value": 0.11, "unit": "um/us"}}},
  "physics": {
    "rabi": {"value": 0.25, "unit": "MHz"},
    "detuning": {"value": 16, "unit": "MHz"},
    "dephasing": {"value": 0.7, "unit": "MHz"},
    "decay": {"value": 0.0125, "unit": "1/us"},
    "c6": {"value": 869.7, "unit": "GHz um^6"},
    "detection_eff": 0.4
  },
  "geometry": {"mode": "continuum", "dimension": 3, "atom_count": 1200,
               "cloud": {"shape": "cylinder",
                         "radius": {"value": 0.3, "unit": "um"},
                         "length": {"value": 120, "unit": "um"}}},
  "scan": {"build_duration": {"value": 4, "unit": "us"}, "build_seed_mean": 6,
           "deex_duration": {"value": 2, "unit": "us"},
           "deex_rabi": {"value": 1, "unit": "MHz"},
           "deex_detunings": [{"value": -4, "unit": "MHz"}, {"value": -2, "unit": "MHz"},
                               {"value": 0, "unit": "MHz"}, {"value": 2, "unit": "MHz"},
                               {"value": 4, "unit": "MHz"}, {"value": 6, "unit": "MHz"},
                               {"value": 8, "unit": "MHz"}, {"value": 10, "unit": "MHz"},
                               {"value": 12, "unit": "MHz"}, {"value": 14, "unit": "MHz"},
                               {"value": 16, "unit": "MHz"}, {"value": 18, "unit": "MHz"},
                               {"value": 20, "unit": "MHz"}, {"value": 22, "unit": "MHz"},
                               {"value": 24, "unit": "MHz"}, {"value": 26, "unit": "MHz"},
                               {"value": 28, "unit": "MHz"}, {"value": 30, "unit": "MHz"},
                               {"value": 32, "unit": "MHz"}, {"value": 34, "unit": "MHz"},
                               {"value": 36, "unit": "MHz"}],
           "cases": [{"dark_time": {"value": 0.5, "unit": "us"}, "motion": false},
                      {"dark_time": {"value": 5, "unit": "us"}, "motion": true}]}
})json"}},

        {"qjmc_histogram",
         {"quantum-jump sampling of the coherent facilitation chain: steady-state density histogram",
          R"json({
  "scenario": {"kind": "qjmc_histogram", "seed": 1, "trajectories": 300},
  "physics": {
    "rabi": {"value": 0.05, "unit": "rad/us"},
    "dephasing": {"value": 0.7, "unit": "MHz"},
    "decay": {"value": 0.0125, "unit": "1/us"},
    "detection_eff": 0.4
  },
  "geometry": {"mode": "lattice", "dimension": 1, "atom_count": 10,
               "lattice_spacing": {"value": 1, "unit": "um"}, "boundary": "open"},
  "scan": {"t_end": {"value": 2000, "unit": "us"}, "bins": 16}
})json"}},

        {"meanfield_scan",
         {"stationary states of the mean-field facilitation equation (classical or quantum model)",
          R"json({
  "scenario": {"kind": "meanfield_scan", "seed": 1, "trajectories": 1},
  "physics": {
    "rabi": {"value": 0.25, "unit": "MHz"},
    "dephasing": {"value": 0.7, "unit": "MHz"},
    "decay": {"value": 0.0125, "unit": "1/us"},
    "detection_eff": 0.4
  },
  "geometry": {"mode": "lattice", "dimension": 1, "atom_count": 1,
               "lattice_spacing": {"value": 1, "unit": "um"}},
  "scan": {"model": "classical", "rate_spon": {"value": 0, "unit": "1/us"},
           "rate_fac_values": [{"value": 0.0025, "unit": "1/us"}, {"value": 0.005, "unit": "1/us"},
                                {"value": 0.0075, "unit": "1/us"}, {"value": 0.01, "unit": "1/us"},
                                {"value": 0.0125, "unit": "1/us"}, {"value": 0.015, "unit": "1/us"},
                                {"value": 0.02, "unit": "1/us"}, {"value": 0.025, "unit": "1/us"},
                                {"value": 0.03, "unit": "1/us"}, {"value": 0.0375, "unit": "1/us"}]}
})json"}},

        {"collapse_demo",
         {"resonant growth curves at several drive strengths, collapsed by the incoherent time rescaling",
          R"json({
  "scenario": {"kind": "collapse_demo", "seed": 1, "trajectories": 200},
  "physics": {
    "rabi": {"value": 0.25, "unit": "MHz"},
    "detuning": {"value": 0, "unit": "MHz"},
    "dephasing": {"value": 0.7, "unit": "MHz"},
    "decay": {"value": 0, "unit": "1/us"},
    "c6": {"value": 869.7, "unit": "GHz um^6"},
    "detection_eff": 0.4
  },
  "geometry": {"mode": "lattice", "dimension": 1, "atom_count": 64,
               "lattice_spacing": {"value": 4, "unit": "um"}, "boundary": "open"},
  "scan": {"rabi_values": [{"value": 0.25, "unit": "MHz"}, {"value": 0.125, "unit": "MHz"}],
           "tau_min": 0.1, "tau_max": 2.0, "tau_count": 12}
})json"}},
    };
    return presets;
}

} // namespace presetdetail

inline std::string preset_config(const std::string& kind) {
    auto it = presetdetail::table().find(kind);
    if (it == presetdetail::table().end())
        throw config_error("no preset for scenario kind '" + kind + "'");
    return it->second.second;
}

inline std::string preset_description(const std::string& kind) {
    auto it = presetdetail::table().find(kind);
    if (it == presetdetail::table().end()) return "";
    return it->second.first;
}

} // namespace rydkin
