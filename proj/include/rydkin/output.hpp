#pragma once

// Result tables and the run manifest. Tables are plain CSV (comma separator,
// header row, '.' decimal point, locale-independent formatting) and must be
// byte-identical across reruns with the same config and seed, so every cell
// is formatted once, at insertion time.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "version.hpp"

namespace rydkin {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Table {
    std::string observable; // file becomes <scenario>__<observable>.csv
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    struct RowBuilder {
        Table* t;
        std::vector<std::string> cells;
        RowBuilder& num(double v) {
            cells.push_back(format_double(v));
            return *this;
        }
        RowBuilder& integer(long long v) {
            cells.push_back(std::to_string(v));
            return *this;
        }
        RowBuilder& text(std::string s) {
            cells.push_back(std::move(s));
            return *this;
        }
        void done() { t->rows.push_back(std::move(cells)); }
    };
    RowBuilder row() { return RowBuilder{this, {}}; }

    std::string render() const {
        std::string out;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out += ',';
            out += header[i];
        }
        out += '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) out += ',';
                out += r[i];
            }
            out += '\n';
        }
        return out;
    }
};

struct OutputBundle {
    std::string scenario_name;
    std::vector<Table> tables;
    std::string resolved_config; // canonical JSON text
    std::uint64_t seed = 0;
    unsigned threads_requested = 0;
    double wall_clock_seconds = 0;
};

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

struct WrittenFile {
    std::string name;
    std::uint64_t checksum = 0;
    std::size_t rows = 0;
};

// Writes one CSV per table plus the `manifest`; returns what was written.
inline std::vector<WrittenFile> serialize_results(const OutputBundle& bundle,
                                                  const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("serialize_results: cannot create " + out_dir.string() +
                                     ": " + ec.message());
    std::vector<WrittenFile> written;
    for (const auto& t : bundle.tables) {
        std::string name = bundle.scenario_name + "__" + t.observable + ".csv";
        std::string body = t.render();
        auto path = out_dir / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("serialize_results: cannot open " + path.string());
        f << body;
        if (!f) throw std::runtime_error("serialize_results: write failed: " + path.string());
        written.push_back({name, fnv1a64(body), t.rows.size()});
    }

    std::string m;
    m += "rydkin run manifest\n";
    m += "scenario: " + bundle.scenario_name + "\n";
    m += std::string("code_version: ") + code_version + "\n";
    m += "seed: " + std::to_string(bundle.seed) + "\n";
    m += "threads_requested: " + std::to_string(bundle.threads_requested) + "\n";
    m += "wall_clock_seconds: " + format_double(bundle.wall_clock_seconds) + "\n";
    m += "outputs:\n";
    for (const auto& w : written) {
        char sum[24];
        std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(w.checksum));
        m += "  " + w.name + " fnv1a64=" + sum + " rows=" + std::to_string(w.rows) + "\n";
    }
    m += "resolved_config:\n";
    // indent the canonical JSON under the key
    std::string line;
    for (char c : bundle.resolved_config) {
        if (c == '\n') {
            m += "  " + line + "\n";
            line.clear();
        } else {
            line += c;
        }
    }
    if (!line.empty()) m += "  " + line + "\n";

    auto mpath = out_dir / "manifest";
    std::ofstream mf(mpath, std::ios::binary);
    if (!mf) throw std::runtime_error("serialize_results: cannot open " + mpath.string());
    mf << m;
    if (!mf) throw std::runtime_error("serialize_results: write failed: " + mpath.string());
    return written;
}

} // namespace rydkin
