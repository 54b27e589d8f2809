// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nsf/field.hpp"
#include "nsf/solver.hpp"

namespace nsf::io {

// full round-trip decimal representation
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---- field snapshot file ----
// Layout (little endian): magic "NSFS", u32 version, u32 dim, u32 n,
// u32 component count, then per component n^dim float64 samples in row
// major order. See docs/formats.md.

inline void write_snapshot(const std::filesystem::path& path, const State& state) {
    const Grid& g = state.grid();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_snapshot: cannot open " + path.string());
    const char magic[4] = {'N', 'S', 'F', 'S'};
    out.write(magic, 4);
    auto write_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    write_u32(1);
    write_u32(static_cast<std::uint32_t>(g.dim));
    write_u32(static_cast<std::uint32_t>(g.n));
    write_u32(static_cast<std::uint32_t>(g.dim + 2));
    auto write_field = [&](const ScalarField& f) {
        out.write(reinterpret_cast<const char*>(f.values().data()),
                  static_cast<std::streamsize>(f.size() * sizeof(double)));
    };
    write_field(state.rho);
    write_field(state.theta);
    for (int d = 0; d < g.dim; ++d) write_field(state.u[d]);
}

inline State read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_snapshot: cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "NSFS", 4) != 0)
        throw std::runtime_error("read_snapshot: bad magic in " + path.string());
    auto read_u32 = [&] {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    std::uint32_t version = read_u32();
    if (version != 1) throw std::runtime_error("read_snapshot: unsupported version");
    int dim = static_cast<int>(read_u32());
    int n = static_cast<int>(read_u32());
    Grid g(dim, n);
    std::uint32_t comps = read_u32();
    if (comps != static_cast<std::uint32_t>(g.dim + 2))
        throw std::runtime_error("read_snapshot: component count mismatch");
    auto read_field = [&] {
        std::vector<double> v(g.total_points());
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
        if (!in) throw std::runtime_error("read_snapshot: truncated file");
        return ScalarField(g, std::move(v));
    };
    ScalarField rho = read_field();
    ScalarField theta = read_field();
    std::vector<ScalarField> u;
    for (int d = 0; d < g.dim; ++d) u.push_back(read_field());
    return State{std::move(rho), std::move(theta), VectorField(std::move(u))};
}

// raw scalar field dump used for ensemble moment fields
inline void write_field_binary(const std::filesystem::path& path, const ScalarField& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_field_binary: cannot open " + path.string());
    const char magic[4] = {'N', 'S', 'F', 'F'};
    out.write(magic, 4);
    auto write_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    write_u32(1);
    write_u32(static_cast<std::uint32_t>(f.grid().dim));
    write_u32(static_cast<std::uint32_t>(f.grid().n));
    write_u32(1);
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.size() * sizeof(double)));
}

// ---- diagnostics CSV ----

inline void write_diagnostics_csv(const std::filesystem::path& path,
                                  const std::vector<DiagnosticsRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_diagnostics_csv: cannot open " + path.string());
    out << "time,mass,energy,entropy,production_integral,min_rho,min_theta,max_rho_plus_theta,dt\n";
    for (const auto& r : records) {
        out << format_double(r.time) << ',' << format_double(r.total_mass) << ','
            << format_double(r.total_energy) << ',' << format_double(r.entropy) << ','
            << format_double(r.entropy_production_integral) << ',' << format_double(r.min_rho)
            << ',' << format_double(r.min_theta) << ',' << format_double(r.max_rho_plus_theta)
            << ',' << format_double(r.dt) << '\n';
    }
}

// ---- hashing (FNV-1a 64) ----

inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

inline std::uint64_t hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("hash_file: cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    return h;
}

}  // namespace nsf::io
