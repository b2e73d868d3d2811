#pragma once

/// On-disk artifact formats. Everything here is byte-deterministic: binary
/// snapshots are explicitly little-endian regardless of host order, CSV
/// numbers print with "%.17g" so doubles round-trip exactly, and the FNV-1a
/// checksum is the fingerprint the run manifest records for every artifact.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mbe/diagnostics.hpp"
#include "mbe/errors.hpp"
#include "mbe/grid.hpp"
#include "mbe/model1d.hpp"
#include "mbe/stability.hpp"

namespace mbe {

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(p[k]) << (8 * k);
    return v;
}

inline double get_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(p[k]) << (8 * k);
    return std::bit_cast<double>(bits);
}

/// Shortest-exact decimal: 17 significant digits round-trip any double.
inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace detail

/// Snapshot layout: 36-byte little-endian header (magic "MBEH", version u32,
/// nx u32, ny u32, bc u8 + 3 zero pad, time f64, lx f64) followed by nx*ny
/// f64 cell values in row-major order (x index outer, y index inner). The y
/// extent is not stored; a loader takes it from the run configuration.
constexpr std::uint32_t kSnapshotVersion = 1;
constexpr std::size_t kSnapshotHeaderBytes = 36;

struct Snapshot {
    std::uint32_t version = kSnapshotVersion;
    int nx = 0;
    int ny = 0;
    Bc bc = Bc::Neumann;
    double time = 0.0;
    double lx = 0.0;
    Array2 values;
};

inline void write_snapshot(const std::filesystem::path& path, const HeightField& h) {
    const Grid& g = h.grid;
    std::string out;
    out.reserve(kSnapshotHeaderBytes + 8u * h.values.data.size());
    out += "MBEH";
    detail::put_u32(out, kSnapshotVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(g.nx));
    detail::put_u32(out, static_cast<std::uint32_t>(g.ny));
    out.push_back(g.bc == Bc::Neumann ? '\0' : '\1');
    out.append(3, '\0');
    detail::put_f64(out, h.time);
    detail::put_f64(out, g.lx);
    for (double v : h.values.data) detail::put_f64(out, v);
    detail::write_text_file(path, out);
}

inline Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path.string());
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() < kSnapshotHeaderBytes)
        throw ValidationError("snapshot too short: " + path.string());
    const unsigned char* p = reinterpret_cast<const unsigned char*>(raw.data());
    if (raw.compare(0, 4, "MBEH") != 0)
        throw ValidationError("bad snapshot magic: " + path.string());

    Snapshot s;
    s.version = detail::get_u32(p + 4);
    if (s.version != kSnapshotVersion)
        throw ValidationError("unsupported snapshot version " + std::to_string(s.version));
    std::uint32_t nx = detail::get_u32(p + 8);
    std::uint32_t ny = detail::get_u32(p + 12);
    if (nx == 0 || ny == 0 || nx > (1u << 20) || ny > (1u << 20))
        throw ValidationError("implausible snapshot shape " + std::to_string(nx) + "x" +
                              std::to_string(ny));
    unsigned bc_byte = p[16];
    if (bc_byte > 1) throw ValidationError("bad snapshot bc byte");
    s.nx = static_cast<int>(nx);
    s.ny = static_cast<int>(ny);
    s.bc = bc_byte == 0 ? Bc::Neumann : Bc::Periodic;
    s.time = detail::get_f64(p + 20);
    s.lx = detail::get_f64(p + 28);

    std::size_t want = kSnapshotHeaderBytes + 8u * static_cast<std::size_t>(nx) * ny;
    if (raw.size() != want)
        throw ValidationError("snapshot size mismatch: have " + std::to_string(raw.size()) +
                              " bytes, header implies " + std::to_string(want));
    s.values = Array2(s.nx, s.ny);
    for (std::size_t k = 0; k < s.values.data.size(); ++k)
        s.values.data[k] = detail::get_f64(p + kSnapshotHeaderBytes + 8 * k);
    return s;
}

/// FNV-1a, 64-bit. Fixed constants, so checksums are portable fingerprints.
inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < size; ++k) {
        h ^= p[k];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string file_checksum(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for checksum: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        std::streamsize got = in.gcount();
        if (got > 0) h = fnv1a64(buf, static_cast<std::size_t>(got), h);
    }
    char hex[32];
    std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return hex;
}

inline void write_diagnostics_csv(const std::filesystem::path& path,
                                  const std::vector<DiagnosticsRecord>& records) {
    std::string out = "time,mass,energy,energy_rate,max_slope,selected_fraction,length_scale\n";
    for (const DiagnosticsRecord& r : records) {
        out += detail::g17(r.time);
        out += ',';
        out += detail::g17(r.mass);
        out += ',';
        out += detail::g17(r.energy);
        out += ',';
        out += detail::g17(r.energy_rate);
        out += ',';
        out += detail::g17(r.max_slope);
        out += ',';
        out += detail::g17(r.selected_fraction);
        out += ',';
        out += detail::g17(r.length_scale);
        out += '\n';
    }
    detail::write_text_file(path, out);
}

inline void write_stability_csv(const std::filesystem::path& path, const StabilityReport& rep) {
    std::string out = "time,u_norm,envelope\n";
    for (std::size_t k = 0; k < rep.times.size(); ++k) {
        out += detail::g17(rep.times[k]);
        out += ',';
        out += detail::g17(rep.u_norm[k]);
        out += ',';
        out += detail::g17(rep.envelope[k]);
        out += '\n';
    }
    detail::write_text_file(path, out);
}

inline void write_histogram_csv(const std::filesystem::path& path, const SlopeStatistics& st) {
    std::string out = "bin_center,count\n";
    for (std::size_t k = 0; k < st.bin_centers.size(); ++k) {
        out += detail::g17(st.bin_centers[k]);
        out += ',';
        out += std::to_string(st.counts[k]);
        out += '\n';
    }
    detail::write_text_file(path, out);
}

inline void write_ledger_csv(const std::filesystem::path& path,
                             const std::vector<Ledger1DRow>& rows) {
    std::string out = "time,h_sq,int_hxx_sq_dt,int_hx4_dxdt,hx_sq,int_hxxx_sq_dt,int_3hx2hxx2_dt\n";
    for (const Ledger1DRow& r : rows) {
        out += detail::g17(r.time);
        out += ',';
        out += detail::g17(r.h_sq);
        out += ',';
        out += detail::g17(r.int_hxx_sq_dt);
        out += ',';
        out += detail::g17(r.int_hx4_dxdt);
        out += ',';
        out += detail::g17(r.hx_sq);
        out += ',';
        out += detail::g17(r.int_hxxx_sq_dt);
        out += ',';
        out += detail::g17(r.int_3hx2hxx2_dt);
        out += '\n';
    }
    detail::write_text_file(path, out);
}

}  // namespace mbe
