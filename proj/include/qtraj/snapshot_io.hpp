#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "qtraj/errors.hpp"
#include "qtraj/grid.hpp"
#include "qtraj/wavefield.hpp"

namespace qtraj {

// Snapshot container: fixed binary header + raw little-endian float64
// interleaved (re, im) payload, plus a plain-text ".meta" sidecar carrying
// the same header fields as key=value lines.

namespace detail {

inline constexpr char kSnapshotMagic[8] = {'Q', 'T', 'R', 'J', 'S', 'N', 'A', 'P'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

template <class T>
void write_le(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> b{};
  std::memcpy(b.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  os.write(reinterpret_cast<const char*>(b.data()), sizeof(T));
}

template <class T>
T read_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> b{};
  is.read(reinterpret_cast<char*>(b.data()), sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

}  // namespace detail

inline void write_snapshot(const std::filesystem::path& path, const WaveField& f,
                           const std::string& scenario_id = "") {
  const Grid& g = *f.grid;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw PhysicsError("cannot open snapshot file for writing: " + path.string());
  os.write(detail::kSnapshotMagic, 8);
  detail::write_le<std::uint32_t>(os, detail::kSnapshotVersion);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.ndim()));
  detail::write_le<std::uint32_t>(os, g.boundary() == Boundary::periodic ? 0u : 1u);
  detail::write_le<std::uint32_t>(os, 0u);
  for (std::size_t a = 0; a < g.ndim(); ++a)
    detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(g.dim(a)));
  for (std::size_t a = 0; a < g.ndim(); ++a) detail::write_le<double>(os, g.length(a));
  for (std::size_t a = 0; a < g.ndim(); ++a) detail::write_le<double>(os, g.origin(a));
  detail::write_le<double>(os, f.time);
  const char units[8] = {'h', 'a', 'r', 't', 'r', 'e', 'e', '\0'};
  os.write(units, 8);
  detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(f.values.size()));
  for (const cplx& v : f.values) {
    detail::write_le<double>(os, v.real());
    detail::write_le<double>(os, v.imag());
  }
  if (!os) throw PhysicsError("snapshot write failed: " + path.string());

  std::ofstream meta(path.string() + ".meta", std::ios::trunc);
  meta << "format=qtraj-snapshot\n";
  meta << "version=" << detail::kSnapshotVersion << "\n";
  meta << "ndim=" << g.ndim() << "\n";
  meta << "dims=";
  for (std::size_t a = 0; a < g.ndim(); ++a) meta << (a ? " " : "") << g.dim(a);
  meta << "\nbox=";
  std::ostringstream bx, org;
  bx.precision(17);
  org.precision(17);
  for (std::size_t a = 0; a < g.ndim(); ++a) {
    bx << (a ? " " : "") << g.length(a);
    org << (a ? " " : "") << g.origin(a);
  }
  meta << bx.str() << "\norigin=" << org.str() << "\n";
  meta << "boundary=" << (g.boundary() == Boundary::periodic ? "periodic" : "absorbing") << "\n";
  meta.precision(17);
  meta << "time=" << f.time << "\n";
  meta << "units=hartree\n";
  meta << "count=" << f.values.size() << "\n";
  if (!scenario_id.empty()) meta << "scenario=" << scenario_id << "\n";
}

inline WaveField read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open snapshot file: " + path.string());
  char magic[8];
  is.read(magic, 8);
  if (std::memcmp(magic, detail::kSnapshotMagic, 8) != 0)
    throw ConfigError("not a snapshot file: " + path.string());
  const auto version = detail::read_le<std::uint32_t>(is);
  if (version != detail::kSnapshotVersion)
    throw ConfigError("unsupported snapshot version " + std::to_string(version));
  const auto ndim = detail::read_le<std::uint32_t>(is);
  const auto boundary = detail::read_le<std::uint32_t>(is);
  detail::read_le<std::uint32_t>(is);
  if (ndim == 0 || ndim > 4) throw ConfigError("snapshot has invalid dimensionality");
  GridSpec spec;
  spec.boundary = boundary == 0 ? Boundary::periodic : Boundary::absorbing_mask;
  spec.dims.resize(ndim);
  spec.box.resize(ndim);
  spec.origin.resize(ndim);
  for (auto& d : spec.dims) d = static_cast<std::size_t>(detail::read_le<std::uint64_t>(is));
  for (auto& b : spec.box) b = detail::read_le<double>(is);
  for (auto& o : spec.origin) o = detail::read_le<double>(is);
  const double time = detail::read_le<double>(is);
  char units[8];
  is.read(units, 8);
  const auto count = detail::read_le<std::uint64_t>(is);
  auto grid = std::make_shared<const Grid>(spec);
  if (count != grid->size()) throw ConfigError("snapshot payload count mismatch");
  WaveField f{grid, std::vector<cplx>(count), time};
  for (auto& v : f.values) {
    const double re = detail::read_le<double>(is);
    const double im = detail::read_le<double>(is);
    v = {re, im};
  }
  if (!is) throw ConfigError("snapshot payload truncated: " + path.string());
  return f;
}

// Plain-text table of a snapshot for plotting: one row per node,
// coordinates followed by re, im, |psi|^2.
inline void convert_snapshot_to_text(const std::filesystem::path& in, std::ostream& os) {
  const WaveField f = read_snapshot(in);
  const Grid& g = *f.grid;
  os << "#";
  for (std::size_t a = 0; a < g.ndim(); ++a) os << " q" << a;
  os << " re im abs2\n";
  os.precision(17);
  std::array<std::size_t, 4> idx{};
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
    for (std::size_t a = 0; a < g.ndim(); ++a) os << g.axis_coords(a)[idx[a]] << ' ';
    os << f.values[flat].real() << ' ' << f.values[flat].imag() << ' '
       << std::norm(f.values[flat]) << '\n';
  }
}

}  // namespace qtraj
