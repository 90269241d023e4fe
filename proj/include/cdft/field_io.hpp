#pragma once

// CDFT-FLD v1 field files.
//
//   line 1: CDFT-FLD v1
//   line 2: JSON header {"kind", "dim", "shape", "spacing", "origin",
//           "components", "encoding", ["provenance"]}
//   rest:   one comma-separated row per cell (encoding "text") or
//           little-endian doubles, components interleaved per cell
//           (encoding "binary").
//
// kind is "scalar" (1 component), "vector" (dim), "complex" (re, im) or
// "pair" (rho followed by the dim current components).

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdft/density.hpp"
#include "cdft/errors.hpp"
#include "cdft/grid.hpp"

namespace cdft {

enum class FieldEncoding { text, binary };

struct FieldFile {
  std::string kind;
  GridSpec grid;
  int components = 1;
  Provenance provenance = Provenance::raw;
  std::vector<double> data;  // cell-major, components interleaved
};

inline nlohmann::ordered_json grid_to_json(const GridSpec& g) {
  nlohmann::ordered_json j;
  j["dim"] = g.dim;
  j["shape"] = std::vector<std::size_t>(g.shape.begin(), g.shape.begin() + g.dim);
  j["spacing"] = std::vector<double>(g.spacing.begin(), g.spacing.begin() + g.dim);
  j["origin"] = std::vector<double>(g.origin.begin(), g.origin.begin() + g.dim);
  return j;
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
  GridSpec g;
  try {
    g.dim = j.at("dim").get<int>();
    if (g.dim != 1 && g.dim != 3) throw InvalidArgument("grid dim must be 1 or 3");
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    const auto spacing = j.at("spacing").get<std::vector<double>>();
    const auto origin = j.at("origin").get<std::vector<double>>();
    if (shape.size() != std::size_t(g.dim) || spacing.size() != std::size_t(g.dim) ||
        origin.size() != std::size_t(g.dim))
      throw InvalidArgument("grid arrays must have dim entries");
    for (int a = 0; a < g.dim; ++a) {
      g.shape[a] = shape[a];
      g.spacing[a] = spacing[a];
      g.origin[a] = origin[a];
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad grid header: ") + e.what());
  }
  g.validate();
  return g;
}

inline void write_field_file(const std::filesystem::path& path, const FieldFile& f,
                             FieldEncoding enc = FieldEncoding::text) {
  if (f.data.size() != f.grid.size() * std::size_t(f.components))
    throw InvalidArgument("field data size does not match grid and components");
  nlohmann::ordered_json h;
  h["kind"] = f.kind;
  const nlohmann::ordered_json gj = grid_to_json(f.grid);
  for (const auto& [k, v] : gj.items()) h[k] = v;
  h["components"] = f.components;
  h["encoding"] = enc == FieldEncoding::text ? "text" : "binary";
  if (f.kind == "pair") h["provenance"] = to_string(f.provenance);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "CDFT-FLD v1\n" << h.dump() << "\n";
  if (enc == FieldEncoding::text) {
    char buf[32];
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
      for (int c = 0; c < f.components; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", f.data[i * f.components + c]);
        if (c) out << ',';
        out << buf;
      }
      out << '\n';
    }
  } else {
    static_assert(std::endian::native == std::endian::little, "binary fields assume a little-endian host");
    out.write(reinterpret_cast<const char*>(f.data.data()), std::streamsize(f.data.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline FieldFile read_field_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string magic, header;
  std::getline(in, magic);
  if (magic != "CDFT-FLD v1") throw IoError("'" + path.string() + "' is not a CDFT-FLD v1 file");
  std::getline(in, header);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad header in '" + path.string() + "': " + e.what());
  }
  FieldFile f;
  f.grid = grid_from_json(h);
  try {
    f.kind = h.at("kind").get<std::string>();
    f.components = h.at("components").get<int>();
    if (h.contains("provenance")) f.provenance = provenance_from_string(h["provenance"].get<std::string>());
    const std::string enc = h.at("encoding").get<std::string>();
    const std::size_t count = f.grid.size() * std::size_t(f.components);
    f.data.resize(count);
    if (enc == "text") {
      std::string line;
      std::size_t k = 0;
      while (k < count && std::getline(in, line)) {
        std::stringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) {
          if (k >= count) throw IoError("too many values in '" + path.string() + "'");
          f.data[k++] = std::stod(cell);
        }
      }
      if (k != count) throw IoError("'" + path.string() + "' ends early");
    } else if (enc == "binary") {
      in.read(reinterpret_cast<char*>(f.data.data()), std::streamsize(count * sizeof(double)));
      if (in.gcount() != std::streamsize(count * sizeof(double)))
        throw IoError("'" + path.string() + "' ends early");
    } else {
      throw IoError("unknown encoding '" + enc + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad header in '" + path.string() + "': " + e.what());
  } catch (const std::invalid_argument&) {
    throw IoError("non-numeric value in '" + path.string() + "'");
  }
  const int want = f.kind == "scalar" ? 1 : f.kind == "vector" ? f.grid.dim : f.kind == "complex" ? 2
                   : f.kind == "pair" ? 1 + f.grid.dim : -1;
  if (want < 0) throw IoError("unknown field kind '" + f.kind + "'");
  if (want != f.components) throw IoError("component count does not match kind '" + f.kind + "'");
  return f;
}

inline FieldFile to_field_file(const ScalarField& s) { return {"scalar", s.grid, 1, Provenance::raw, s.values}; }

inline FieldFile to_field_file(const ComplexField& z) {
  FieldFile f{"complex", z.grid, 2, Provenance::raw, std::vector<double>(2 * z.values.size())};
  for (std::size_t i = 0; i < z.values.size(); ++i) {
    f.data[2 * i] = z.values[i].real();
    f.data[2 * i + 1] = z.values[i].imag();
  }
  return f;
}

inline FieldFile to_field_file(const DensityPair& p) {
  const int c = 1 + p.grid().dim;
  FieldFile f{"pair", p.grid(), c, p.provenance, std::vector<double>(p.rho.size() * c)};
  for (std::size_t i = 0; i < p.rho.size(); ++i) {
    f.data[i * c] = p.rho.values[i];
    for (int a = 0; a < p.grid().dim; ++a) f.data[i * c + 1 + a] = p.jp.comp[a][i];
  }
  return f;
}

inline DensityPair pair_from_field_file(const FieldFile& f) {
  if (f.kind != "pair") throw IoError("expected a pair field, got '" + f.kind + "'");
  DensityPair p{ScalarField(f.grid), VectorField(f.grid), f.provenance};
  const int c = f.components;
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    p.rho.values[i] = f.data[i * c];
    for (int a = 0; a < f.grid.dim; ++a) p.jp.comp[a][i] = f.data[i * c + 1 + a];
  }
  return p;
}

inline ScalarField scalar_from_field_file(const FieldFile& f) {
  if (f.kind != "scalar") throw IoError("expected a scalar field, got '" + f.kind + "'");
  return ScalarField(f.grid, f.data);
}

inline FieldFile to_field_file(const VectorField& u) {
  const int c = u.grid.dim;
  FieldFile f{"vector", u.grid, c, Provenance::raw, std::vector<double>(u.size() * c)};
  for (std::size_t i = 0; i < u.size(); ++i)
    for (int a = 0; a < c; ++a) f.data[i * c + a] = u.comp[a][i];
  return f;
}

/// Pair manifest: {"n", "provenance", "rho": path, "jp": path, "tolerances"}
/// with paths relative to the manifest.
inline DensityPair read_pair_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    const nlohmann::json m = nlohmann::json::parse(in);
    const std::filesystem::path dir = path.parent_path();
    const FieldFile rho = read_field_file(dir / m.at("rho").get<std::string>());
    const FieldFile jp = read_field_file(dir / m.at("jp").get<std::string>());
    if (rho.kind != "scalar" || jp.kind != "vector") throw IoError("manifest needs a scalar rho and a vector jp");
    require_same_grid(rho.grid, jp.grid, "pair manifest");
    DensityPair p{ScalarField(rho.grid, rho.data), VectorField(jp.grid), Provenance::raw};
    for (std::size_t i = 0; i < jp.grid.size(); ++i)
      for (int a = 0; a < jp.grid.dim; ++a) p.jp.comp[a][i] = jp.data[i * jp.components + a];
    if (m.contains("provenance")) p.provenance = provenance_from_string(m["provenance"].get<std::string>());
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad pair manifest '" + path.string() + "': " + e.what());
  }
}

/// A ".json" path is read as a manifest, anything else as a single pair field.
inline DensityPair read_pair(const std::filesystem::path& path) {
  if (path.extension() == ".json") return read_pair_manifest(path);
  return pair_from_field_file(read_field_file(path));
}

/// Writes <stem>.rho.fld, <stem>.jp.fld and the manifest itself.
inline void write_pair_manifest(const std::filesystem::path& path, const DensityPair& p, int n,
                                FieldEncoding enc = FieldEncoding::text) {
  const std::string stem = path.stem().string();
  const std::filesystem::path dir = path.parent_path();
  write_field_file(dir / (stem + ".rho.fld"), to_field_file(p.rho), enc);
  write_field_file(dir / (stem + ".jp.fld"), to_field_file(p.jp), enc);
  nlohmann::ordered_json m;
  m["n"] = n;
  m["provenance"] = to_string(p.provenance);
  m["rho"] = stem + ".rho.fld";
  m["jp"] = stem + ".jp.fld";
  m["tolerances"] = {{"mass_rel", 1e-8}, {"neg_rel", 1e-12}, {"rho_floor_rel", 1e-12}, {"j_floor_rel", 1e-12}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << m.dump(2) << "\n";
}

inline void write_pair(const std::filesystem::path& path, const DensityPair& p,
                       FieldEncoding enc = FieldEncoding::text) {
  write_field_file(path, to_field_file(p), enc);
}

}  // namespace cdft
