// Copyright 2026 The scmat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SCMAT_MESH_HPP_
#define SCMAT_MESH_HPP_

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "scmat/math.hpp"
#include "scmat/model.hpp"

namespace scmat {

class GeometryError : public Error {
 public:
  using Error::Error;
};

// Non-fatal notes collected while loading or building geometry.
struct Diagnostics {
  std::vector<std::string> warnings;

  void Warn(std::string message) { warnings.push_back(std::move(message)); }
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
};

enum class MeshFormat { kObj, kStl };

inline constexpr double kDegenerateTriangleArea = 1e-12;  // m^2

inline double TriangleArea(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

namespace detail {

// Drops degenerate triangles in place and reports how many were removed.
inline void DropDegenerate(TriangleMesh& mesh, Diagnostics* diag) {
  std::size_t dropped = 0;
  std::vector<std::array<std::uint32_t, 3>> kept;
  kept.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const double area = TriangleArea(mesh.vertices[t[0]], mesh.vertices[t[1]],
                                     mesh.vertices[t[2]]);
    if (area <= kDegenerateTriangleArea) {
      ++dropped;
    } else {
      kept.push_back(t);
    }
  }
  mesh.triangles = std::move(kept);
  if (dropped > 0 && diag != nullptr) {
    diag->Warn("dropped " + std::to_string(dropped) + " degenerate triangle(s)");
  }
}

inline TriangleMesh ParseObj(std::string_view text) {
  TriangleMesh mesh;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) {
        throw GeometryError("OBJ line " + std::to_string(line_no) +
                            ": bad vertex");
      }
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::uint32_t> face;
      std::string token;
      while (ls >> token) {
        long idx = 0;
        try {
          idx = std::stol(token.substr(0, token.find('/')));
        } catch (const std::exception&) {
          throw GeometryError("OBJ line " + std::to_string(line_no) +
                              ": bad face index '" + token + "'");
        }
        const long count = static_cast<long>(mesh.vertices.size());
        const long resolved = idx < 0 ? count + idx : idx - 1;
        if (idx == 0 || resolved < 0 || resolved >= count) {
          throw GeometryError("OBJ line " + std::to_string(line_no) +
                              ": face index out of range");
        }
        face.push_back(static_cast<std::uint32_t>(resolved));
      }
      if (face.size() < 3) {
        throw GeometryError("OBJ line " + std::to_string(line_no) +
                            ": face with fewer than 3 vertices");
      }
      for (std::size_t k = 1; k + 1 < face.size(); ++k) {
        mesh.triangles.push_back({face[0], face[k], face[k + 1]});
      }
    }
  }
  return mesh;
}

// Shared-vertex welding for STL, which stores every triangle corner.
class VertexWelder {
 public:
  explicit VertexWelder(TriangleMesh& mesh) : mesh_(mesh) {}

  std::uint32_t Add(const Vec3& v) {
    const auto key = std::make_tuple(v.x(), v.y(), v.z());
    const auto [it, inserted] =
        index_.emplace(key, static_cast<std::uint32_t>(mesh_.vertices.size()));
    if (inserted) mesh_.vertices.push_back(v);
    return it->second;
  }

 private:
  TriangleMesh& mesh_;
  std::map<std::tuple<double, double, double>, std::uint32_t> index_;
};

inline bool LooksLikeBinaryStl(std::span<const char> bytes) {
  if (bytes.size() < 84) return false;
  std::uint32_t count = 0;
  std::memcpy(&count, bytes.data() + 80, sizeof(count));
  return bytes.size() == 84 + std::size_t{count} * 50;
}

inline TriangleMesh ParseBinaryStl(std::span<const char> bytes) {
  TriangleMesh mesh;
  VertexWelder welder(mesh);
  std::uint32_t count = 0;
  std::memcpy(&count, bytes.data() + 80, sizeof(count));
  const char* cursor = bytes.data() + 84;
  for (std::uint32_t t = 0; t < count; ++t, cursor += 50) {
    std::array<std::uint32_t, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      float xyz[3];
      std::memcpy(xyz, cursor + 12 + 12 * k, sizeof(xyz));
      tri[k] = welder.Add(Vec3(xyz[0], xyz[1], xyz[2]));
    }
    mesh.triangles.push_back(tri);
  }
  return mesh;
}

inline TriangleMesh ParseAsciiStl(std::string_view text) {
  TriangleMesh mesh;
  VertexWelder welder(mesh);
  std::istringstream in{std::string(text)};
  std::string token;
  if (!(in >> token) || token != "solid") {
    throw GeometryError("STL: missing 'solid' header");
  }
  std::vector<std::uint32_t> corners;
  while (in >> token) {
    if (token == "vertex") {
      Vec3 v;
      if (!(in >> v.x() >> v.y() >> v.z())) {
        throw GeometryError("STL: bad vertex");
      }
      corners.push_back(welder.Add(v));
    } else if (token == "endfacet") {
      if (corners.size() != 3) {
        throw GeometryError("STL: facet without exactly 3 vertices");
      }
      mesh.triangles.push_back({corners[0], corners[1], corners[2]});
      corners.clear();
    }
  }
  return mesh;
}

}  // namespace detail

// Parses OBJ or STL (ASCII or binary). Degenerate triangles are dropped and
// reported through `diag`. Throws GeometryError on parse failure or when the
// result has no vertices.
inline TriangleMesh LoadMesh(std::span<const char> bytes, MeshFormat format,
                             Diagnostics* diag = nullptr) {
  TriangleMesh mesh;
  if (format == MeshFormat::kObj) {
    mesh = detail::ParseObj(std::string_view(bytes.data(), bytes.size()));
  } else if (detail::LooksLikeBinaryStl(bytes)) {
    mesh = detail::ParseBinaryStl(bytes);
  } else {
    mesh = detail::ParseAsciiStl(std::string_view(bytes.data(), bytes.size()));
  }
  if (mesh.vertices.empty()) throw GeometryError("mesh has no vertices");
  detail::DropDegenerate(mesh, diag);
  return mesh;
}

inline MeshFormat MeshFormatForPath(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(c));
  if (ext == ".obj") return MeshFormat::kObj;
  if (ext == ".stl") return MeshFormat::kStl;
  throw GeometryError("unsupported mesh format '" + ext + "' (" + path.string() +
                      ")");
}

inline TriangleMesh LoadMeshFile(const std::filesystem::path& path,
                                 Diagnostics* diag = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GeometryError("cannot open mesh file '" + path.string() + "'");
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  return LoadMesh(bytes, MeshFormatForPath(path), diag);
}

inline TriangleMesh BoxMesh(const Vec3& size) {
  TriangleMesh mesh;
  const Vec3 h = 0.5 * size;
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
                               (i & 4) ? h.z() : -h.z());
  }
  mesh.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6},
                    {0, 1, 4}, {1, 5, 4}, {2, 6, 3}, {3, 6, 7},
                    {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return mesh;
}

// Cylinder along z, centered at the origin.
inline TriangleMesh CylinderMesh(double radius, double length, int segments = 24) {
  TriangleMesh mesh;
  const double hz = 0.5 * length;
  for (int k = 0; k < segments; ++k) {
    const double a = 2.0 * kPi * k / segments;
    mesh.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), -hz);
    mesh.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), hz);
  }
  const auto bottom = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.emplace_back(0.0, 0.0, -hz);
  mesh.vertices.emplace_back(0.0, 0.0, hz);
  const auto top = bottom + 1;
  for (int k = 0; k < segments; ++k) {
    const auto b0 = static_cast<std::uint32_t>(2 * k);
    const auto b1 = static_cast<std::uint32_t>(2 * ((k + 1) % segments));
    mesh.triangles.push_back({b0, b1, b0 + 1});
    mesh.triangles.push_back({b1, b1 + 1, b0 + 1});
    mesh.triangles.push_back({bottom, b1, b0});
    mesh.triangles.push_back({top, b0 + 1, b1 + 1});
  }
  return mesh;
}

// UV sphere centered at the origin.
inline TriangleMesh SphereMesh(double radius, int rings = 12, int segments = 24) {
  TriangleMesh mesh;
  mesh.vertices.emplace_back(0.0, 0.0, radius);
  for (int r = 1; r < rings; ++r) {
    const double polar = kPi * r / rings;
    for (int s = 0; s < segments; ++s) {
      const double az = 2.0 * kPi * s / segments;
      mesh.vertices.emplace_back(radius * std::sin(polar) * std::cos(az),
                                 radius * std::sin(polar) * std::sin(az),
                                 radius * std::cos(polar));
    }
  }
  mesh.vertices.emplace_back(0.0, 0.0, -radius);
  const auto south = static_cast<std::uint32_t>(mesh.vertices.size() - 1);
  const auto ring = [&](int r, int s) {
    return static_cast<std::uint32_t>(1 + (r - 1) * segments + (s % segments));
  };
  for (int s = 0; s < segments; ++s) {
    mesh.triangles.push_back({0, ring(1, s), ring(1, s + 1)});
    mesh.triangles.push_back({south, ring(rings - 1, s + 1), ring(rings - 1, s)});
    for (int r = 1; r + 1 < rings; ++r) {
      mesh.triangles.push_back({ring(r, s), ring(r + 1, s), ring(r + 1, s + 1)});
      mesh.triangles.push_back({ring(r, s), ring(r + 1, s + 1), ring(r, s + 1)});
    }
  }
  return mesh;
}

// Appends `part` to `into` after applying `transform`.
inline void AppendTransformed(TriangleMesh& into, const TriangleMesh& part,
                              const RigidTransform& transform) {
  const auto offset = static_cast<std::uint32_t>(into.vertices.size());
  for (const auto& v : part.vertices) into.vertices.push_back(transform.Apply(v));
  for (const auto& t : part.triangles) {
    into.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
  }
}

// All geometry of a link merged into one mesh expressed in the link frame.
// Throws GeometryError naming the link if a mesh file cannot be loaded.
inline TriangleMesh LoadLinkMesh(const Link& link, Diagnostics* diag = nullptr) {
  TriangleMesh out;
  for (const auto& source : link.Geometry()) {
    TriangleMesh part;
    switch (source.kind) {
      case GeometrySource::Kind::kMesh:
        try {
          part = LoadMeshFile(source.mesh_path, diag);
        } catch (const GeometryError& e) {
          throw GeometryError("link '" + link.name + "': " + e.what());
        }
        for (auto& v : part.vertices) v = v.cwiseProduct(source.scale);
        break;
      case GeometrySource::Kind::kBox:
        part = BoxMesh(source.box_size);
        break;
      case GeometrySource::Kind::kCylinder:
        part = CylinderMesh(source.radius, source.length);
        break;
      case GeometrySource::Kind::kSphere:
        part = SphereMesh(source.radius);
        break;
    }
    AppendTransformed(out, part, source.origin);
  }
  if (out.vertices.empty()) {
    throw GeometryError("link '" + link.name + "' has no geometry");
  }
  return out;
}

}  // namespace scmat

#endif  // SCMAT_MESH_HPP_
