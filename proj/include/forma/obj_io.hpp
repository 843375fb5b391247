#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "forma/mesh.hpp"

namespace forma {

// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ASCII Wavefront OBJ, triangles only. Anchored vertices are listed after
// the faces as `# anchor <index>` comment lines (1-based, like `f`), so other
// tools read the file as a plain mesh.
inline void write_obj(const TriMesh& mesh, std::ostream& out) {
  out << "# habitat-forma mesh: " << mesh.vertex_count() << " vertices, "
      << mesh.triangle_count() << " triangles\n";
  for (const auto& p : mesh.vertices()) {
    out << "v " << format_double(p.x()) << ' ' << format_double(p.y()) << ' '
        << format_double(p.z()) << '\n';
  }
  for (const auto& t : mesh.triangles()) {
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    if (mesh.is_anchored(i)) out << "# anchor " << i + 1 << '\n';
  }
}

inline void write_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_obj(mesh, out);
  if (!out) throw Error("failed writing " + path.string());
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_obj_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw ParseError(line, "invalid number '" + std::string(tok) + "'");
  }
  return v;
}

inline std::uint32_t parse_obj_index(std::string_view tok, std::size_t line) {
  // "i", "i/t", "i//n", "i/t/n": only the vertex index matters.
  tok = tok.substr(0, tok.find('/'));
  long long v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || v < 1 || v > 0xFFFFFFFFll) {
    throw ParseError(line, "invalid vertex index '" + std::string(tok) + "'");
  }
  return static_cast<std::uint32_t>(v - 1);
}

} // namespace detail

inline TriMesh read_obj(std::istream& in) {
  std::vector<Point3> vertices;
  std::vector<Triangle> triangles;
  std::vector<std::pair<std::uint32_t, std::size_t>> anchors;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto tok = detail::split_ws(raw);
    if (tok.empty()) continue;
    if (tok[0] == "#") {
      if (tok.size() >= 2 && tok[1] == "anchor") {
        if (tok.size() != 3) throw ParseError(line_no, "anchor comment needs exactly one index");
        anchors.emplace_back(detail::parse_obj_index(tok[2], line_no), line_no);
      }
      continue;
    }
    if (tok[0] == "v") {
      if (tok.size() != 4 && tok.size() != 5) {
        throw ParseError(line_no, "vertex record needs 3 coordinates");
      }
      vertices.emplace_back(detail::parse_obj_double(tok[1], line_no),
                            detail::parse_obj_double(tok[2], line_no),
                            detail::parse_obj_double(tok[3], line_no));
    } else if (tok[0] == "f") {
      if (tok.size() != 4) {
        throw ParseError(line_no, "face with " + std::to_string(tok.size() - 1) +
                                      " vertices; only triangles are supported");
      }
      Triangle t{};
      for (int k = 0; k < 3; ++k) {
        t[k] = detail::parse_obj_index(tok[k + 1], line_no);
        if (t[k] >= vertices.size()) {
          throw ParseError(line_no, "face references vertex " + std::to_string(t[k] + 1) +
                                        " before it is defined");
        }
      }
      if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
        throw ParseError(line_no, "face repeats a vertex");
      }
      triangles.push_back(t);
    } else if (tok[0] == "vn" || tok[0] == "vt" || tok[0] == "o" || tok[0] == "g" ||
               tok[0] == "s" || tok[0] == "usemtl" || tok[0] == "mtllib") {
      continue;
    } else {
      throw ParseError(line_no, "unsupported record '" + std::string(tok[0]) + "'");
    }
  }
  std::vector<bool> anchored(vertices.size(), false);
  for (auto [v, line] : anchors) {
    if (v >= vertices.size()) throw ParseError(line, "anchor index out of range");
    anchored[v] = true;
  }
  return TriMesh(std::move(vertices), std::move(triangles), std::move(anchored));
}

inline TriMesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_obj(in);
}

} // namespace forma
