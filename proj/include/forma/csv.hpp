#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "forma/design.hpp"
#include "forma/fea.hpp"
#include "forma/formfind.hpp"
#include "forma/obj_io.hpp"
#include "forma/shield.hpp"

namespace forma {

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

inline const char* flag(bool b) { return b ? "true" : "false"; }

} // namespace detail

// radius_m,volume_m3,shell_surface_m2,floor_area_m2,feasible,on_front,selected
inline void write_pareto_csv(std::ostream& out, const SweepResult& sweep) {
  out << "radius_m,volume_m3,shell_surface_m2,floor_area_m2,feasible,on_front,selected\n";
  std::vector<bool> on_front(sweep.points.size(), false);
  for (auto i : sweep.front.members) on_front[i] = true;
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const auto& p = sweep.points[i];
    out << format_double(p.radius) << ',' << format_double(p.volume) << ','
        << format_double(p.shell_surface) << ',' << format_double(p.floor_area_total) << ','
        << detail::flag(p.feasible) << ',' << detail::flag(on_front[i]) << ','
        << detail::flag(p.evaluated && p.radius == sweep.selected.radius) << '\n';
  }
}

// layer_index,z_m,contour_index,point_index,x_m,y_m,z_m -- one row per point,
// layers ascending. The first z_m is the layer elevation.
inline void write_toolpath_csv(std::ostream& out, std::span<const ToolpathLayer> layers) {
  out << "layer_index,z_m,contour_index,point_index,x_m,y_m,z_m\n";
  for (const auto& layer : layers) {
    for (std::size_t c = 0; c < layer.contours.size(); ++c) {
      const auto& pts = layer.contours[c].points;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        out << layer.index << ',' << format_double(layer.z) << ',' << c << ',' << i << ','
            << format_double(pts[i].x()) << ',' << format_double(pts[i].y()) << ','
            << format_double(pts[i].z()) << '\n';
      }
    }
  }
}

// Toolpath-style layout for contour sets; the second column is the level value.
inline void write_polyline_csv(std::ostream& out, std::span<const IsoContourSet> sets,
                               const std::string& level_header = "level") {
  out << "level_index," << level_header << ",contour_index,point_index,x_m,y_m,z_m\n";
  for (std::size_t l = 0; l < sets.size(); ++l) {
    for (std::size_t c = 0; c < sets[l].polylines.size(); ++c) {
      const auto& pts = sets[l].polylines[c].points;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        out << l << ',' << format_double(sets[l].level) << ',' << c << ',' << i << ','
            << format_double(pts[i].x()) << ',' << format_double(pts[i].y()) << ','
            << format_double(pts[i].z()) << '\n';
      }
    }
  }
}

inline void write_meridian_csv(std::ostream& out, std::span<const Polyline3> meridians) {
  out << "meridian_index,point_index,x_m,y_m,z_m\n";
  for (std::size_t m = 0; m < meridians.size(); ++m) {
    const auto& pts = meridians[m].points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out << m << ',' << i << ',' << format_double(pts[i].x()) << ',' << format_double(pts[i].y())
          << ',' << format_double(pts[i].z()) << '\n';
    }
  }
}

// entity,index,x_m,y_m,z_m,ux_m,uy_m,uz_m,von_mises_pa
// "vertex" rows carry the displacement at the vertex; "element" rows carry
// the centroid and the element's von Mises stress.
inline void write_fea_csv(std::ostream& out, const TriMesh& mesh, const AnalysisResult& r) {
  out << "entity,index,x_m,y_m,z_m,ux_m,uy_m,uz_m,von_mises_pa\n";
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const auto& p = mesh.vertex(v);
    const auto& u = r.displacements[v];
    out << "vertex," << v << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ','
        << format_double(p.z()) << ',' << format_double(u.x()) << ',' << format_double(u.y()) << ','
        << format_double(u.z()) << ",\n";
  }
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Point3 c = (mesh.vertex(tri[0]) + mesh.vertex(tri[1]) + mesh.vertex(tri[2])) / 3.0;
    out << "element," << t << ',' << format_double(c.x()) << ',' << format_double(c.y()) << ','
        << format_double(c.z()) << ",,,," << format_double(r.von_mises[t]) << '\n';
  }
}

inline void write_relaxation_trace_csv(std::ostream& out, std::span<const RelaxationSample> trace) {
  out << "iteration,kinetic_energy,residual_n\n";
  for (const auto& s : trace) {
    out << s.iteration << ',' << format_double(s.kinetic_energy) << ',' << format_double(s.residual) << '\n';
  }
}

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  auto out = detail::open_for_write(path);
  writer(out);
  if (!out) throw Error("failed writing " + path.string());
}

} // namespace forma
