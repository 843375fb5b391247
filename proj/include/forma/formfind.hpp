#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "forma/material.hpp"
#include "forma/mesh.hpp"
#include "forma/sphere_fit.hpp"

namespace forma {

enum class Damping { kinetic, viscous };

struct FormFindConfig {
  double pressure = 101325.0;            // internal gauge pressure, Pa
  // Membrane axial stiffness E*t per unit width (N/m). Each edge spring gets
  // EA = axial_stiffness * w with the cotangent width w = L (cot a + cot b) / 2
  // (a, b opposite the edge), so a uniformly stretched lattice carries a
  // uniform membrane tension, as a real isotropic membrane would.
  double axial_stiffness = 70e9 * 0.005;
  double rest_length_factor = 1.0;       // rest length / reference length
  Damping damping = Damping::kinetic;
  // 1/s, viscous damping only. Nodal masses are 1 kg, so useful values
  // are near sqrt(edge stiffness): thousands for the Kevlar default.
  double viscous_coefficient = 0.0;
  std::size_t max_iterations = 200'000;
  // Max out-of-balance force (N) at convergence. Unset: 1e-4 * p * mean
  // triangle area, or a 1e-12 strain-equivalent force when p = 0.
  std::optional<double> residual_tolerance;
  double time_step_safety = 0.5;
  bool record_trace = false;

  void validate() const {
    if (!(pressure >= 0.0) || !std::isfinite(pressure)) throw PreconditionError("pressure must be >= 0");
    if (!(axial_stiffness > 0.0) || !std::isfinite(axial_stiffness)) {
      throw PreconditionError("axial stiffness must be > 0");
    }
    if (!(rest_length_factor > 0.0)) throw PreconditionError("rest length factor must be > 0");
    if (residual_tolerance && !(*residual_tolerance > 0.0)) {
      throw PreconditionError("residual tolerance must be > 0");
    }
    if (damping == Damping::viscous && !(viscous_coefficient > 0.0)) {
      throw PreconditionError("viscous damping needs a positive coefficient");
    }
    if (!(time_step_safety > 0.0 && time_step_safety <= 1.0)) {
      throw PreconditionError("time step safety factor must be in (0, 1]");
    }
    if (max_iterations == 0) throw PreconditionError("max_iterations must be > 0");
  }

  static FormFindConfig for_material(const MaterialSpec& membrane, double pressure) {
    FormFindConfig c;
    c.pressure = pressure;
    c.axial_stiffness = membrane.youngs_modulus * membrane.thickness;
    return c;
  }
};

struct RelaxationSample {
  std::size_t iteration = 0;
  double kinetic_energy = 0.0;
  double residual = 0.0;
};

struct FormFoundResult {
  TriMesh mesh;       // relaxed geometry
  TriMesh reference;  // input geometry; defines spring rest lengths
  std::size_t iterations = 0;
  double final_residual = 0.0;
  double residual_tolerance = 0.0;
  SphereFit fitted_sphere;
  double max_edge_tension = 0.0;  // N
  double pressure = 0.0;
  std::vector<RelaxationSample> trace;
};

namespace detail {

// Pin-jointed edge springs plus follower pressure, built on a reference mesh.
class SpringNetwork {
public:
  SpringNetwork(const TriMesh& reference, const FormFindConfig& config)
      : triangles_(reference.triangles()), anchored_(reference.anchored()),
        pressure_(config.pressure) {
    const MeshTopology topo(reference);
    const auto areas = triangle_areas(reference);
    edges_ = topo.edges;
    rest_.resize(edges_.size());
    stiffness_.resize(edges_.size());
    node_stiffness_.assign(reference.vertex_count(), 0.0);
    double length_sum = 0.0;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto [a, b] = edges_[e];
      const double len = (reference.vertex(b) - reference.vertex(a)).norm();
      if (!(len > 0.0)) throw PreconditionError("mesh has a zero-length edge");
      double cot = 0.0;
      for (auto t : topo.edge_triangles[e]) {
        if (t == MeshTopology::kNone) continue;
        const auto& tri = reference.triangles()[t];
        std::uint32_t c = tri[0];
        for (auto v : tri) {
          if (v != a && v != b) c = v;
        }
        const Vec3 u = reference.vertex(a) - reference.vertex(c);
        const Vec3 w = reference.vertex(b) - reference.vertex(c);
        cot += u.dot(w) / u.cross(w).norm();
      }
      const double ea = config.axial_stiffness * len * std::max(0.5 * cot, 1e-3);
      rest_[e] = config.rest_length_factor * len;
      stiffness_[e] = ea / rest_[e];
      node_stiffness_[a] += stiffness_[e];
      node_stiffness_[b] += stiffness_[e];
      length_sum += len;
    }
    double area_sum = 0.0;
    for (double a : areas) area_sum += a;
    mean_triangle_area_ = areas.empty() ? 0.0 : area_sum / static_cast<double>(areas.size());
    mean_edge_length_ = edges_.empty() ? 0.0 : length_sum / static_cast<double>(edges_.size());
  }

  double max_node_stiffness() const {
    double m = 0.0;
    for (std::size_t i = 0; i < node_stiffness_.size(); ++i) {
      if (!anchored_[i]) m = std::max(m, node_stiffness_[i]);
    }
    return m;
  }

  double mean_triangle_area() const { return mean_triangle_area_; }
  double mean_edge_length() const { return mean_edge_length_; }
  double mean_axial_force_scale() const {
    double s = 0.0;
    for (std::size_t e = 0; e < edges_.size(); ++e) s += stiffness_[e] * rest_[e];
    return edges_.empty() ? 0.0 : s / static_cast<double>(edges_.size());
  }

  // Net nodal forces; anchored entries are zeroed. Returns the residual.
  double forces(const std::vector<Point3>& x, std::vector<Vec3>& f, bool springs = true,
                bool pressure = true) const {
    std::fill(f.begin(), f.end(), Vec3::Zero());
    if (springs) {
      for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto [a, b] = edges_[e];
        const Vec3 d = x[b] - x[a];
        const double len = d.norm();
        const Vec3 pull = (stiffness_[e] * (len - rest_[e]) / len) * d;
        f[a] += pull;
        f[b] -= pull;
      }
    }
    if (pressure && pressure_ != 0.0) {
      const double w = pressure_ / 6.0;
      for (const auto& t : triangles_) {
        const Vec3 load = w * (x[t[1]] - x[t[0]]).cross(x[t[2]] - x[t[0]]);
        f[t[0]] += load;
        f[t[1]] += load;
        f[t[2]] += load;
      }
    }
    double residual = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (anchored_[i]) {
        f[i].setZero();
      } else {
        residual = std::max(residual, f[i].norm());
      }
    }
    return residual;
  }

  double max_tension(const std::vector<Point3>& x) const {
    double t = 0.0;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto [a, b] = edges_[e];
      t = std::max(t, stiffness_[e] * ((x[b] - x[a]).norm() - rest_[e]));
    }
    return t;
  }

private:
  std::vector<std::array<std::uint32_t, 2>> edges_;
  std::vector<Triangle> triangles_;
  std::vector<bool> anchored_;
  std::vector<double> rest_;
  std::vector<double> stiffness_;  // EA / L0, N/m
  std::vector<double> node_stiffness_;
  double pressure_ = 0.0;
  double mean_triangle_area_ = 0.0;
  double mean_edge_length_ = 0.0;
};

inline double default_tolerance(const SpringNetwork& net, const FormFindConfig& config) {
  if (config.residual_tolerance) return *config.residual_tolerance;
  if (config.pressure > 0.0) return 1e-4 * config.pressure * net.mean_triangle_area();
  return 1e-12 * net.mean_axial_force_scale();
}

} // namespace detail

// Largest out-of-balance nodal force over free vertices of `mesh`, with spring
// rest lengths taken from `reference`.
inline double residual_norm(const TriMesh& mesh, const TriMesh& reference,
                            const FormFindConfig& config) {
  config.validate();
  if (mesh.vertex_count() != reference.vertex_count() ||
      mesh.triangles() != reference.triangles()) {
    throw PreconditionError("mesh and reference connectivity differ");
  }
  const detail::SpringNetwork net(reference, config);
  std::vector<Vec3> f(mesh.vertex_count());
  return net.forces(mesh.vertices(), f);
}

// Residual of a mesh taken as its own (unstretched) reference.
inline double residual_norm(const TriMesh& mesh, const FormFindConfig& config) {
  return residual_norm(mesh, mesh, config);
}

// Pressure-only part of the residual: max |p * area-weighted normal| over free vertices.
inline double pressure_residual(const TriMesh& mesh, const FormFindConfig& config) {
  config.validate();
  const detail::SpringNetwork net(mesh, config);
  std::vector<Vec3> f(mesh.vertex_count());
  return net.forces(mesh.vertices(), f, false, true);
}

// Dynamic relaxation of an anchored membrane under internal pressure.
//
// Leapfrog integration with uniform lumped unit masses and a time step at
// `time_step_safety` of the explicit stability bound 2 / sqrt(2 * max nodal
// stiffness). Kinetic damping: when the kinetic energy drops, the nodes are
// put back half a step (close to the energy peak), velocities are zeroed and
// the integration restarts from rest.
inline FormFoundResult form_find(const TriMesh& mesh, const FormFindConfig& config) {
  config.validate();
  if (mesh.anchored_count() == 0) throw PreconditionError("form finding needs at least one anchored vertex");
  if (mesh.anchored_count() == mesh.vertex_count()) {
    throw PreconditionError("form finding needs at least one free vertex");
  }

  const detail::SpringNetwork net(mesh, config);
  const double tol = detail::default_tolerance(net, config);
  const double dt = config.time_step_safety * 2.0 / std::sqrt(2.0 * net.max_node_stiffness());

  const std::size_t n = mesh.vertex_count();
  std::vector<Point3> x = mesh.vertices();
  std::vector<Vec3> v(n, Vec3::Zero());
  std::vector<Vec3> f(n, Vec3::Zero());

  FormFoundResult result{mesh, mesh, 0, 0.0, 0.0, {}, 0.0, 0.0, {}};
  result.residual_tolerance = tol;
  result.pressure = config.pressure;

  auto kinetic = [&] {
    double ke = 0.0;
    for (const auto& vi : v) ke += vi.squaredNorm();
    return 0.5 * ke;
  };
  auto advance = [&] {
    for (std::size_t i = 0; i < n; ++i) x[i] += dt * v[i];
  };
  auto check_finite = [&](double residual) {
    if (!std::isfinite(residual)) {
      throw DivergenceError("dynamic relaxation diverged (non-finite forces); reduce "
                            "time_step_safety below " + std::to_string(config.time_step_safety));
    }
  };

  double residual = net.forces(x, f);
  check_finite(residual);
  std::size_t it = 0;
  auto record = [&](double ke) {
    if (config.record_trace) result.trace.push_back({it, ke, residual});
  };
  record(0.0);

  const double viscous_a = 1.0 - 0.5 * config.viscous_coefficient * dt;
  const double viscous_b = 1.0 / (1.0 + 0.5 * config.viscous_coefficient * dt);
  double ke_prev = 0.0;
  bool restart = true;
  while (residual > tol) {
    if (it >= config.max_iterations) {
      throw ConvergenceError("dynamic relaxation did not converge in " +
                                 std::to_string(config.max_iterations) +
                                 " iterations; last residual " + std::to_string(residual) +
                                 " N, tolerance " + std::to_string(tol) + " N",
                             residual);
    }
    ++it;
    if (restart) {
      for (std::size_t i = 0; i < n; ++i) v[i] = 0.5 * dt * f[i];
      ke_prev = kinetic();
      restart = false;
    } else if (config.damping == Damping::viscous) {
      for (std::size_t i = 0; i < n; ++i) v[i] = viscous_b * (viscous_a * v[i] + dt * f[i]);
      ke_prev = kinetic();
    } else {
      double ke = 0.0;
      for (std::size_t i = 0; i < n; ++i) ke += (v[i] + dt * f[i]).squaredNorm();
      ke *= 0.5;
      if (ke < ke_prev) {
        for (std::size_t i = 0; i < n; ++i) {
          x[i] -= 0.5 * dt * v[i];
          v[i].setZero();
        }
        restart = true;
        residual = net.forces(x, f);
        check_finite(residual);
        record(0.0);
        continue;
      }
      for (std::size_t i = 0; i < n; ++i) v[i] += dt * f[i];
      ke_prev = ke;
    }
    advance();
    residual = net.forces(x, f);
    check_finite(residual);
    record(ke_prev);
  }

  result.mesh = mesh.with_vertices(std::move(x));
  result.iterations = it;
  result.final_residual = residual;
  result.max_edge_tension = net.max_tension(result.mesh.vertices());
  result.fitted_sphere = fit_sphere_free_vertices(result.mesh);
  return result;
}

struct TensionReport {
  double max_stress = 0.0;   // Pa
  double allowable = 0.0;    // Pa
  double utilization = 0.0;  // max_stress / allowable
  bool over_limit = false;
};

// Thin-wall sphere membrane stress p * R / (2 t) on the fitted radius.
inline TensionReport membrane_tension_check(const FormFoundResult& result,
                                            const MaterialSpec& material) {
  material.validate();
  TensionReport r;
  r.max_stress = result.pressure * result.fitted_sphere.radius / (2.0 * material.thickness);
  r.allowable = material.allowable_stress;
  r.utilization = r.max_stress / r.allowable;
  r.over_limit = r.utilization > 1.0;
  return r;
}

} // namespace forma
