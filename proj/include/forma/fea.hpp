#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "forma/contour.hpp"
#include "forma/material.hpp"
#include "forma/mesh.hpp"

namespace forma {

struct InternalPressure {
  double pressure = 0.0;  // Pa, acts along the outward normal
};

struct GravitySelfWeight {
  double acceleration = kLunarGravity;  // m/s^2
  Vec3 direction = -Vec3::UnitZ();
};

using LoadCase = std::variant<InternalPressure, GravitySelfWeight>;

// In-plane stress of one element, in its local orthonormal frame.
struct ElementStress {
  Vec3 axis1 = Vec3::UnitX();
  Vec3 axis2 = Vec3::UnitY();
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;

  // Normal stress on the section perpendicular to `dir` (projected into the plane).
  double normal_along(const Vec3& dir) const {
    Eigen::Vector2d d(dir.dot(axis1), dir.dot(axis2));
    const double len = d.norm();
    if (len == 0.0) return 0.0;
    d /= len;
    return sxx * d.x() * d.x() + 2.0 * sxy * d.x() * d.y() + syy * d.y() * d.y();
  }
};

inline double von_mises(double sxx, double syy, double sxy) {
  return std::sqrt(std::max(0.0, sxx * sxx - sxx * syy + syy * syy + 3.0 * sxy * sxy));
}

inline double von_mises(const ElementStress& s) { return von_mises(s.sxx, s.syy, s.sxy); }

struct AnalysisResult {
  std::vector<Vec3> displacements;           // per vertex, m
  std::vector<ElementStress> element_stress; // per triangle, Pa
  std::vector<double> von_mises;             // per triangle, Pa
  double max_displacement = 0.0;
  double max_von_mises = 0.0;
  Vec3 reaction_sum = Vec3::Zero();          // N
  Vec3 applied_load_sum = Vec3::Zero();      // N
  int solver_iterations = 0;
  double solver_residual = 0.0;
};

inline std::vector<double> von_mises_field(const AnalysisResult& result) {
  std::vector<double> out;
  out.reserve(result.element_stress.size());
  for (const auto& s : result.element_stress) out.push_back(von_mises(s));
  return out;
}

struct SolverOptions {
  // Relative residual |b - K u| / |b| of the reduced system.
  double tolerance = 1e-10;
  int max_iterations = 0;  // 0: 10 * number of free dofs
};

// Prescribed value for one global dof (3 * vertex + component).
struct DofConstraint {
  std::uint32_t dof = 0;
  double value = 0.0;
};

namespace detail {

struct CstElement {
  Vec3 e1, e2;
  double area = 0.0;
  Eigen::Matrix<double, 3, 6> b;  // local strain-displacement
};

inline CstElement make_cst(const Point3& p0, const Point3& p1, const Point3& p2) {
  CstElement el;
  const Vec3 a = p1 - p0;
  const Vec3 c = p2 - p0;
  const Vec3 n = a.cross(c);
  const double twice_area = n.norm();
  if (!(twice_area > 0.0)) throw GeometryError("degenerate triangle in finite-element mesh");
  el.area = 0.5 * twice_area;
  el.e1 = a.normalized();
  el.e2 = (n / twice_area).cross(el.e1);
  const double x2 = a.dot(el.e1);
  const double x3 = c.dot(el.e1);
  const double y3 = c.dot(el.e2);
  // Local coordinates: (0,0), (x2,0), (x3,y3).
  const double b1 = -y3, b2 = y3, b3 = 0.0;
  const double c1 = x3 - x2, c2 = -x3, c3 = x2;
  const double inv = 1.0 / twice_area;
  el.b.setZero();
  el.b(0, 0) = b1; el.b(0, 2) = b2; el.b(0, 4) = b3;
  el.b(1, 1) = c1; el.b(1, 3) = c2; el.b(1, 5) = c3;
  el.b(2, 0) = c1; el.b(2, 1) = b1; el.b(2, 2) = c2; el.b(2, 3) = b2; el.b(2, 4) = c3; el.b(2, 5) = b3;
  el.b *= inv;
  return el;
}

inline Eigen::Matrix3d plane_stress(const MaterialSpec& m) {
  const double k = m.youngs_modulus / (1.0 - m.poisson_ratio * m.poisson_ratio);
  Eigen::Matrix3d d;
  d << k, k * m.poisson_ratio, 0.0,
       k * m.poisson_ratio, k, 0.0,
       0.0, 0.0, k * 0.5 * (1.0 - m.poisson_ratio);
  return d;
}

// 6 x 9 map from global nodal displacements to local in-plane ones.
inline Eigen::Matrix<double, 6, 9> local_projection(const CstElement& el) {
  Eigen::Matrix<double, 6, 9> t = Eigen::Matrix<double, 6, 9>::Zero();
  for (int node = 0; node < 3; ++node) {
    t.block<1, 3>(2 * node, 3 * node) = el.e1.transpose();
    t.block<1, 3>(2 * node + 1, 3 * node) = el.e2.transpose();
  }
  return t;
}

} // namespace detail

// Global 3 * V square stiffness of constant-strain membrane triangles, each
// formulated in its own plane. Assembly runs in triangle order.
inline Eigen::SparseMatrix<double> assemble_stiffness(const TriMesh& mesh, const MaterialSpec& material) {
  material.validate();
  const Eigen::Matrix3d d = detail::plane_stress(material);
  const auto n = static_cast<Eigen::Index>(3 * mesh.vertex_count());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangle_count() * 81);
  for (const auto& tri : mesh.triangles()) {
    const auto el = detail::make_cst(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
    const Eigen::Matrix<double, 6, 6> kl = material.thickness * el.area * el.b.transpose() * d * el.b;
    const auto t = detail::local_projection(el);
    const Eigen::Matrix<double, 9, 9> kg = t.transpose() * kl * t;
    for (int i = 0; i < 9; ++i) {
      for (int j = 0; j < 9; ++j) {
        trip.emplace_back(3 * tri[i / 3] + i % 3, 3 * tri[j / 3] + j % 3, kg(i, j));
      }
    }
  }
  Eigen::SparseMatrix<double> k(n, n);
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

// Consistent nodal loads: pressure on area-weighted normals, gravity lumped
// as rho * t * A / 3 per node.
inline Eigen::VectorXd nodal_loads(const TriMesh& mesh, const MaterialSpec& material,
                                   std::span<const LoadCase> loads) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * mesh.vertex_count()));
  for (const auto& load : loads) {
    if (const auto* p = std::get_if<InternalPressure>(&load)) {
      if (!std::isfinite(p->pressure)) throw PreconditionError("pressure load must be finite");
      for (const auto& tri : mesh.triangles()) {
        const Vec3 share = p->pressure * triangle_area_vector(mesh, tri) / 3.0;
        for (auto v : tri) f.segment<3>(3 * v) += share;
      }
    } else {
      const auto& g = std::get<GravitySelfWeight>(load);
      if (!std::isfinite(g.acceleration) || std::abs(g.direction.norm() - 1.0) > 1e-9) {
        throw PreconditionError("gravity load needs a finite magnitude and unit direction");
      }
      const double w = material.density * material.thickness * g.acceleration / 3.0;
      for (const auto& tri : mesh.triangles()) {
        const Vec3 share = w * triangle_area(mesh, tri) * g.direction;
        for (auto v : tri) f.segment<3>(3 * v) += share;
      }
    }
  }
  return f;
}

// Solves K u = f with prescribed dofs by diagonally preconditioned conjugate
// gradients on the reduced system, then recovers element stresses.
inline AnalysisResult solve_membrane(const TriMesh& mesh, const MaterialSpec& material,
                                     const Eigen::VectorXd& f, std::span<const DofConstraint> constraints,
                                     const SolverOptions& options = {}) {
  const auto ndof = static_cast<Eigen::Index>(3 * mesh.vertex_count());
  if (f.size() != ndof) throw PreconditionError("load vector size does not match mesh");
  const Eigen::SparseMatrix<double> k = assemble_stiffness(mesh, material);

  std::vector<int> is_fixed(static_cast<std::size_t>(ndof), 0);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(ndof);
  for (const auto& c : constraints) {
    if (c.dof >= ndof) throw PreconditionError("constraint dof out of range");
    is_fixed[c.dof] = 1;
    u(c.dof) = c.value;
  }
  std::vector<Eigen::Index> free_to_global;
  std::vector<Eigen::Index> global_to_free(static_cast<std::size_t>(ndof), -1);
  for (Eigen::Index i = 0; i < ndof; ++i) {
    if (!is_fixed[i]) {
      global_to_free[i] = static_cast<Eigen::Index>(free_to_global.size());
      free_to_global.push_back(i);
    }
  }
  const auto nfree = static_cast<Eigen::Index>(free_to_global.size());

  AnalysisResult result;
  if (nfree > 0) {
    const Eigen::VectorXd ku_fixed = k * u;
    Eigen::VectorXd rhs(nfree);
    for (Eigen::Index i = 0; i < nfree; ++i) rhs(i) = f(free_to_global[i]) - ku_fixed(free_to_global[i]);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(k.nonZeros()));
    for (Eigen::Index col = 0; col < k.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it) {
        const auto r = global_to_free[it.row()];
        const auto c = global_to_free[it.col()];
        if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
      }
    }
    Eigen::SparseMatrix<double> kff(nfree, nfree);
    kff.setFromTriplets(trip.begin(), trip.end());

    const double diag_max = kff.diagonal().cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < nfree; ++i) {
      if (!(kff.coeff(i, i) > 1e-12 * diag_max)) {
        const auto g = free_to_global[i];
        throw RigidBodyError("dof " + std::to_string(g % 3) + " of vertex " + std::to_string(g / 3) +
                             " has no stiffness; the supports do not remove all rigid-body modes");
      }
    }

    if (rhs.norm() > 0.0) {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                               Eigen::DiagonalPreconditioner<double>>
          cg;
      cg.setTolerance(options.tolerance);
      cg.setMaxIterations(options.max_iterations > 0 ? options.max_iterations
                                                     : static_cast<int>(10 * nfree));
      cg.compute(kff);
      const Eigen::VectorXd uf = cg.solve(rhs);
      result.solver_iterations = static_cast<int>(cg.iterations());
      result.solver_residual = cg.error();
      if (cg.info() != Eigen::Success || !uf.allFinite()) {
        throw SolverError("conjugate gradient stopped at relative residual " +
                              std::to_string(cg.error()) + " after " +
                              std::to_string(cg.iterations()) + " iterations",
                          cg.error());
      }
      for (Eigen::Index i = 0; i < nfree; ++i) u(free_to_global[i]) = uf(i);
    }
  }

  const Eigen::VectorXd internal = k * u;
  for (Eigen::Index i = 0; i < ndof; ++i) {
    result.applied_load_sum(i % 3) += f(i);
    if (is_fixed[i]) result.reaction_sum(i % 3) += internal(i) - f(i);
  }

  result.displacements.resize(mesh.vertex_count());
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    result.displacements[v] = u.segment<3>(static_cast<Eigen::Index>(3 * v));
    result.max_displacement = std::max(result.max_displacement, result.displacements[v].norm());
  }
  const Eigen::Matrix3d d = detail::plane_stress(material);
  result.element_stress.reserve(mesh.triangle_count());
  result.von_mises.reserve(mesh.triangle_count());
  for (const auto& tri : mesh.triangles()) {
    const auto el = detail::make_cst(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
    Eigen::Matrix<double, 9, 1> ue;
    for (int node = 0; node < 3; ++node) ue.segment<3>(3 * node) = result.displacements[tri[node]];
    const Eigen::Vector3d s = d * (el.b * (detail::local_projection(el) * ue));
    ElementStress es{el.e1, el.e2, s(0), s(1), s(2)};
    result.element_stress.push_back(es);
    result.von_mises.push_back(von_mises(es));
    result.max_von_mises = std::max(result.max_von_mises, result.von_mises.back());
  }
  return result;
}

// Linear membrane analysis with every dof of the `fixed` vertices held at zero.
inline AnalysisResult assemble_and_solve(const TriMesh& mesh, const MaterialSpec& material,
                                         std::span<const LoadCase> loads,
                                         std::span<const std::uint32_t> fixed,
                                         const SolverOptions& options = {}) {
  material.validate();
  const std::set<std::uint32_t> unique(fixed.begin(), fixed.end());
  if (unique.empty()) throw RigidBodyError("no fixed vertices; the model can move as a rigid body");
  for (auto v : unique) {
    if (v >= mesh.vertex_count()) throw PreconditionError("fixed vertex index out of range");
  }
  // Fixed points must span a plane, or rotation about their common line stays free.
  bool spans_plane = false;
  if (unique.size() >= 3) {
    const Point3& a = mesh.vertex(*unique.begin());
    const Point3* b = nullptr;
    for (auto v : unique) {
      const Point3& p = mesh.vertex(v);
      if (!b) {
        if ((p - a).norm() > 0.0) b = &p;
        continue;
      }
      if ((*b - a).cross(p - a).norm() > 1e-9 * (*b - a).squaredNorm()) {
        spans_plane = true;
        break;
      }
    }
  }
  if (!spans_plane) {
    throw RigidBodyError("fixed vertices are fewer than three or collinear; rigid-body rotation is unrestrained");
  }
  std::vector<DofConstraint> constraints;
  constraints.reserve(unique.size() * 3);
  for (auto v : unique) {
    for (std::uint32_t c = 0; c < 3; ++c) constraints.push_back({3 * v + c, 0.0});
  }
  return solve_membrane(mesh, material, nodal_loads(mesh, material, loads), constraints, options);
}

// Vertices flagged as anchored, e.g. the base ring of a cap.
inline std::vector<std::uint32_t> anchored_vertices(const TriMesh& mesh) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < mesh.vertex_count(); ++i) {
    if (mesh.is_anchored(i)) out.push_back(i);
  }
  return out;
}

struct IsoContourSet {
  double level = 0.0;
  std::vector<Polyline3> polylines;
};

// Marching-triangles contours of a per-vertex scalar at each level.
inline std::vector<IsoContourSet> extract_isocontours(const TriMesh& mesh, std::span<const double> scalar,
                                                      std::span<const double> levels,
                                                      const ContourOptions& options = {}) {
  if (scalar.size() != mesh.vertex_count()) {
    throw PreconditionError("scalar field size does not match vertex count");
  }
  std::vector<IsoContourSet> out;
  std::vector<double> shifted(scalar.size());
  for (double level : levels) {
    if (!std::isfinite(level)) throw PreconditionError("contour level must be finite");
    for (std::size_t i = 0; i < scalar.size(); ++i) shifted[i] = scalar[i] - level;
    out.push_back({level, zero_level_set(mesh, shifted, options)});
  }
  return out;
}

} // namespace forma
