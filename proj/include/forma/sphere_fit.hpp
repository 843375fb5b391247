#pragma once

#include <cmath>
#include <span>

#include <Eigen/Dense>

#include "forma/mesh.hpp"

namespace forma {

struct SphereFit {
  Point3 center = Point3::Zero();
  double radius = 0.0;
  double rms = 0.0;  // root-mean-square radial deviation
};

// Algebraic least-squares sphere: |p|^2 = 2 c.p + (r^2 - |c|^2), solved on
// centroid-shifted points for conditioning.
inline SphereFit fit_sphere(std::span<const Point3> points) {
  if (points.size() < 4) throw PreconditionError("sphere fit needs at least 4 points");
  Point3 centroid = Point3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(n, 4);
  Eigen::VectorXd b(n);
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    scale = std::max(scale, (points[i] - centroid).norm());
  }
  if (!(scale > 0.0)) throw PreconditionError("sphere fit input points coincide");
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 q = (points[i] - centroid) / scale;
    a.row(i) << 2.0 * q.x(), 2.0 * q.y(), 2.0 * q.z(), 1.0;
    b(i) = q.squaredNorm();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(3) <= 1e-10 * sv(0)) {
    throw PreconditionError("sphere fit input is coplanar or otherwise degenerate");
  }
  const Eigen::Vector4d x = svd.solve(b);
  const Vec3 c = x.head<3>();
  const double r2 = x(3) + c.squaredNorm();
  if (!(r2 > 0.0)) throw PreconditionError("sphere fit produced a non-positive radius");

  SphereFit fit;
  fit.center = centroid + scale * c;
  fit.radius = scale * std::sqrt(r2);
  double sum = 0.0;
  for (const auto& p : points) {
    const double dev = (p - fit.center).norm() - fit.radius;
    sum += dev * dev;
  }
  fit.rms = std::sqrt(sum / static_cast<double>(points.size()));
  return fit;
}

// Fit over the non-anchored vertices of a mesh.
inline SphereFit fit_sphere_free_vertices(const TriMesh& mesh) {
  std::vector<Point3> pts;
  pts.reserve(mesh.vertex_count());
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    if (!mesh.is_anchored(i)) pts.push_back(mesh.vertex(i));
  }
  return fit_sphere(pts);
}

} // namespace forma
