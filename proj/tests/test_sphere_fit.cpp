#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "forma/mesh.hpp"
#include "forma/sphere_fit.hpp"

using namespace forma;

namespace {

std::vector<Point3> fibonacci_sphere(std::size_t n, double r, const Point3& c) {
  std::vector<Point3> pts;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double rho = std::sqrt(1.0 - z * z);
    pts.push_back(c + r * Point3(rho * std::cos(golden * i), rho * std::sin(golden * i), z));
  }
  return pts;
}

} // namespace

TEST(SphereFit, ExactPoints) {
  const auto pts = fibonacci_sphere(200, 2.0, Point3::Zero());
  const auto fit = fit_sphere(pts);
  EXPECT_NEAR(fit.radius, 2.0, 1e-9);
  EXPECT_LT(fit.rms, 1e-9);
  EXPECT_LT(fit.center.norm(), 1e-9);
}

TEST(SphereFit, ScaleEquivariance) {
  auto pts = fibonacci_sphere(200, 2.0, Point3::Zero());
  for (auto& p : pts) p *= 2.6;
  EXPECT_NEAR(fit_sphere(pts).radius, 5.2, 1e-9);
}

TEST(SphereFit, OffCentreCapOnly) {
  const Point3 c(3.0, -1.0, 10.0);
  std::vector<Point3> pts;
  for (const auto& p : fibonacci_sphere(400, 1.5, Point3::Zero())) {
    if (p.z() > 0.5) pts.push_back(c + p);
  }
  const auto fit = fit_sphere(pts);
  EXPECT_NEAR(fit.radius, 1.5, 1e-9);
  EXPECT_LT((fit.center - c).norm(), 1e-9);
}

TEST(SphereFit, RadialNoiseMonteCarlo) {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = fibonacci_sphere(500, 1.0, Point3::Zero());
    for (auto& p : pts) p *= 1.0 + noise(rng);
    const auto fit = fit_sphere(pts);
    EXPECT_NEAR(fit.radius, 1.0, 0.005);
    EXPECT_GT(fit.rms, 0.005);
    EXPECT_LT(fit.rms, 0.02);
  }
}

TEST(SphereFit, Degenerate) {
  EXPECT_THROW(fit_sphere(std::vector<Point3>{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}), PreconditionError);
  std::vector<Point3> planar;
  for (int i = 0; i < 10; ++i) planar.emplace_back(i, i * i, 0.0);
  EXPECT_THROW(fit_sphere(planar), PreconditionError);
}

TEST(SphereFit, FreeVerticesOfCap) {
  const auto fit = fit_sphere_free_vertices(generate_cap_mesh(5.2, 4));
  EXPECT_NEAR(fit.radius, 5.2, 1e-9);
}
