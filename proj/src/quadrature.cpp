#include "scatter3d/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "scatter3d/errors.hpp"

namespace scatter3d {

QuadratureRule gauss_legendre(std::size_t n) {
  if (n == 0) throw ParameterError("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi initial guess for the i-th root from the right.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = nd * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double kd = static_cast<double>(k);
      const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) {
      x = 0.0;
      dp = 1.0;
    } else {
      dp = nd * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

SphereRule sphere_rule(std::size_t n_theta, std::size_t n_phi) {
  if (n_phi == 0) throw ParameterError("sphere_rule: need at least one azimuthal node");
  const auto gl = gauss_legendre(n_theta);
  SphereRule rule;
  rule.n_theta = n_theta;
  rule.n_phi = n_phi;
  rule.points.reserve(n_theta * n_phi);
  rule.weights.reserve(n_theta * n_phi);
  const double dphi = 2.0 * std::numbers::pi / static_cast<double>(n_phi);
  for (std::size_t i = 0; i < n_theta; ++i) {
    const double ct = gl.nodes[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (std::size_t j = 0; j < n_phi; ++j) {
      const double phi = dphi * static_cast<double>(j);
      rule.points.push_back({st * std::cos(phi), st * std::sin(phi), ct});
      rule.weights.push_back(gl.weights[i] * dphi);
    }
  }
  return rule;
}

double integrate_to_infinity(const std::function<double(double)>& f, double start) {
  if (!(start > 0.0)) throw ParameterError("integrate_to_infinity: start must be positive");
  auto mapped = [&](double u) {
    const double t = start / (u * u);
    return f(t) * 2.0 * start / (u * u * u);
  };
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(mapped, 0.0, 1.0, 15,
                                                                       1e-15, &error);
}

double ball_volume(double t) { return 4.0 * std::numbers::pi / 3.0 * t * std::sqrt(t); }

}  // namespace scatter3d
