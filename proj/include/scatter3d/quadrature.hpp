#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace scatter3d {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(std::size_t n);

/// Product rule on S^2: Gauss-Legendre in cos(theta) times a uniform
/// azimuthal grid. Weights are for the surface measure (total 4*pi).
/// Exact for polynomials of degree <= min(2*n_theta - 1, n_phi - 1).
struct SphereRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  std::size_t n_theta = 0;
  std::size_t n_phi = 0;
};

SphereRule sphere_rule(std::size_t n_theta, std::size_t n_phi);

/// Integral of f over [start, inf) for integrands decaying at least like
/// t^{-3/2}; the substitution t = start / u^2 maps it to a smooth integral
/// over (0, 1] that is handled by adaptive Gauss-Kronrod.
double integrate_to_infinity(const std::function<double(double)>& f, double start);

/// Volume of the ball of radius sqrt(t): the smooth part of sum_{n<=t} r3(n).
double ball_volume(double t);

}  // namespace scatter3d
