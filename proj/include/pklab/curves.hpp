// Geodesic integration (fixed-step RK4) and T-planarity of sampled curves.
#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "pklab/fields.hpp"

namespace pklab {

struct CurveSample {
  double t = 0.0;
  Point x{};
  Vec4 v = Vec4::Zero();
  Vec4 acc_cov = Vec4::Zero();  // nabla_v v for the metric last used by covariant_acceleration
  double residual = 0.0;        // T-planarity residual at this sample, if computed
};

struct Curve {
  std::vector<CurveSample> samples;
  double h = 0.0;
  bool exited_box = false;  // integration stopped before the requested step count
};

// extra acceleration term: x'' = -Gamma(x)(x',x') + force(t, x, x')
using Forcing = std::function<Vec4(double, const Point&, const Vec4&)>;

// Christoffel contraction Gamma^k_ij v^i w^j at p
Vec4 christoffel_contract(const TensorField& g, const Point& p, const Vec4& v, const Vec4& w);

// N RK4 steps of size h; stops (and flags) before leaving the box
Curve integrate_geodesic(const TensorField& g, const Box& box, const Point& p0, const Vec4& v0, double h, int N);
Curve integrate_forced(const TensorField& g, const Box& box, const Point& p0, const Vec4& v0, double h, int N,
                       const Forcing& force);

// fills acc_cov from 5-point differences of the sampled velocities plus Gamma(v, v);
// the two samples at each end are left at zero
void covariant_acceleration(const TensorField& g, Curve& c);

// max over interior samples of the Euclidean distance of nabla_v v from span{v, Tv},
// divided by max(|v|^2, 1); fills per-sample residuals
double t_planarity_residual(const TensorField& g, const TensorField& T, Curve& c);

// max_t |g(v,v)(t) - g(v,v)(0)|
double energy_drift(const TensorField& g, const Curve& c);
// max_t |g(v, X)(t) - g(v, X)(0)|
double momentum_drift(const TensorField& g, const VectorField& X, const Curve& c);

struct Convergence {
  std::vector<double> h;
  std::vector<double> residual;
  std::vector<double> order;  // log2 of consecutive ratios
};

// same initial data and end time t_end for each step; h must halve
Convergence planarity_convergence(const TensorField& integrate_with, const TensorField& g, const TensorField& T,
                                  const Box& box, const Point& p0, const Vec4& v0, const std::vector<double>& hs,
                                  double t_end);

// t, x1..x4, v1..v4, residual
void write_csv(std::ostream& os, const Curve& c);

}  // namespace pklab
