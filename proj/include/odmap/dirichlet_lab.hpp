#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "odmap/core_map.hpp"
#include "odmap/generators.hpp"
#include "odmap/geometry.hpp"
#include "odmap/network.hpp"

namespace odmap {

struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

Box bounding_box(const std::vector<Point2>& pts);
Box box_union(const Box& a, const Box& b);

// Harmonic function f = Re F with F entire.
struct TestFunction {
  std::string name;
  std::function<double(Point2)> value;
  std::function<Point2(Point2)> gradient;
  std::function<std::array<double, 3>(Point2)> hessian;  // fxx, fxy, fyy
  std::function<double(Point2)> conjugate;
  // Exact suprema of |grad f| and of the spectral norm of the Hessian over a box.
  std::function<double(const Box&)> grad_sup;
  std::function<double(const Box&)> hess_sup;
};

const std::vector<std::string>& test_function_names();
// Throws std::invalid_argument for unknown names.
TestFunction test_function(const std::string& name);

struct DirichletSolution {
  MapNetwork primal;
  std::vector<char> boundary;  // by primal network index
  VertexFunction h;            // by primal network index
  SolveStats stats;
  double residual = 0.0;  // worst |sum c (h(y) - h(x))| / (pi(x) * max|g|) over interior vertices
};

DirichletSolution solve_dirichlet(const OrthodiagonalMap& map, const TestFunction& g, const SolverOptions& opt = {});
// Boundary values by primal vertex id; throws StructuralError when a boundary id is missing.
DirichletSolution solve_dirichlet(const OrthodiagonalMap& map, const std::map<int, double>& boundary_values,
                                  const SolverOptions& opt = {});

// Integral of q over a triangle with an n-point Gauss rule on the collapsed square, n in {7, 10, 15, 20, 30}.
double triangle_integral(Point2 a, Point2 b, Point2 c, const std::function<double(Point2)>& q, int n);
// Integral of |grad f|^2 over the union of faces; the rule grows until two successive totals agree to 1e-10.
double gradient_energy_integral(const OrthodiagonalMap& map, const TestFunction& f, int* points_used = nullptr);

struct EnergyPair {
  double primal = 0.0;  // E•(f)
  double dual = 0.0;    // E°(f)
  double integral = 0.0;
  double discrepancy = 0.0;  // (E• + E°)/2 - integral
  double bound = 0.0;        // area (10 L M eps + 8 M^2 eps^2)
  double L = 0.0, M = 0.0, eps = 0.0, area = 0.0;
  bool holds() const { return std::abs(discrepancy) <= bound + 1e-12 * std::max(1.0, integral); }
};

EnergyPair energy_pair_check(const OrthodiagonalMap& map, const TestFunction& f);

struct EnergyConvergence {
  double lhs = 0.0;  // E•(h_c - h_d)
  double rhs = 0.0;  // 32 area M^2 eps^2
  double M = 0.0, eps = 0.0, area = 0.0;
  // Round-off allowance matches the linear case, where lhs should vanish.
  bool holds() const { return lhs <= rhs + 1e-18; }
};

EnergyConvergence energy_convergence_check(const OrthodiagonalMap& map, const TestFunction& f,
                                           const SolverOptions& opt = {});
EnergyConvergence energy_convergence_check(const OrthodiagonalMap& map, const TestFunction& f,
                                           const DirichletSolution& sol);

// max |h_d - f| over primal vertices inside the closed domain.
double sup_error(const OrthodiagonalMap& map, const Domain& domain, const TestFunction& f, const SolverOptions& opt = {});
double sup_error(const OrthodiagonalMap& map, const Domain& domain, const TestFunction& f, const DirichletSolution& sol);

// diam (C1 + C2 eps) / sqrt(log(diam / max(delta, eps))), C1 and C2 over the box of the domain and the map.
double thm1_shape(const OrthodiagonalMap& map, const Domain& domain, const TestFunction& f, double eps, double delta);

struct SweepRecord {
  std::string family;
  int n = 0;
  double eps = 0, delta = 0;
  double sup_error = 0, energy_error = 0, prop52_bound = 0;
  double prop51_disc = 0, prop51_bound = 0;
  double thm1_shape = 0;
  double runtime_ms = 0;
  std::string error;  // non-empty when the level failed; numeric fields are then NaN
  bool ok() const { return error.empty(); }
  // Same round-off allowances as EnergyConvergence and EnergyPair.
  bool bounds_hold() const {
    return energy_error <= prop52_bound + 1e-18 && std::abs(prop51_disc) <= prop51_bound + 1e-12;
  }
};

// One record per level in level order; levels run on up to `threads` workers.
std::vector<SweepRecord> convergence_sweep(const GeneratorSpec& base, const std::vector<int>& levels,
                                           const TestFunction& f, int threads = 1, const SolverOptions& opt = {});
// Domain the generator family actually targets (the unit disk for packed families).
Domain sweep_domain(const GeneratorSpec& spec);

std::string sweep_csv(const std::vector<SweepRecord>& records);

struct HarmonicMeasureComparison {
  std::vector<double> exit_arcs;      // exact exit measure of the walk, aggregated per arc
  std::vector<double> harmonic_arcs;  // harmonic measure of each arc seen from the start point
  double tv = 0.0;
  double start_offset = 0.0;  // |start|
};

// Harmonic measure of the arc [a, b] of the unit circle seen from z, |z| < 1.
double disk_arc_measure(Point2 z, double a, double b);

// Arcs [2 pi j / k, 2 pi (j + 1) / k); boundary primal vertices are assigned by their argument.
HarmonicMeasureComparison harmonic_measure_compare(const OrthodiagonalMap& map, int start_vertex, int arcs,
                                                   const SolverOptions& opt = {});

}  // namespace odmap
