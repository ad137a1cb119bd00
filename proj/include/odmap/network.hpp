#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace odmap {

// Reference orientation tail -> head; c is the conductance.
struct Edge {
  int tail = 0;
  int head = 0;
  double c = 1.0;
};

using VertexFunction = std::vector<double>;
// One value per edge, read in the edge's reference orientation.
using EdgeField = std::vector<double>;

class Network {
 public:
  Network() = default;
  Network(int num_vertices, std::vector<Edge> edges);

  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }
  double conductance(int e) const { return edges_[e].c; }
  double resistance(int e) const { return 1.0 / edges_[e].c; }
  double pi(int x) const { return pi_[x]; }
  const std::vector<int>& incident(int x) const { return incident_[x]; }
  int other_end(int e, int x) const { return edges_[e].tail == x ? edges_[e].head : edges_[e].tail; }

  // Component label per vertex, labels dense from 0.
  std::vector<int> components() const;
  int num_components() const;
  bool connected() const { return num_components() <= 1; }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> pi_;
  std::vector<std::vector<int>> incident_;
};

// Boundary set V \ U and its data; values of g off the boundary are ignored.
struct DirichletProblem {
  const Network* net = nullptr;
  std::vector<char> is_boundary;
  VertexFunction g;
};

struct SolverOptions {
  double rel_tol = 1e-12;
  int max_iter = 0;  // 0 means 10 * |U| + 100
};

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
};

EdgeField discrete_gradient(const Network& net, const VertexFunction& f);
double inner_product(const Network& net, const EdgeField& a, const EdgeField& b);
double energy(const Network& net, const EdgeField& theta);
double energy_of_function(const Network& net, const VertexFunction& f);

// Net outflow sum over e- = x of theta(e), for every vertex.
std::vector<double> divergence(const Network& net, const EdgeField& theta);

// Solves sum_y c(x,y) (f(y) - f(x)) = -rhs(x) on free vertices, fixed values elsewhere.
// Jacobi-preconditioned conjugate gradient.
VertexFunction solve_laplacian(const Network& net, const std::vector<char>& fixed,
                               const VertexFunction& fixed_values, const VertexFunction& rhs,
                               const SolverOptions& opt = {}, SolveStats* stats = nullptr);

VertexFunction harmonic_extension(const DirichletProblem& problem, const SolverOptions& opt = {},
                                  SolveStats* stats = nullptr);

// Divergence restricted to U (zero on the boundary set).
std::vector<double> node_law_residuals(const Network& net, const EdgeField& theta,
                                       const std::vector<char>& in_u);

struct CycleBasis {
  // Each cycle is a list of (edge, sign) with sign +1 when traversed along the reference orientation.
  std::vector<std::vector<std::pair<int, int>>> cycles;
  std::vector<char> tree_edge;
};

// Fundamental cycles of a breadth-first spanning forest rooted at the lowest index of each component.
CycleBasis fundamental_cycles(const Network& net);
std::vector<double> cycle_law_residuals(const Network& net, const EdgeField& theta);
std::vector<double> cycle_law_residuals(const Network& net, const EdgeField& theta, const CycleBasis& basis);

// Star of x: c(e) on edges leaving x, -c(e) on edges entering x.
EdgeField star(const Network& net, int x);
// Unit field chi^e along the reference orientation of edge e.
EdgeField chi(const Network& net, int e);

// Sum over e- in A of theta(e); throws on overlapping A, B.
double strength(const Network& net, const EdgeField& theta, const std::vector<int>& a,
                const std::vector<int>& b);
// Sum over e+ in B of theta(e).
double strength_into(const Network& net, const EdgeField& theta, const std::vector<int>& b);
double gap(const VertexFunction& f, const std::vector<int>& a, const std::vector<int>& b);

EdgeField project_to_current(const DirichletProblem& problem, const VertexFunction& f,
                             const SolverOptions& opt = {});

struct SandwichResult {
  double df_minus_dh = 0.0;     // E(c df - c dh)
  double theta_minus_dh = 0.0;  // E(theta - c dh)
  double df_minus_theta = 0.0;  // E(c df - theta)
  double relative_error = 0.0;
  double flow_residual = 0.0;      // worst node-law residual of theta on U
  double boundary_mismatch = 0.0;  // worst |f - h| on the boundary set
  bool preconditions_ok = false;
};

SandwichResult sandwich_check(const DirichletProblem& problem, const VertexFunction& f,
                              const EdgeField& theta, double tol = 1e-9);

struct DirichletThomsonResult {
  double strength = 0.0;
  double gap = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool negative_gap = false;
  double flow_residual = 0.0;  // worst node-law residual off A and B
  bool holds() const { return lhs <= rhs * (1 + 1e-12) + 1e-300; }
};

DirichletThomsonResult dirichlet_thomson_check(const Network& net, const EdgeField& theta,
                                               const VertexFunction& f, const std::vector<int>& a,
                                               const std::vector<int>& b);

struct StarCycleDecomposition {
  EdgeField star_part;
  EdgeField cycle_part;
  VertexFunction potential;  // star_part = c d(potential)
  int star_dimension = 0;    // |V| - number of components
  int cycle_dimension = 0;   // |E| - |V| + number of components
};

StarCycleDecomposition star_cycle_decomposition(const Network& net, const EdgeField& theta,
                                                const SolverOptions& opt = {});

struct ExitMeasure {
  std::vector<int> boundary;          // vertex indices
  std::vector<double> probability;    // aligned with boundary
  double total() const;
};

// Exact exit distribution via one solve with the Green function column of the start vertex.
ExitMeasure exit_measure_exact(const DirichletProblem& problem, int start, const SolverOptions& opt = {});
// Monte Carlo estimate from independent walks.
ExitMeasure exit_measure_sampled(const DirichletProblem& problem, int start, int walks, std::uint64_t seed);

}  // namespace odmap
