#include "odmap/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <string>

#include "odmap/errors.hpp"

namespace odmap {

Network::Network(int num_vertices, std::vector<Edge> edges)
    : n_(num_vertices), edges_(std::move(edges)), pi_(num_vertices, 0.0), incident_(num_vertices) {
  for (int e = 0; e < num_edges(); ++e) {
    const Edge& ed = edges_[e];
    if (ed.tail < 0 || ed.tail >= n_ || ed.head < 0 || ed.head >= n_) {
      throw StructuralError("edge " + std::to_string(e) + " has an endpoint out of range");
    }
    if (!(ed.c > 0) || !std::isfinite(ed.c)) {
      throw GeometryError("edge " + std::to_string(e) + " has non-positive or non-finite conductance");
    }
    pi_[ed.tail] += ed.c;
    incident_[ed.tail].push_back(e);
    if (ed.head != ed.tail) {
      pi_[ed.head] += ed.c;
      incident_[ed.head].push_back(e);
    }
  }
}

std::vector<int> Network::components() const {
  std::vector<int> label(n_, -1);
  int next = 0;
  for (int s = 0; s < n_; ++s) {
    if (label[s] >= 0) continue;
    std::vector<int> stack{s};
    label[s] = next;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (int e : incident_[x]) {
        int y = other_end(e, x);
        if (label[y] < 0) {
          label[y] = next;
          stack.push_back(y);
        }
      }
    }
    ++next;
  }
  return label;
}

int Network::num_components() const {
  auto label = components();
  return label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
}

EdgeField discrete_gradient(const Network& net, const VertexFunction& f) {
  if (static_cast<int>(f.size()) != net.num_vertices()) throw StructuralError("vertex function has wrong size");
  EdgeField out(net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) {
    const Edge& ed = net.edge(e);
    out[e] = ed.c * (f[ed.head] - f[ed.tail]);
  }
  return out;
}

double inner_product(const Network& net, const EdgeField& a, const EdgeField& b) {
  double s = 0.0;
  for (int e = 0; e < net.num_edges(); ++e) s += a[e] * b[e] / net.conductance(e);
  return s;
}

double energy(const Network& net, const EdgeField& theta) { return inner_product(net, theta, theta); }

double energy_of_function(const Network& net, const VertexFunction& f) {
  double s = 0.0;
  for (const Edge& ed : net.edges()) {
    double d = f[ed.head] - f[ed.tail];
    s += ed.c * d * d;
  }
  return s;
}

std::vector<double> divergence(const Network& net, const EdgeField& theta) {
  std::vector<double> out(net.num_vertices(), 0.0);
  for (int e = 0; e < net.num_edges(); ++e) {
    const Edge& ed = net.edge(e);
    out[ed.tail] += theta[e];
    out[ed.head] -= theta[e];
  }
  return out;
}

VertexFunction solve_laplacian(const Network& net, const std::vector<char>& fixed,
                               const VertexFunction& fixed_values, const VertexFunction& rhs,
                               const SolverOptions& opt, SolveStats* stats) {
  int n = net.num_vertices();
  if (static_cast<int>(fixed.size()) != n || static_cast<int>(fixed_values.size()) != n ||
      static_cast<int>(rhs.size()) != n) {
    throw StructuralError("solve_laplacian: input sizes do not match the network");
  }
  // Every component with a free vertex needs a fixed vertex, otherwise the system is singular.
  auto label = net.components();
  int ncomp = label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
  std::vector<char> anchored(ncomp, 0), has_free(ncomp, 0);
  for (int x = 0; x < n; ++x) (fixed[x] ? anchored : has_free)[label[x]] = 1;
  for (int c = 0; c < ncomp; ++c) {
    if (has_free[c] && !anchored[c]) throw GeometryError("component without boundary vertices; Laplacian is singular");
  }

  VertexFunction f(n, 0.0);
  std::vector<int> free_index(n, -1), free_vertices;
  for (int x = 0; x < n; ++x) {
    if (fixed[x]) {
      f[x] = fixed_values[x];
    } else {
      free_index[x] = static_cast<int>(free_vertices.size());
      free_vertices.push_back(x);
    }
  }
  int m = static_cast<int>(free_vertices.size());
  if (stats) *stats = {};
  if (m == 0) return f;

  // CSR of the free block, diagonal separate.
  std::vector<int> row_start(m + 1, 0), cols;
  std::vector<double> vals, diag(m, 0.0), b(m, 0.0);
  for (int i = 0; i < m; ++i) {
    int x = free_vertices[i];
    b[i] = rhs[x];
    for (int e : net.incident(x)) {
      const Edge& ed = net.edge(e);
      if (ed.tail == ed.head) continue;
      int y = net.other_end(e, x);
      diag[i] += ed.c;
      if (fixed[y]) {
        b[i] += ed.c * fixed_values[y];
      } else {
        cols.push_back(free_index[y]);
        vals.push_back(ed.c);
      }
    }
    row_start[i + 1] = static_cast<int>(cols.size());
  }
  auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (int i = 0; i < m; ++i) {
      double s = diag[i] * v[i];
      for (int k = row_start[i]; k < row_start[i + 1]; ++k) s -= vals[k] * v[cols[k]];
      out[i] = s;
    }
  };
  auto dotv = [](const std::vector<double>& a, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * c[i];
    return s;
  };

  std::vector<double> x(m, 0.0), r = b, z(m), p(m), q(m);
  double bnorm = std::sqrt(dotv(b, b));
  double target = opt.rel_tol * (bnorm + bnorm);
  int max_iter = opt.max_iter > 0 ? opt.max_iter : 10 * m + 100;
  for (int i = 0; i < m; ++i) z[i] = r[i] / diag[i];
  p = z;
  double rz = dotv(r, z);
  double rnorm = bnorm;
  int it = 0;
  while (rnorm > target && it < max_iter) {
    apply(p, q);
    double alpha = rz / dotv(p, q);
    for (int i = 0; i < m; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    rnorm = std::sqrt(dotv(r, r));
    for (int i = 0; i < m; ++i) z[i] = r[i] / diag[i];
    double rz_new = dotv(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
    ++it;
  }
  if (rnorm > target) {
    throw ConvergenceError("conjugate gradient did not converge in " + std::to_string(it) + " iterations", rnorm);
  }
  if (stats) *stats = {it, rnorm};
  for (int i = 0; i < m; ++i) f[free_vertices[i]] = x[i];
  return f;
}

namespace {

void check_problem(const DirichletProblem& p) {
  if (!p.net) throw StructuralError("Dirichlet problem without a network");
  int n = p.net->num_vertices();
  if (static_cast<int>(p.is_boundary.size()) != n || static_cast<int>(p.g.size()) != n) {
    throw StructuralError("Dirichlet problem: boundary flags or data have the wrong size");
  }
  if (std::none_of(p.is_boundary.begin(), p.is_boundary.end(), [](char c) { return c != 0; })) {
    throw GeometryError("Dirichlet problem: boundary set is empty");
  }
  if (!p.net->connected()) throw GeometryError("Dirichlet problem: network is disconnected");
}

}  // namespace

VertexFunction harmonic_extension(const DirichletProblem& problem, const SolverOptions& opt, SolveStats* stats) {
  check_problem(problem);
  VertexFunction zero(problem.net->num_vertices(), 0.0);
  return solve_laplacian(*problem.net, problem.is_boundary, problem.g, zero, opt, stats);
}

std::vector<double> node_law_residuals(const Network& net, const EdgeField& theta, const std::vector<char>& in_u) {
  auto div = divergence(net, theta);
  for (int x = 0; x < net.num_vertices(); ++x)
    if (!in_u[x]) div[x] = 0.0;
  return div;
}

CycleBasis fundamental_cycles(const Network& net) {
  int n = net.num_vertices();
  CycleBasis basis;
  basis.tree_edge.assign(net.num_edges(), 0);
  std::vector<int> parent_edge(n, -1), depth(n, -1);
  for (int root = 0; root < n; ++root) {
    if (depth[root] >= 0) continue;
    depth[root] = 0;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      int x = queue.front();
      queue.pop_front();
      for (int e : net.incident(x)) {
        int y = net.other_end(e, x);
        if (depth[y] >= 0) continue;
        depth[y] = depth[x] + 1;
        parent_edge[y] = e;
        basis.tree_edge[e] = 1;
        queue.push_back(y);
      }
    }
  }
  auto parent = [&](int x) { return net.other_end(parent_edge[x], x); };
  for (int e = 0; e < net.num_edges(); ++e) {
    if (basis.tree_edge[e]) continue;
    const Edge& ed = net.edge(e);
    std::vector<std::pair<int, int>> cycle{{e, +1}};
    if (ed.tail != ed.head) {
      // Walk head -> lca -> tail through the tree.
      int a = ed.head, b = ed.tail;
      std::vector<std::pair<int, int>> down;
      while (a != b) {
        if (depth[a] >= depth[b]) {
          int pe = parent_edge[a];
          cycle.push_back({pe, net.edge(pe).tail == a ? +1 : -1});
          a = parent(a);
        } else {
          int pe = parent_edge[b];
          down.push_back({pe, net.edge(pe).tail == b ? -1 : +1});
          b = parent(b);
        }
      }
      cycle.insert(cycle.end(), down.rbegin(), down.rend());
    }
    basis.cycles.push_back(std::move(cycle));
  }
  return basis;
}

std::vector<double> cycle_law_residuals(const Network& net, const EdgeField& theta, const CycleBasis& basis) {
  std::vector<double> out;
  out.reserve(basis.cycles.size());
  for (const auto& cycle : basis.cycles) {
    double s = 0.0;
    for (auto [e, sign] : cycle) s += sign * net.resistance(e) * theta[e];
    out.push_back(s);
  }
  return out;
}

std::vector<double> cycle_law_residuals(const Network& net, const EdgeField& theta) {
  return cycle_law_residuals(net, theta, fundamental_cycles(net));
}

EdgeField star(const Network& net, int x) {
  EdgeField out(net.num_edges(), 0.0);
  for (int e : net.incident(x)) {
    const Edge& ed = net.edge(e);
    if (ed.tail == ed.head) continue;
    out[e] = ed.tail == x ? ed.c : -ed.c;
  }
  return out;
}

EdgeField chi(const Network& net, int e) {
  EdgeField out(net.num_edges(), 0.0);
  out[e] = 1.0;
  return out;
}

namespace {

std::vector<char> membership(int n, const std::vector<int>& set, const char* name) {
  std::vector<char> in(n, 0);
  for (int x : set) {
    if (x < 0 || x >= n) throw StructuralError(std::string(name) + " contains a vertex out of range");
    in[x] = 1;
  }
  return in;
}

}  // namespace

double strength(const Network& net, const EdgeField& theta, const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() || b.empty()) throw GeometryError("strength: A and B must be nonempty");
  auto in_a = membership(net.num_vertices(), a, "A");
  for (int y : b)
    if (in_a.at(y)) throw GeometryError("strength: A and B overlap");
  double s = 0.0;
  for (int e = 0; e < net.num_edges(); ++e) {
    const Edge& ed = net.edge(e);
    if (in_a[ed.tail]) s += theta[e];
    if (in_a[ed.head]) s -= theta[e];
  }
  return s;
}

double strength_into(const Network& net, const EdgeField& theta, const std::vector<int>& b) {
  auto in_b = membership(net.num_vertices(), b, "B");
  double s = 0.0;
  for (int e = 0; e < net.num_edges(); ++e) {
    const Edge& ed = net.edge(e);
    if (in_b[ed.head]) s += theta[e];
    if (in_b[ed.tail]) s -= theta[e];
  }
  return s;
}

double gap(const VertexFunction& f, const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() || b.empty()) throw GeometryError("gap: A and B must be nonempty");
  double min_b = INFINITY, max_a = -INFINITY;
  for (int x : b) min_b = std::min(min_b, f.at(x));
  for (int x : a) max_a = std::max(max_a, f.at(x));
  return min_b - max_a;
}

EdgeField project_to_current(const DirichletProblem& problem, const VertexFunction& f, const SolverOptions& opt) {
  DirichletProblem p = problem;
  p.g = f;
  return discrete_gradient(*p.net, harmonic_extension(p, opt));
}

SandwichResult sandwich_check(const DirichletProblem& problem, const VertexFunction& f, const EdgeField& theta,
                              double tol) {
  check_problem(problem);
  const Network& net = *problem.net;
  DirichletProblem p = problem;
  p.g = f;
  VertexFunction h = harmonic_extension(p);
  EdgeField df = discrete_gradient(net, f);
  EdgeField dh = discrete_gradient(net, h);
  EdgeField a(net.num_edges()), b(net.num_edges()), c(net.num_edges());
  double theta_max = 0.0;
  for (int e = 0; e < net.num_edges(); ++e) {
    a[e] = df[e] - dh[e];
    b[e] = theta[e] - dh[e];
    c[e] = df[e] - theta[e];
    theta_max = std::max(theta_max, std::abs(theta[e]));
  }
  SandwichResult r;
  r.df_minus_dh = energy(net, a);
  r.theta_minus_dh = energy(net, b);
  r.df_minus_theta = energy(net, c);
  double scale = std::max({r.df_minus_theta, r.df_minus_dh + r.theta_minus_dh, 1e-300});
  r.relative_error = std::abs(r.df_minus_dh + r.theta_minus_dh - r.df_minus_theta) / scale;
  std::vector<char> in_u(net.num_vertices());
  for (int x = 0; x < net.num_vertices(); ++x) in_u[x] = !problem.is_boundary[x];
  for (double d : node_law_residuals(net, theta, in_u)) r.flow_residual = std::max(r.flow_residual, std::abs(d));
  for (int x = 0; x < net.num_vertices(); ++x)
    if (problem.is_boundary[x]) r.boundary_mismatch = std::max(r.boundary_mismatch, std::abs(f[x] - h[x]));
  r.preconditions_ok = r.flow_residual <= tol * std::max(1.0, theta_max);
  return r;
}

DirichletThomsonResult dirichlet_thomson_check(const Network& net, const EdgeField& theta, const VertexFunction& f,
                                               const std::vector<int>& a, const std::vector<int>& b) {
  DirichletThomsonResult r;
  r.strength = strength(net, theta, a, b);
  r.gap = gap(f, a, b);
  r.negative_gap = r.gap < 0;
  r.lhs = r.strength * r.gap;
  r.rhs = std::sqrt(energy(net, theta) * energy_of_function(net, f));
  std::vector<char> in_u(net.num_vertices(), 1);
  for (int x : a) in_u[x] = 0;
  for (int x : b) in_u[x] = 0;
  for (double d : node_law_residuals(net, theta, in_u)) r.flow_residual = std::max(r.flow_residual, std::abs(d));
  return r;
}

StarCycleDecomposition star_cycle_decomposition(const Network& net, const EdgeField& theta, const SolverOptions& opt) {
  int n = net.num_vertices();
  auto label = net.components();
  int ncomp = label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
  std::vector<char> fixed(n, 0), seen(ncomp, 0);
  for (int x = 0; x < n; ++x) {
    if (!seen[label[x]]) {
      seen[label[x]] = 1;
      fixed[x] = 1;
    }
  }
  auto div = divergence(net, theta);
  VertexFunction rhs(n);
  for (int x = 0; x < n; ++x) rhs[x] = -div[x];
  StarCycleDecomposition out;
  out.potential = solve_laplacian(net, fixed, VertexFunction(n, 0.0), rhs, opt);
  out.star_part = discrete_gradient(net, out.potential);
  out.cycle_part.resize(net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) out.cycle_part[e] = theta[e] - out.star_part[e];
  out.star_dimension = n - ncomp;
  out.cycle_dimension = net.num_edges() - n + ncomp;
  return out;
}

double ExitMeasure::total() const { return std::accumulate(probability.begin(), probability.end(), 0.0); }

ExitMeasure exit_measure_exact(const DirichletProblem& problem, int start, const SolverOptions& opt) {
  check_problem(problem);
  const Network& net = *problem.net;
  if (start < 0 || start >= net.num_vertices()) throw StructuralError("start vertex out of range");
  ExitMeasure out;
  std::vector<int> slot(net.num_vertices(), -1);
  for (int x = 0; x < net.num_vertices(); ++x) {
    if (!problem.is_boundary[x]) continue;
    slot[x] = static_cast<int>(out.boundary.size());
    out.boundary.push_back(x);
  }
  out.probability.assign(out.boundary.size(), 0.0);
  if (problem.is_boundary[start]) {
    out.probability[slot[start]] = 1.0;
    return out;
  }
  VertexFunction rhs(net.num_vertices(), 0.0);
  rhs[start] = 1.0;
  VertexFunction green = solve_laplacian(net, problem.is_boundary, VertexFunction(net.num_vertices(), 0.0), rhs, opt);
  for (int e = 0; e < net.num_edges(); ++e) {
    const Edge& ed = net.edge(e);
    bool bt = problem.is_boundary[ed.tail], bh = problem.is_boundary[ed.head];
    if (bt && !bh) out.probability[slot[ed.tail]] += ed.c * green[ed.head];
    if (bh && !bt) out.probability[slot[ed.head]] += ed.c * green[ed.tail];
  }
  return out;
}

ExitMeasure exit_measure_sampled(const DirichletProblem& problem, int start, int walks, std::uint64_t seed) {
  check_problem(problem);
  const Network& net = *problem.net;
  ExitMeasure out;
  std::vector<int> slot(net.num_vertices(), -1);
  for (int x = 0; x < net.num_vertices(); ++x) {
    if (!problem.is_boundary[x]) continue;
    slot[x] = static_cast<int>(out.boundary.size());
    out.boundary.push_back(x);
  }
  std::vector<double> counts(out.boundary.size(), 0.0);
  std::vector<std::vector<double>> cumulative(net.num_vertices());
  for (int x = 0; x < net.num_vertices(); ++x) {
    double s = 0.0;
    for (int e : net.incident(x)) {
      s += net.conductance(e);
      cumulative[x].push_back(s);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < walks; ++k) {
    int x = start;
    while (!problem.is_boundary[x]) {
      const auto& cum = cumulative[x];
      double u = unif(rng) * cum.back();
      std::size_t i = std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
      if (i >= cum.size()) i = cum.size() - 1;
      x = net.other_end(net.incident(x)[i], x);
    }
    counts[slot[x]] += 1.0;
  }
  out.probability.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out.probability[i] = counts[i] / walks;
  return out;
}

}  // namespace odmap
