#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "odmap/network.hpp"

namespace testsupport {

using odmap::Edge;
using odmap::Network;
using odmap::VertexFunction;

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(gen); }
  // Log-uniform on [a, b].
  double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }
};

// Random spanning tree plus extra edges (parallel edges allowed), conductances in [0.1, 10].
inline Network random_network(Rng& rng, int n, int m) {
  std::vector<Edge> edges;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng.gen);
  for (int i = 1; i < n; ++i) edges.push_back({perm[rng.integer(0, i - 1)], perm[i], rng.log_uniform(0.1, 10)});
  while (static_cast<int>(edges.size()) < m) {
    int a = rng.integer(0, n - 1), b = rng.integer(0, n - 1);
    if (a != b) edges.push_back({a, b, rng.log_uniform(0.1, 10)});
  }
  return Network(n, std::move(edges));
}

inline Network grid_network(int k, double c = 1.0) {
  std::vector<Edge> e;
  auto id = [k](int i, int j) { return i * k + j; };
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (i + 1 < k) e.push_back({id(i, j), id(i + 1, j), c});
      if (j + 1 < k) e.push_back({id(i, j), id(i, j + 1), c});
    }
  return Network(k * k, std::move(e));
}

// Two disjoint nonempty vertex sets.
inline void random_disjoint_sets(Rng& rng, int n, std::vector<int>& a, std::vector<int>& b) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng.gen);
  int na = rng.integer(1, std::max(1, n / 4));
  int nb = rng.integer(1, std::max(1, n / 4));
  a.assign(perm.begin(), perm.begin() + na);
  b.assign(perm.begin() + na, perm.begin() + na + nb);
}

// Dense direct solve of the interior Laplacian block.
inline VertexFunction dense_harmonic(const Network& net, const std::vector<char>& fixed, const VertexFunction& g) {
  int n = net.num_vertices();
  std::vector<int> idx(n, -1);
  int m = 0;
  for (int x = 0; x < n; ++x)
    if (!fixed[x]) idx[x] = m++;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (auto& e : net.edges()) {
    int a = e.tail, b = e.head;
    if (idx[a] >= 0) {
      L(idx[a], idx[a]) += e.c;
      if (idx[b] >= 0) L(idx[a], idx[b]) -= e.c;
      else rhs[idx[a]] += e.c * g[b];
    }
    if (idx[b] >= 0) {
      L(idx[b], idx[b]) += e.c;
      if (idx[a] >= 0) L(idx[b], idx[a]) -= e.c;
      else rhs[idx[b]] += e.c * g[a];
    }
  }
  Eigen::VectorXd u = L.fullPivLu().solve(rhs);
  VertexFunction h(n);
  for (int x = 0; x < n; ++x) h[x] = fixed[x] ? g[x] : u[idx[x]];
  return h;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testsupport
