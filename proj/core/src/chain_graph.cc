#include "chain_graph.h"

#include <algorithm>
#include <numeric>
#include <queue>

#include <Eigen/LU>
#include <Eigen/SparseLU>

#include "chargechain/errors.h"

namespace chargechain::internal {
namespace {

// Iterative Tarjan; returns the component id of every vertex.
std::vector<int> StronglyConnected(const Adjacency& graph, int* count) {
  const int n = static_cast<int>(graph.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<bool> on_stack(n, false);
  std::vector<std::pair<int, std::size_t>> work;
  int next_index = 0;
  *count = 0;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    work.push_back({root, 0});
    while (!work.empty()) {
      auto& [v, edge] = work.back();
      if (edge == 0 && index[v] == -1) {
        index[v] = low[v] = next_index++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      if (edge < graph[v].size()) {
        const int w = graph[v][edge++];
        if (index[w] == -1) {
          work.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = *count;
        } while (w != v);
        ++*count;
      }
      const int done = v;
      work.pop_back();
      if (!work.empty()) {
        low[work.back().first] = std::min(low[work.back().first], low[done]);
      }
    }
  }
  return comp;
}

int ClassPeriod(const Adjacency& graph, const std::vector<int>& members,
                const std::vector<int>& comp) {
  const int cid = comp[members.front()];
  std::vector<int> level(graph.size(), -1);
  std::queue<int> frontier;
  level[members.front()] = 0;
  frontier.push(members.front());
  int period = 0;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int w : graph[v]) {
      if (comp[w] != cid) continue;
      if (level[w] == -1) {
        level[w] = level[v] + 1;
        frontier.push(w);
      } else {
        period = std::gcd(period, std::abs(level[v] + 1 - level[w]));
      }
    }
  }
  return period == 0 ? 1 : period;
}

Eigen::VectorXd Normalize(Eigen::VectorXd pi) {
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    if (pi(i) < 0.0) pi(i) = 0.0;
  }
  const double total = pi.sum();
  if (!(total > 0.0)) {
    throw Error("stationary solve produced no mass");
  }
  return pi / total;
}

}  // namespace

std::vector<ClosedClass> FindClosedClasses(const Adjacency& graph) {
  int count = 0;
  const std::vector<int> comp = StronglyConnected(graph, &count);
  std::vector<bool> closed(count, true);
  std::vector<std::vector<int>> members(count);
  for (int v = 0; v < static_cast<int>(graph.size()); ++v) {
    members[comp[v]].push_back(v);
    for (int w : graph[v]) {
      if (comp[w] != comp[v]) closed[comp[v]] = false;
    }
  }
  std::vector<ClosedClass> out;
  for (int c = 0; c < count; ++c) {
    if (!closed[c]) continue;
    std::sort(members[c].begin(), members[c].end());
    out.push_back({members[c], ClassPeriod(graph, members[c], comp)});
  }
  std::sort(out.begin(), out.end(), [](const ClosedClass& a, const ClosedClass& b) {
    return a.members.front() < b.members.front();
  });
  return out;
}

Eigen::VectorXd StationaryDense(const Eigen::MatrixXd& p) {
  const Eigen::Index n = p.rows();
  Eigen::MatrixXd system = p.transpose() - Eigen::MatrixXd::Identity(n, n);
  system.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  return Normalize(system.fullPivLu().solve(rhs));
}

Eigen::VectorXd StationarySparse(const Eigen::SparseMatrix<double>& p) {
  // Pin pi_0 = 1 and drop the balance equation of state 0; a dense
  // normalization row would fill in the factorization.
  const Eigen::Index n = p.rows();
  if (n == 1) return Eigen::VectorXd::Ones(1);
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n - 1);
  for (Eigen::Index k = 0; k < p.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(p, k); it; ++it) {
      const Eigen::Index from = it.row();
      const Eigen::Index to = it.col();
      if (to == 0) continue;
      if (from == 0) {
        rhs(to - 1) -= it.value();
      } else {
        triplets.emplace_back(to - 1, from - 1, it.value());
      }
    }
  }
  for (Eigen::Index i = 0; i + 1 < n; ++i) triplets.emplace_back(i, i, -1.0);
  Eigen::SparseMatrix<double> system(n - 1, n - 1);
  system.setFromTriplets(triplets.begin(), triplets.end());
  system.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) {
    throw Error("sparse stationary solve failed to factorize");
  }
  const Eigen::VectorXd rest = lu.solve(rhs);
  Eigen::VectorXd pi(n);
  pi(0) = 1.0;
  pi.tail(n - 1) = rest;
  return Normalize(pi);
}

}  // namespace chargechain::internal
