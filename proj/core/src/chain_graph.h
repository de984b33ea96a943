#ifndef CHARGECHAIN_SRC_CHAIN_GRAPH_H_
#define CHARGECHAIN_SRC_CHAIN_GRAPH_H_

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace chargechain::internal {

using Adjacency = std::vector<std::vector<int>>;

struct ClosedClass {
  std::vector<int> members;  // ascending
  int period = 1;
};

// Closed strongly connected components of a directed graph, ordered by
// their smallest member, each with its period (gcd of cycle lengths).
std::vector<ClosedClass> FindClosedClasses(const Adjacency& graph);

// Stationary vector of an irreducible stochastic matrix: (P^T - I) pi = 0
// with one equation replaced by sum(pi) = 1. Tiny negative round-off is
// clamped and the result renormalized.
Eigen::VectorXd StationaryDense(const Eigen::MatrixXd& p);
Eigen::VectorXd StationarySparse(const Eigen::SparseMatrix<double>& p);

}  // namespace chargechain::internal

#endif  // CHARGECHAIN_SRC_CHAIN_GRAPH_H_
