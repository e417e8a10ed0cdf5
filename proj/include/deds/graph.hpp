#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace deds {

class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  SquareMatrix transpose() const;
  SquareMatrix operator+(const SquareMatrix& rhs) const;
  SquareMatrix operator*(const SquareMatrix& rhs) const;
  std::vector<double> apply(std::span<const double> x) const;

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Edge (from, to, weight) with 1-based vertex ids. It sets a_{from,to} = weight,
/// i.e. `to` transmits to `from`, and `to` is an out-neighbor of `from`.
struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  std::size_t index = 0;  // 0-based
  double weight = 0.0;
};

class Digraph {
 public:
  Digraph() = default;

  std::size_t size() const { return adjacency_.size(); }
  const SquareMatrix& adjacency() const { return adjacency_; }
  double weight(std::size_t i, std::size_t j) const { return adjacency_(i, j); }

  // Out-neighbors of i in ascending index order.
  std::span<const Neighbor> out_neighbors(std::size_t i) const { return out_[i]; }
  // Units that list i as an out-neighbor, ascending.
  std::span<const std::size_t> in_neighbors(std::size_t i) const { return in_[i]; }
  // Sum of a_ij accumulated in ascending j.
  double out_degree(std::size_t i) const { return out_degree_[i]; }

  std::size_t edge_count() const;
  double max_weight() const;
  // 1-based edge list in row-major order.
  std::vector<Edge> edges() const;

  friend Digraph build_digraph(std::size_t n, std::span<const Edge> edges);

 private:
  SquareMatrix adjacency_;
  std::vector<std::vector<Neighbor>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<double> out_degree_;
};

/// Throws std::invalid_argument for out-of-range ids, nonpositive weights, self-loops
/// and duplicate edges.
Digraph build_digraph(std::size_t n, std::span<const Edge> edges);

struct LaplacianRow {
  double diagonal = 0.0;
  std::vector<Neighbor> neighbors;  // off-diagonal entries are -weight
};

struct LaplacianData {
  SquareMatrix matrix;              // L = D_out - A
  std::vector<LaplacianRow> rows;   // sparse view used by the kernels
  double lambda2_sym = 0.0;         // smallest nonzero eigenvalue of L + L^T, 0 if none
  double lambda_max_LtL = 0.0;      // largest eigenvalue of L^T L
  bool strongly_connected = false;
  bool weight_balanced = false;

  std::size_t size() const { return rows.size(); }
};

LaplacianData laplacian(const Digraph& g);

bool is_strongly_connected(const Digraph& g);
bool is_weight_balanced(const Digraph& g);

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, ascending.
std::vector<double> symmetric_eigenvalues(const SquareMatrix& m);

/// Smallest eigenvalue above 1e-10 * max|eigenvalue|; 0 when every eigenvalue is below it.
double smallest_nonzero(std::span<const double> ascending);

}  // namespace deds
