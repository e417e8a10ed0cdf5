#include "deds/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace deds {

SquareMatrix SquareMatrix::transpose() const {
  SquareMatrix t(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

SquareMatrix SquareMatrix::operator+(const SquareMatrix& rhs) const {
  SquareMatrix s(n_);
  for (std::size_t k = 0; k < data_.size(); ++k) s.data_[k] = data_[k] + rhs.data_[k];
  return s;
}

SquareMatrix SquareMatrix::operator*(const SquareMatrix& rhs) const {
  SquareMatrix p(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = 0; k < n_; ++k) {
      const double a = (*this)(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < n_; ++j) p(i, j) += a * rhs(k, j);
    }
  return p;
}

std::vector<double> SquareMatrix::apply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) y[i] += (*this)(i, j) * x[j];
  return y;
}

std::size_t Digraph::edge_count() const {
  std::size_t count = 0;
  for (const auto& row : out_) count += row.size();
  return count;
}

double Digraph::max_weight() const {
  double m = 0.0;
  for (const auto& row : out_)
    for (const auto& nb : row) m = std::max(m, nb.weight);
  return m;
}

std::vector<Edge> Digraph::edges() const {
  std::vector<Edge> list;
  for (std::size_t i = 0; i < out_.size(); ++i)
    for (const auto& nb : out_[i]) list.push_back({i + 1, nb.index + 1, nb.weight});
  return list;
}

Digraph build_digraph(std::size_t n, std::span<const Edge> edges) {
  if (n == 0) throw std::invalid_argument("digraph needs at least one vertex");
  Digraph g;
  g.adjacency_ = SquareMatrix(n);
  for (const auto& e : edges) {
    const std::string tag =
        "edge (" + std::to_string(e.from) + "," + std::to_string(e.to) + ")";
    if (e.from < 1 || e.from > n || e.to < 1 || e.to > n)
      throw std::invalid_argument(tag + ": vertex index out of range [1," + std::to_string(n) +
                                  "]");
    if (e.from == e.to) throw std::invalid_argument(tag + ": self-loop");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw std::invalid_argument(tag + ": weight must be positive and finite");
    double& slot = g.adjacency_(e.from - 1, e.to - 1);
    if (slot != 0.0) throw std::invalid_argument(tag + ": duplicate edge");
    slot = e.weight;
  }
  g.out_.assign(n, {});
  g.in_.assign(n, {});
  g.out_degree_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = g.adjacency_(i, j);
      if (w == 0.0) continue;
      g.out_[i].push_back({j, w});
      g.in_[j].push_back(i);
      g.out_degree_[i] += w;
    }
  }
  return g;
}

namespace {

std::vector<bool> reachable(const Digraph& g, bool forward) {
  const std::size_t n = g.size();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    auto visit = [&](std::size_t w) {
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    };
    if (forward) {
      for (const auto& nb : g.out_neighbors(u)) visit(nb.index);
    } else {
      for (std::size_t w : g.in_neighbors(u)) visit(w);
    }
  }
  return seen;
}

}  // namespace

bool is_strongly_connected(const Digraph& g) {
  if (g.size() == 0) return false;
  const auto fwd = reachable(g, true);
  const auto bwd = reachable(g, false);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

bool is_weight_balanced(const Digraph& g) {
  const std::size_t n = g.size();
  const double tol = 1e-12 * g.max_weight();
  // Column j of L: out_degree(j) - sum_i a_ij.
  for (std::size_t j = 0; j < n; ++j) {
    double in_weight = 0.0;
    for (std::size_t i : g.in_neighbors(j)) in_weight += g.weight(i, j);
    if (std::abs(g.out_degree(j) - in_weight) > tol) return false;
  }
  return true;
}

std::vector<double> symmetric_eigenvalues(const SquareMatrix& m) {
  const std::size_t n = m.size();
  SquareMatrix a = m;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) total += a(i, j) * a(i, j);
  const double threshold = 1e-30 * std::max(total, 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= threshold) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double smallest_nonzero(std::span<const double> ascending) {
  double scale = 0.0;
  for (double x : ascending) scale = std::max(scale, std::abs(x));
  const double tol = 1e-10 * scale;
  for (double x : ascending)
    if (x > tol) return x;
  return 0.0;
}

LaplacianData laplacian(const Digraph& g) {
  const std::size_t n = g.size();
  LaplacianData lap;
  lap.matrix = SquareMatrix(n);
  lap.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    lap.rows[i].diagonal = g.out_degree(i);
    lap.matrix(i, i) = g.out_degree(i);
    for (const auto& nb : g.out_neighbors(i)) {
      lap.rows[i].neighbors.push_back(nb);
      lap.matrix(i, nb.index) = -nb.weight;
    }
  }

  const SquareMatrix lt = lap.matrix.transpose();
  const auto sym = symmetric_eigenvalues(lap.matrix + lt);
  const auto gram = symmetric_eigenvalues(lt * lap.matrix);
  lap.lambda2_sym = smallest_nonzero(sym);
  lap.lambda_max_LtL = gram.empty() ? 0.0 : std::max(0.0, gram.back());
  lap.strongly_connected = is_strongly_connected(g);
  lap.weight_balanced = is_weight_balanced(g);
  return lap;
}

}  // namespace deds
