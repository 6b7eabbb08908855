#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

#include "nscov/linalg.hpp"

namespace nscov {
namespace {

// Uniform grid over the points of `to`, buckets stored by counting sort.
struct Grid {
  double x0 = 0.0, y0 = 0.0, cell = 1.0;
  long nx = 1, ny = 1;
  std::vector<int> start;
  std::vector<int> items;

  [[nodiscard]] long cx(double x) const { return static_cast<long>(std::floor((x - x0) / cell)); }
  [[nodiscard]] long cy(double y) const { return static_cast<long>(std::floor((y - y0) / cell)); }
};

Grid make_grid(const Eigen::MatrixX2d& pts, double delta) {
  Grid g;
  const Eigen::Index n = pts.rows();
  if (n == 0) {
    g.start.assign(2, 0);
    return g;
  }
  g.x0 = pts.col(0).minCoeff();
  g.y0 = pts.col(1).minCoeff();
  const double wx = pts.col(0).maxCoeff() - g.x0;
  const double wy = pts.col(1).maxCoeff() - g.y0;
  // Cells no smaller than delta, and few enough to stay O(n).
  const double budget = 4.0 * static_cast<double>(n) + 16.0;
  double cell = std::isfinite(delta) ? delta : std::max({wx, wy, 1.0});
  while ((std::floor(wx / cell) + 1.0) * (std::floor(wy / cell) + 1.0) > budget) cell *= 2.0;
  if (!(cell > 0.0)) cell = 1.0;
  g.cell = cell;
  g.nx = static_cast<long>(std::floor(wx / cell)) + 1;
  g.ny = static_cast<long>(std::floor(wy / cell)) + 1;
  std::vector<long> key(static_cast<std::size_t>(n));
  g.start.assign(static_cast<std::size_t>(g.nx * g.ny + 1), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const long x = std::clamp(g.cx(pts(i, 0)), 0L, g.nx - 1);
    const long y = std::clamp(g.cy(pts(i, 1)), 0L, g.ny - 1);
    key[static_cast<std::size_t>(i)] = y * g.nx + x;
    ++g.start[static_cast<std::size_t>(key[static_cast<std::size_t>(i)] + 1)];
  }
  std::partial_sum(g.start.begin(), g.start.end(), g.start.begin());
  g.items.resize(static_cast<std::size_t>(n));
  std::vector<int> fill(g.start.begin(), g.start.end() - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    g.items[static_cast<std::size_t>(fill[static_cast<std::size_t>(key[static_cast<std::size_t>(i)])]++)] =
        static_cast<int>(i);
  }
  return g;
}

}  // namespace

NeighborList neighbors_within(const Eigen::MatrixX2d& from, const Eigen::MatrixX2d& to, double delta) {
  const Grid g = make_grid(to, delta);
  const Eigen::Index m = from.rows();
  const long reach = std::isfinite(delta) ? static_cast<long>(std::ceil(delta / g.cell)) : g.nx + g.ny;
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(dynamic, 64)
  for (Eigen::Index i = 0; i < m; ++i) {
    auto& out = rows[static_cast<std::size_t>(i)];
    const double px = from(i, 0);
    const double py = from(i, 1);
    const long cx = g.cx(px);
    const long cy = g.cy(py);
    const long xa = std::max(0L, cx - reach), xb = std::min(g.nx - 1, cx + reach);
    const long ya = std::max(0L, cy - reach), yb = std::min(g.ny - 1, cy + reach);
    for (long y = ya; y <= yb; ++y) {
      for (long x = xa; x <= xb; ++x) {
        const auto cell = static_cast<std::size_t>(y * g.nx + x);
        for (int p = g.start[cell]; p < g.start[cell + 1]; ++p) {
          const int j = g.items[static_cast<std::size_t>(p)];
          const double h = std::hypot(px - to(j, 0), py - to(j, 1));
          if (h < delta) out.emplace_back(j, h);
        }
      }
    }
    std::sort(out.begin(), out.end());
  }
  NeighborList list;
  list.offsets.assign(static_cast<std::size_t>(m + 1), 0);
  for (Eigen::Index i = 0; i < m; ++i) {
    list.offsets[static_cast<std::size_t>(i + 1)] =
        list.offsets[static_cast<std::size_t>(i)] + static_cast<int>(rows[static_cast<std::size_t>(i)].size());
  }
  list.index.reserve(static_cast<std::size_t>(list.offsets.back()));
  list.distance.reserve(static_cast<std::size_t>(list.offsets.back()));
  for (const auto& r : rows) {
    for (const auto& [j, h] : r) {
      list.index.push_back(j);
      list.distance.push_back(h);
    }
  }
  return list;
}

std::shared_ptr<const SparsePattern> SparsePattern::build(const Eigen::MatrixX2d& locations, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("sparse pattern: delta must be positive");
  std::shared_ptr<SparsePattern> pat(new SparsePattern());
  const int n = static_cast<int>(locations.rows());
  pat->n_ = n;
  pat->delta_ = delta;

  // Upper pairs i <= j in original numbering; the diagonal is always kept.
  std::vector<int> pa, pb;
  std::vector<double> dist;
  const NeighborList nb = neighbors_within(locations, locations, delta);
  for (int i = 0; i < n; ++i) {
    pa.push_back(i);
    pb.push_back(i);
    dist.push_back(0.0);
    for (int p = nb.offsets[static_cast<std::size_t>(i)]; p < nb.offsets[static_cast<std::size_t>(i) + 1]; ++p) {
      const int j = nb.index[static_cast<std::size_t>(p)];
      if (j <= i) continue;
      pa.push_back(i);
      pb.push_back(j);
      dist.push_back(nb.distance[static_cast<std::size_t>(p)]);
    }
  }

  // Fill-reducing ordering on the symmetric pattern.
  pat->perm_.resize(static_cast<std::size_t>(n));
  std::iota(pat->perm_.begin(), pat->perm_.end(), 0);
  if (n > 2 && pa.size() > static_cast<std::size_t>(n)) {
    std::vector<Eigen::Triplet<double, int>> trip;
    trip.reserve(2 * pa.size());
    for (std::size_t s = 0; s < pa.size(); ++s) {
      trip.emplace_back(pa[s], pb[s], 1.0);
      if (pa[s] != pb[s]) trip.emplace_back(pb[s], pa[s], 1.0);
    }
    Eigen::SparseMatrix<double, Eigen::ColMajor, int> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> p;
    Eigen::AMDOrdering<int> amd;
    amd(a, p);
    for (int k = 0; k < n; ++k) pat->perm_[static_cast<std::size_t>(k)] = p.indices()(k);
  }
  pat->inv_perm_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) pat->inv_perm_[static_cast<std::size_t>(pat->perm_[static_cast<std::size_t>(k)])] = k;

  // Permuted upper CSC, rows sorted within each column.
  const std::size_t nnz = pa.size();
  std::vector<int> col(nnz), row(nnz);
  pat->col_ptr_.assign(static_cast<std::size_t>(n + 1), 0);
  for (std::size_t s = 0; s < nnz; ++s) {
    const int u = pat->inv_perm_[static_cast<std::size_t>(pa[s])];
    const int v = pat->inv_perm_[static_cast<std::size_t>(pb[s])];
    col[s] = std::max(u, v);
    row[s] = std::min(u, v);
    ++pat->col_ptr_[static_cast<std::size_t>(col[s] + 1)];
  }
  std::partial_sum(pat->col_ptr_.begin(), pat->col_ptr_.end(), pat->col_ptr_.begin());
  std::vector<std::size_t> order(nnz);
  {
    std::vector<int> fill(pat->col_ptr_.begin(), pat->col_ptr_.end() - 1);
    for (std::size_t s = 0; s < nnz; ++s) order[static_cast<std::size_t>(fill[static_cast<std::size_t>(col[s])]++)] = s;
  }
  for (int k = 0; k < n; ++k) {
    std::sort(order.begin() + pat->col_ptr_[static_cast<std::size_t>(k)],
              order.begin() + pat->col_ptr_[static_cast<std::size_t>(k) + 1],
              [&](std::size_t x, std::size_t y) { return row[x] < row[y]; });
  }
  pat->row_idx_.resize(nnz);
  pat->site_a_.resize(nnz);
  pat->site_b_.resize(nnz);
  pat->distance_.resize(nnz);
  for (std::size_t t = 0; t < nnz; ++t) {
    const std::size_t s = order[t];
    pat->row_idx_[t] = row[s];
    pat->site_a_[t] = pa[s];
    pat->site_b_[t] = pb[s];
    pat->distance_[t] = dist[s];
  }
  pat->analyze();
  return pat;
}

void SparsePattern::analyze() {
  const auto n = static_cast<std::size_t>(n_);
  parent_.assign(n, -1);
  std::vector<int> ancestor(n, -1);
  for (int k = 0; k < n_; ++k) {
    for (int p = col_ptr_[static_cast<std::size_t>(k)]; p < col_ptr_[static_cast<std::size_t>(k) + 1]; ++p) {
      int i = row_idx_[static_cast<std::size_t>(p)];
      while (i != -1 && i < k) {
        const int next = ancestor[static_cast<std::size_t>(i)];
        ancestor[static_cast<std::size_t>(i)] = k;
        if (next == -1) parent_[static_cast<std::size_t>(i)] = k;
        i = next;
      }
    }
  }
  // Column counts of L from the row subtrees.
  std::vector<int> count(n, 1);
  std::vector<int> mark(n, -1);
  for (int k = 0; k < n_; ++k) {
    mark[static_cast<std::size_t>(k)] = k;
    for (int p = col_ptr_[static_cast<std::size_t>(k)]; p < col_ptr_[static_cast<std::size_t>(k) + 1]; ++p) {
      for (int i = row_idx_[static_cast<std::size_t>(p)]; mark[static_cast<std::size_t>(i)] != k;
           i = parent_[static_cast<std::size_t>(i)]) {
        mark[static_cast<std::size_t>(i)] = k;
        ++count[static_cast<std::size_t>(i)];
      }
    }
  }
  l_col_ptr_.assign(n + 1, 0);
  for (std::size_t k = 0; k < n; ++k) l_col_ptr_[k + 1] = l_col_ptr_[k] + count[k];
}

bool SparsePattern::contains(int i, int j) const {
  const int u = inv_perm_.at(static_cast<std::size_t>(i));
  const int v = inv_perm_.at(static_cast<std::size_t>(j));
  const int c = std::max(u, v);
  const int r = std::min(u, v);
  const auto first = row_idx_.begin() + col_ptr_[static_cast<std::size_t>(c)];
  const auto last = row_idx_.begin() + col_ptr_[static_cast<std::size_t>(c) + 1];
  return std::binary_search(first, last, r);
}

Eigen::VectorXd SparseSymmetric::multiply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(pattern->size());
  const auto& a = pattern->site_a();
  const auto& b = pattern->site_b();
  for (std::size_t s = 0; s < values.size(); ++s) {
    y(a[s]) += values[s] * x(b[s]);
    if (a[s] != b[s]) y(b[s]) += values[s] * x(a[s]);
  }
  return y;
}

Eigen::MatrixXd SparseSymmetric::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(pattern->size(), pattern->size());
  for (std::size_t s = 0; s < values.size(); ++s) {
    m(pattern->site_a()[s], pattern->site_b()[s]) = values[s];
    m(pattern->site_b()[s], pattern->site_a()[s]) = values[s];
  }
  return m;
}

double SparseSymmetric::mean_diagonal() const {
  double sum = 0.0;
  for (std::size_t s = 0; s < values.size(); ++s) {
    if (pattern->site_a()[s] == pattern->site_b()[s]) sum += values[s];
  }
  return pattern->size() > 0 ? sum / pattern->size() : 0.0;
}

}  // namespace nscov
