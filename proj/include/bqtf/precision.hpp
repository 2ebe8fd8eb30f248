#pragma once

#include <Eigen/Sparse>
#include <algorithm>
#include <vector>

namespace bqtf::detail {

// Assembles A = D' diag(row_coef) D + diag(v) into a fixed sparsity pattern,
// so the sparse Cholesky can reuse its symbolic analysis across iterations.
// Slots into the value array are resolved once at init.
class PrecisionAssembler {
 public:
  void init(const Eigen::SparseMatrix<double, Eigen::RowMajor>& d) {
    const Eigen::Index n = d.cols();
    const Eigen::Index m = d.rows();
    std::vector<Eigen::Triplet<double>> tri;
    tri.reserve(static_cast<std::size_t>(n) + 8 * static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < n; ++i) tri.emplace_back(i, i, 0.0);
    std::vector<std::pair<Eigen::Index, double>> row;
    for (Eigen::Index r = 0; r < m; ++r) {
      row.clear();
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(d, r);
           it; ++it)
        row.emplace_back(it.col(), it.value());
      for (const auto& [i, di] : row)
        for (const auto& [j, dj] : row) tri.emplace_back(i, j, 0.0);
    }
    a_.resize(n, n);
    a_.setFromTriplets(tri.begin(), tri.end());
    a_.makeCompressed();

    row_offsets_.assign(m + 1, 0);
    slots_.clear();
    scales_.clear();
    for (Eigen::Index r = 0; r < m; ++r) {
      row.clear();
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(d, r);
           it; ++it)
        row.emplace_back(it.col(), it.value());
      for (const auto& [i, di] : row) {
        for (const auto& [j, dj] : row) {
          slots_.push_back(slot_of(i, j));
          scales_.push_back(di * dj);
        }
      }
      row_offsets_[r + 1] = static_cast<Eigen::Index>(slots_.size());
    }
    diag_slots_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) diag_slots_[i] = slot_of(i, i);
  }

  const Eigen::SparseMatrix<double>& assemble(const Eigen::VectorXd& row_coef,
                                              const Eigen::VectorXd& diag) {
    double* vals = a_.valuePtr();
    std::fill(vals, vals + a_.nonZeros(), 0.0);
    const Eigen::Index m = row_offsets_.size() > 0
                               ? static_cast<Eigen::Index>(row_offsets_.size()) - 1
                               : 0;
    for (Eigen::Index r = 0; r < m; ++r) {
      const double c = row_coef[r];
      for (Eigen::Index s = row_offsets_[r]; s < row_offsets_[r + 1]; ++s)
        vals[slots_[s]] += c * scales_[s];
    }
    for (Eigen::Index i = 0; i < diag.size(); ++i)
      vals[diag_slots_[i]] += diag[i];
    return a_;
  }

  const Eigen::SparseMatrix<double>& matrix() const { return a_; }

 private:
  Eigen::Index slot_of(Eigen::Index i, Eigen::Index j) {
    return &a_.coeffRef(i, j) - a_.valuePtr();
  }

  Eigen::SparseMatrix<double> a_;
  std::vector<Eigen::Index> row_offsets_;
  std::vector<Eigen::Index> slots_;
  std::vector<double> scales_;
  std::vector<Eigen::Index> diag_slots_;
};

}  // namespace bqtf::detail
