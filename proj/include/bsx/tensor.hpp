#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace bsx {

// All numeric state is 64-bit and rank <= 2; vectors are n-by-1 matrices.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline bool all_finite(const Matrix& m) {
  return m.allFinite();
}

// Row-major flattening; the on-disk layout for every serialized matrix.
inline std::vector<double> to_row_major(const Matrix& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  std::size_t k = 0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) out[k++] = m(i, j);
  return out;
}

inline Matrix from_row_major(Index rows, Index cols,
                             const std::vector<double>& data) {
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = data[k++];
  return m;
}

}  // namespace bsx
