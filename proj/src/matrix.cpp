#include "mscan/matrix.hpp"

#include <stdexcept>

namespace mscan {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m;
  m.rows_ = rows.size();
  m.cols_ = rows.size() == 0 ? 0 : rows.begin()->size();
  m.data_.reserve(m.rows_ * m.cols_);
  for (const auto& r : rows) {
    if (r.size() != m.cols_) throw std::invalid_argument("Matrix::from_rows: ragged rows");
    m.data_.insert(m.data_.end(), r.begin(), r.end());
  }
  return m;
}

Matrix Matrix::column(std::vector<double> values) {
  Matrix m;
  m.rows_ = values.size();
  m.cols_ = 1;
  m.data_ = std::move(values);
  return m;
}

std::vector<double> Matrix::col(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

}  // namespace mscan
