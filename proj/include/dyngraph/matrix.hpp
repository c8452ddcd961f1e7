#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "dyngraph/errors.hpp"

namespace dyngraph {

using Vector = std::vector<double>;

/// Row-major dense matrix of doubles. The one value type shared by the
/// incremental engines and the from-scratch oracle.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    bool operator==(const DenseMatrix& other) const = default;

    DenseMatrix transposed() const;

    Vector col(std::size_t j) const;
    void set_col(std::size_t j, const Vector& v);

    // Structural edits used by the delta replay. Row edits are O(n);
    // column edits rebuild the storage.
    void append_row(const Vector& v);
    void append_col(const Vector& v);
    void remove_last_row();
    void remove_last_col();
    void swap_rows(std::size_t i, std::size_t j);
    void swap_cols(std::size_t i, std::size_t j);

    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
Vector operator*(const DenseMatrix& a, const Vector& x);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);

double frobenius_norm(const DenseMatrix& a);
double norm2(const Vector& v);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// Text formats. Matrices: "matrix <rows> <cols>" then whitespace-separated
// rows; vectors: "vector <n>" then entries. Full precision decimal, '#'
// starts a comment line.
void write_matrix(std::ostream& os, const DenseMatrix& m);
DenseMatrix read_matrix(std::istream& is);
void write_vector(std::ostream& os, const Vector& v);
Vector read_vector(std::istream& is);

DenseMatrix load_matrix(const std::string& path);
Vector load_vector(const std::string& path);
void save_matrix(const std::string& path, const DenseMatrix& m);
void save_vector(const std::string& path, const Vector& v);

}  // namespace dyngraph
