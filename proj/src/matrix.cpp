#include "dyngraph/matrix.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "dyngraph/kernels.hpp"

namespace dyngraph {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols_, rows_);
    kernels::transpose(rows_, cols_, data(), t.data());
    return t;
}

Vector DenseMatrix::col(std::size_t j) const {
    Vector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

void DenseMatrix::set_col(std::size_t j, const Vector& v) {
    if (v.size() != rows_) throw ShapeMismatch("set_col: length mismatch");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

void DenseMatrix::append_row(const Vector& v) {
    if (rows_ > 0 && v.size() != cols_) throw ShapeMismatch("append_row: length mismatch");
    if (rows_ == 0) cols_ = v.size();
    data_.insert(data_.end(), v.begin(), v.end());
    ++rows_;
}

void DenseMatrix::append_col(const Vector& v) {
    if (cols_ > 0 && v.size() != rows_) throw ShapeMismatch("append_col: length mismatch");
    if (cols_ == 0) {
        rows_ = v.size();
        data_ = v;
        cols_ = 1;
        return;
    }
    std::vector<double> next(rows_ * (cols_ + 1));
    for (std::size_t i = 0; i < rows_; ++i) {
        double* dst = next.data() + i * (cols_ + 1);
        const double* src = data_.data() + i * cols_;
        for (std::size_t j = 0; j < cols_; ++j) dst[j] = src[j];
        dst[cols_] = v[i];
    }
    data_ = std::move(next);
    ++cols_;
}

void DenseMatrix::remove_last_row() {
    if (rows_ == 0) throw EmptyMatrix("remove_last_row: no rows");
    --rows_;
    data_.resize(rows_ * cols_);
}

void DenseMatrix::remove_last_col() {
    if (cols_ == 0) throw EmptyMatrix("remove_last_col: no columns");
    std::vector<double> next(rows_ * (cols_ - 1));
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* src = data_.data() + i * cols_;
        double* dst = next.data() + i * (cols_ - 1);
        for (std::size_t j = 0; j + 1 < cols_; ++j) dst[j] = src[j];
    }
    --cols_;
    data_ = std::move(next);
}

void DenseMatrix::swap_rows(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t k = 0; k < cols_; ++k) std::swap((*this)(i, k), (*this)(j, k));
}

void DenseMatrix::swap_cols(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t k = 0; k < rows_; ++k) std::swap((*this)(k, i), (*this)(k, j));
}

bool DenseMatrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeMismatch("matrix product: inner dims differ");
    DenseMatrix c(a.rows(), b.cols());
    kernels::gemm(a.rows(), a.cols(), b.cols(), a.data(), b.data(), c.data());
    return c;
}

Vector operator*(const DenseMatrix& a, const Vector& x) {
    if (a.cols() != x.size()) throw ShapeMismatch("matvec: length mismatch");
    Vector y(a.rows());
    kernels::matvec(a.rows(), a.cols(), a.data(), x.data(), y.data());
    return y;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeMismatch("matrix add");
    DenseMatrix c = a;
    for (std::size_t i = 0; i < c.rows() * c.cols(); ++i) c.data()[i] += b.data()[i];
    return c;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeMismatch("matrix subtract");
    DenseMatrix c = a;
    for (std::size_t i = 0; i < c.rows() * c.cols(); ++i) c.data()[i] -= b.data()[i];
    return c;
}

double frobenius_norm(const DenseMatrix& a) {
    return kernels::nrm2(a.data(), a.rows() * a.cols());
}

double norm2(const Vector& v) { return kernels::nrm2(v.data(), v.size()); }

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeMismatch("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows() * a.cols(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

namespace {

void format_value(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

// Skips comment lines and returns the next content line.
bool next_content_line(std::istream& is, std::string& line) {
    while (std::getline(is, line)) {
        std::size_t pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '#') continue;
        return true;
    }
    return false;
}

}  // namespace

void write_matrix(std::ostream& os, const DenseMatrix& m) {
    os << "matrix " << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ' ';
            format_value(os, m(i, j));
        }
        os << '\n';
    }
}

DenseMatrix read_matrix(std::istream& is) {
    std::string line;
    if (!next_content_line(is, line)) throw ParseError("matrix: missing header");
    std::istringstream hs(line);
    std::string tag;
    std::size_t rows = 0, cols = 0;
    if (!(hs >> tag >> rows >> cols) || tag != "matrix")
        throw ParseError("matrix: bad header '" + line + "'");
    DenseMatrix m(rows, cols);
    std::size_t have = 0;
    while (have < rows * cols) {
        if (!next_content_line(is, line)) throw ParseError("matrix: truncated data");
        std::istringstream ls(line);
        double v;
        while (ls >> v) {
            if (have >= rows * cols) throw ParseError("matrix: extra values");
            m.data()[have++] = v;
        }
    }
    return m;
}

void write_vector(std::ostream& os, const Vector& v) {
    os << "vector " << v.size() << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ' ';
        format_value(os, v[i]);
    }
    if (!v.empty()) os << '\n';
}

Vector read_vector(std::istream& is) {
    std::string line;
    if (!next_content_line(is, line)) throw ParseError("vector: missing header");
    std::istringstream hs(line);
    std::string tag;
    std::size_t n = 0;
    if (!(hs >> tag >> n) || tag != "vector") throw ParseError("vector: bad header '" + line + "'");
    Vector v(n);
    std::size_t have = 0;
    while (have < n) {
        if (!next_content_line(is, line)) throw ParseError("vector: truncated data");
        std::istringstream ls(line);
        double x;
        while (ls >> x) {
            if (have >= n) throw ParseError("vector: extra values");
            v[have++] = x;
        }
    }
    return v;
}

DenseMatrix load_matrix(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open " + path);
    return read_matrix(f);
}

Vector load_vector(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open " + path);
    return read_vector(f);
}

void save_matrix(const std::string& path, const DenseMatrix& m) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot open " + path + " for writing");
    write_matrix(f, m);
}

void save_vector(const std::string& path, const Vector& v) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot open " + path + " for writing");
    write_vector(f, v);
}

}  // namespace dyngraph
