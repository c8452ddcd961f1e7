#include "dyngraph/oracle.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "dyngraph/kernels.hpp"

namespace dyngraph::oracle {

namespace {

void apply_sign_convention(DenseMatrix& u, DenseMatrix& v) {
    for (std::size_t k = 0; k < u.cols(); ++k) {
        double peak = 0.0;
        for (std::size_t i = 0; i < u.rows(); ++i) peak = std::max(peak, std::abs(u(i, k)));
        if (peak == 0.0) continue;
        double lead = 0.0;
        for (std::size_t i = 0; i < u.rows(); ++i) {
            if (std::abs(u(i, k)) > 1e-8 * peak) {
                lead = u(i, k);
                break;
            }
        }
        if (lead < 0.0) {
            for (std::size_t i = 0; i < u.rows(); ++i) u(i, k) = -u(i, k);
            for (std::size_t i = 0; i < v.rows(); ++i) v(i, k) = -v(i, k);
        }
    }
}

}  // namespace

SvdResult svd(const DenseMatrix& m) {
    const std::size_t rows = m.rows(), cols = m.cols();
    const std::size_t k = std::min(rows, cols);
    if (k == 0) return {};

    std::vector<double> a(m.data(), m.data() + rows * cols);
    std::vector<double> s(k);
    DenseMatrix u(rows, k);
    DenseMatrix vt(k, cols);
    lapack_int info = LAPACKE_dgesdd(LAPACK_ROW_MAJOR, 'S', static_cast<lapack_int>(rows),
                                     static_cast<lapack_int>(cols), a.data(),
                                     static_cast<lapack_int>(cols), s.data(), u.data(),
                                     static_cast<lapack_int>(k), vt.data(),
                                     static_cast<lapack_int>(cols));
    if (info != 0) throw ConvergenceFailure("svd: dgesdd failed to converge");

    std::size_t rank = 0;
    while (rank < k && s[rank] > kRankCutoff * s[0]) ++rank;

    SvdResult out;
    out.sigma.assign(s.begin(), s.begin() + rank);
    out.U = DenseMatrix(rows, rank);
    out.V = DenseMatrix(cols, rank);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < rank; ++j) out.U(i, j) = u(i, j);
    for (std::size_t i = 0; i < cols; ++i)
        for (std::size_t j = 0; j < rank; ++j) out.V(i, j) = vt(j, i);
    apply_sign_convention(out.U, out.V);
    return out;
}

DenseMatrix pinv(const DenseMatrix& m) {
    SvdResult f = svd(m);
    DenseMatrix p(m.cols(), m.rows());
    if (f.rank() == 0) return p;
    // p = V * diag(1/sigma) * U^T
    DenseMatrix vs = f.V;
    for (std::size_t i = 0; i < vs.rows(); ++i)
        for (std::size_t j = 0; j < vs.cols(); ++j) vs(i, j) /= f.sigma[j];
    return vs * f.U.transposed();
}

Vector lstsq(const DenseMatrix& m, const Vector& b) {
    if (b.size() != m.rows()) throw ShapeMismatch("lstsq: b length mismatch");
    return pinv(m) * b;
}

double penrose_residual(const DenseMatrix& m, const DenseMatrix& p) {
    if (p.rows() != m.cols() || p.cols() != m.rows())
        throw ShapeMismatch("penrose_residual: shape mismatch");
    const double nm = frobenius_norm(m);
    const double np = frobenius_norm(p);
    DenseMatrix mp = m * p;    // n x n
    DenseMatrix pm = p * m;    // m x m
    double r = 0.0;
    r = std::max(r, frobenius_norm(mp * m - m) / (nm > 0 ? nm : 1.0));
    r = std::max(r, frobenius_norm(pm * p - p) / (np > 0 ? np : 1.0));
    double sym_mp = 0.0, sym_pm = 0.0;
    for (std::size_t i = 0; i < mp.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j) {
            double d = mp(i, j) - mp(j, i);
            sym_mp += 2 * d * d;
        }
    for (std::size_t i = 0; i < pm.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j) {
            double d = pm(i, j) - pm(j, i);
            sym_pm += 2 * d * d;
        }
    double scale_mp = frobenius_norm(mp), scale_pm = frobenius_norm(pm);
    r = std::max(r, std::sqrt(sym_mp) / (scale_mp > 0 ? scale_mp : 1.0));
    r = std::max(r, std::sqrt(sym_pm) / (scale_pm > 0 ? scale_pm : 1.0));
    return r;
}

namespace {

// Revised simplex on  min 1^T(u + v)  s.t.  M(xp - xn) + u - v = b,
// all variables >= 0. Column order: xp (m), xn (m), u (n), v (n).
// Bland's rule for entering and leaving variables; the basis inverse is
// refactorized periodically.
class BlandSimplex {
public:
    BlandSimplex(const DenseMatrix& m, const Vector& b)
        : m_(m), b_(b), n_(m.rows()), cols_(m.cols()) {}

    L1Result solve() {
        const std::size_t total = 2 * cols_ + 2 * n_;
        basis_.resize(n_);
        binv_ = DenseMatrix::identity(n_);
        xb_ = b_;
        for (std::size_t i = 0; i < n_; ++i) {
            if (b_[i] >= 0.0) {
                basis_[i] = 2 * cols_ + i;  // u_i
            } else {
                basis_[i] = 2 * cols_ + n_ + i;  // v_i
                binv_(i, i) = -1.0;
                xb_[i] = -b_[i];
            }
        }

        std::vector<char> is_basic(total, 0);
        for (std::size_t j : basis_) is_basic[j] = 1;

        const std::size_t max_pivots = 20000 + 40 * (n_ + cols_) * (n_ + cols_);
        std::size_t pivots = 0;
        Vector y(n_), g(cols_), w(n_), col(n_);
        while (true) {
            // y^T = c_B^T * Binv
            for (std::size_t j = 0; j < n_; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < n_; ++i)
                    s += basic_cost(basis_[i]) * binv_(i, j);
                y[j] = s;
            }
            kernels::matvec_t(n_, cols_, m_.data(), y.data(), g.data());

            // Entering: smallest index with negative reduced cost.
            std::ptrdiff_t enter = -1;
            for (std::size_t j = 0; j < total && enter < 0; ++j) {
                if (is_basic[j]) continue;
                if (reduced_cost(j, y, g) < -kTol) enter = static_cast<std::ptrdiff_t>(j);
            }
            if (enter < 0) break;

            column(static_cast<std::size_t>(enter), col);
            kernels::matvec(n_, n_, binv_.data(), col.data(), w.data());

            // Leaving: Bland tie-break on the basic variable index.
            std::ptrdiff_t leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n_; ++i) {
                if (w[i] > kTol) {
                    double ratio = xb_[i] / w[i];
                    if (ratio < best - kTol ||
                        (ratio < best + kTol &&
                         (leave < 0 || basis_[i] < basis_[static_cast<std::size_t>(leave)]))) {
                        best = ratio;
                        leave = static_cast<std::ptrdiff_t>(i);
                    }
                }
            }
            if (leave < 0) throw ConvergenceFailure("l1 oracle: unbounded pivot");

            const std::size_t lv = static_cast<std::size_t>(leave);
            const double piv = w[lv];
            for (std::size_t j = 0; j < n_; ++j) binv_(lv, j) /= piv;
            xb_[lv] /= piv;
            for (std::size_t i = 0; i < n_; ++i) {
                if (i == lv || w[i] == 0.0) continue;
                const double f = w[i];
                for (std::size_t j = 0; j < n_; ++j) binv_(i, j) -= f * binv_(lv, j);
                xb_[i] -= f * xb_[lv];
                if (xb_[i] < 0.0 && xb_[i] > -kTol) xb_[i] = 0.0;
            }
            is_basic[basis_[lv]] = 0;
            is_basic[static_cast<std::size_t>(enter)] = 1;
            basis_[lv] = static_cast<std::size_t>(enter);

            if (++pivots % 256 == 0) refactorize();
            if (pivots > max_pivots) throw ConvergenceFailure("l1 oracle: pivot limit");
        }

        L1Result out;
        out.pivots = pivots;
        out.x.assign(cols_, 0.0);
        out.objective = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t j = basis_[i];
            const double val = xb_[i];
            if (j < cols_)
                out.x[j] += val;
            else if (j < 2 * cols_)
                out.x[j - cols_] -= val;
            else
                out.objective += val;
        }
        return out;
    }

private:
    static constexpr double kTol = 1e-9;

    double basic_cost(std::size_t j) const { return j < 2 * cols_ ? 0.0 : 1.0; }

    double reduced_cost(std::size_t j, const Vector& y, const Vector& g) const {
        if (j < cols_) return -g[j];
        if (j < 2 * cols_) return g[j - cols_];
        if (j < 2 * cols_ + n_) return 1.0 - y[j - 2 * cols_];
        return 1.0 + y[j - 2 * cols_ - n_];
    }

    void column(std::size_t j, Vector& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        if (j < cols_) {
            for (std::size_t i = 0; i < n_; ++i) out[i] = m_(i, j);
        } else if (j < 2 * cols_) {
            for (std::size_t i = 0; i < n_; ++i) out[i] = -m_(i, j - cols_);
        } else if (j < 2 * cols_ + n_) {
            out[j - 2 * cols_] = 1.0;
        } else {
            out[j - 2 * cols_ - n_] = -1.0;
        }
    }

    // Rebuild binv_ and xb_ from the basis by Gauss-Jordan elimination.
    void refactorize() {
        DenseMatrix bmat(n_, n_);
        Vector col(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            column(basis_[i], col);
            bmat.set_col(i, col);
        }
        DenseMatrix inv = DenseMatrix::identity(n_);
        for (std::size_t c = 0; c < n_; ++c) {
            std::size_t p = c;
            for (std::size_t r = c + 1; r < n_; ++r)
                if (std::abs(bmat(r, c)) > std::abs(bmat(p, c))) p = r;
            if (std::abs(bmat(p, c)) < 1e-14)
                throw ConvergenceFailure("l1 oracle: singular basis");
            bmat.swap_rows(p, c);
            inv.swap_rows(p, c);
            const double d = bmat(c, c);
            for (std::size_t j = 0; j < n_; ++j) {
                bmat(c, j) /= d;
                inv(c, j) /= d;
            }
            for (std::size_t r = 0; r < n_; ++r) {
                if (r == c) continue;
                const double f = bmat(r, c);
                if (f == 0.0) continue;
                for (std::size_t j = 0; j < n_; ++j) {
                    bmat(r, j) -= f * bmat(c, j);
                    inv(r, j) -= f * inv(c, j);
                }
            }
        }
        binv_ = std::move(inv);
        xb_ = binv_ * b_;
        for (double& v : xb_)
            if (v < 0.0 && v > -kTol) v = 0.0;
    }

    const DenseMatrix& m_;
    const Vector& b_;
    std::size_t n_, cols_;
    std::vector<std::size_t> basis_;
    DenseMatrix binv_;
    Vector xb_;
};

}  // namespace

L1Result l1(const DenseMatrix& m, const Vector& b) {
    if (b.size() != m.rows()) throw ShapeMismatch("l1: b length mismatch");
    if (m.rows() == 0) return {Vector(m.cols(), 0.0), 0.0, 0};
    if (m.cols() == 0) {
        double obj = 0.0;
        for (double v : b) obj += std::abs(v);
        return {{}, obj, 0};
    }
    return BlandSimplex(m, b).solve();
}

}  // namespace dyngraph::oracle
