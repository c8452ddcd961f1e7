#include "dyngraph/l1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dyngraph/kernels.hpp"

namespace dyngraph {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-9;
constexpr int kStallLimit = 50;  // non-improving pivots before Bland's rule

// Dense simplex tableau for  min 1^T(u+v), M(xp-xn) + u - v = b.
// Columns: xp (m), xn (m), u (n), v (n), then the rhs.
struct Tableau {
    std::size_t n = 0, m = 0;
    std::vector<double> t;  // n x (2m+2n+1)

    std::size_t width() const { return 2 * m + 2 * n + 1; }
    double& at(std::size_t i, std::size_t j) { return t[i * width() + j]; }
    double at(std::size_t i, std::size_t j) const { return t[i * width() + j]; }
    std::size_t rhs() const { return width() - 1; }

    static double cost(std::size_t j, std::size_t m) { return j < 2 * m ? 0.0 : 1.0; }

    double objective(const std::vector<std::size_t>& basis) const {
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) obj += cost(basis[i], m) * at(i, rhs());
        return obj;
    }

    void pivot(std::size_t r, std::size_t jc) {
        const std::size_t w = width();
        double* prow = t.data() + r * w;
        const double d = prow[jc];
        for (std::size_t j = 0; j < w; ++j) prow[j] /= d;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == r) continue;
            double* row = t.data() + i * w;
            const double f = row[jc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < w; ++j) row[j] -= f * prow[j];
            row[jc] = 0.0;
        }
        kernels::add_flops(2 * n * w);
    }
};

// Scratch tableau: basis u_i or v_i by the sign of b_i, so B^-1 = diag(+-1).
Tableau initial_tableau(const DenseMatrix& mat, const Vector& b,
                        std::vector<std::size_t>& basis) {
    const std::size_t n = mat.rows(), m = mat.cols();
    Tableau tab;
    tab.n = n;
    tab.m = m;
    tab.t.assign(n * tab.width(), 0.0);
    basis.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = b[i] >= 0.0 ? 1.0 : -1.0;
        basis[i] = b[i] >= 0.0 ? 2 * m + i : 2 * m + n + i;
        for (std::size_t j = 0; j < m; ++j) {
            tab.at(i, j) = s * mat(i, j);
            tab.at(i, m + j) = -s * mat(i, j);
        }
        tab.at(i, 2 * m + i) = s;
        tab.at(i, 2 * m + n + i) = -s;
        tab.at(i, tab.rhs()) = s * b[i];
    }
    return tab;
}

// Tableau for an arbitrary basis: T = B^-1 [A | b]. Fails on a singular basis.
bool tableau_from_basis(const DenseMatrix& mat, const Vector& b,
                        const std::vector<std::size_t>& basis, Tableau& tab) {
    const std::size_t n = mat.rows(), m = mat.cols();
    DenseMatrix bmat(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = basis[i];
        for (std::size_t r = 0; r < n; ++r) {
            double val = 0.0;
            if (j < m)
                val = mat(r, j);
            else if (j < 2 * m)
                val = -mat(r, j - m);
            else if (j < 2 * m + n)
                val = (r == j - 2 * m) ? 1.0 : 0.0;
            else
                val = (r == j - 2 * m - n) ? -1.0 : 0.0;
            bmat(r, i) = val;
        }
    }
    DenseMatrix binv = DenseMatrix::identity(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(bmat(r, c)) > std::abs(bmat(p, c))) p = r;
        if (std::abs(bmat(p, c)) < 1e-12) return false;
        bmat.swap_rows(p, c);
        binv.swap_rows(p, c);
        const double d = bmat(c, c);
        for (std::size_t j = 0; j < n; ++j) {
            bmat(c, j) /= d;
            binv(c, j) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = bmat(r, c);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                bmat(r, j) -= f * bmat(c, j);
                binv(r, j) -= f * binv(c, j);
            }
        }
    }

    tab.n = n;
    tab.m = m;
    tab.t.assign(n * tab.width(), 0.0);
    DenseMatrix bm(n, m);
    kernels::gemm(n, n, m, binv.data(), mat.data(), bm.data());
    Vector bb(n);
    kernels::matvec(n, n, binv.data(), b.data(), bb.data());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            tab.at(i, j) = bm(i, j);
            tab.at(i, m + j) = -bm(i, j);
        }
        for (std::size_t j = 0; j < n; ++j) {
            tab.at(i, 2 * m + j) = binv(i, j);
            tab.at(i, 2 * m + n + j) = -binv(i, j);
        }
        tab.at(i, tab.rhs()) = bb[i];
    }
    return true;
}

void reduced_costs(const Tableau& tab, const std::vector<std::size_t>& basis, Vector& z) {
    const std::size_t n = tab.n, m = tab.m, cols = 2 * m + 2 * n;
    z.assign(cols, 0.0);
    Vector cb(n);
    for (std::size_t i = 0; i < n; ++i) cb[i] = Tableau::cost(basis[i], m);
    for (std::size_t j = 0; j < cols; ++j) {
        double s = Tableau::cost(j, m);
        for (std::size_t i = 0; i < n; ++i) s -= cb[i] * tab.at(i, j);
        z[j] = s;
    }
    kernels::add_flops(2 * n * cols);
}

std::size_t primal_simplex(Tableau& tab, std::vector<std::size_t>& basis) {
    const std::size_t n = tab.n, m = tab.m, cols = 2 * m + 2 * n;
    std::vector<char> is_basic(cols, 0);
    for (std::size_t j : basis) is_basic[j] = 1;

    std::size_t pivots = 0;
    int stall = 0;
    bool bland = false;
    double last_obj = tab.objective(basis);
    const std::size_t max_iters = 10000 + 200 * (n + m);
    Vector z;
    while (true) {
        reduced_costs(tab, basis, z);
        std::ptrdiff_t enter = -1;
        if (bland) {
            for (std::size_t j = 0; j < cols; ++j)
                if (!is_basic[j] && z[j] < -kPivotTol) {
                    enter = static_cast<std::ptrdiff_t>(j);
                    break;
                }
        } else {
            double best = -kPivotTol;
            for (std::size_t j = 0; j < cols; ++j)
                if (!is_basic[j] && z[j] < best) {
                    best = z[j];
                    enter = static_cast<std::ptrdiff_t>(j);
                }
        }
        if (enter < 0) break;

        std::ptrdiff_t leave = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double a = tab.at(i, static_cast<std::size_t>(enter));
            if (a > kPivotTol) {
                const double ratio = tab.at(i, tab.rhs()) / a;
                if (ratio < best_ratio - kFeasTol ||
                    (ratio < best_ratio + kFeasTol &&
                     (leave < 0 || basis[i] < basis[static_cast<std::size_t>(leave)]))) {
                    best_ratio = ratio;
                    leave = static_cast<std::ptrdiff_t>(i);
                }
            }
        }
        if (leave < 0) throw ConvergenceFailure("l1 simplex: unbounded direction");

        is_basic[basis[static_cast<std::size_t>(leave)]] = 0;
        is_basic[static_cast<std::size_t>(enter)] = 1;
        basis[static_cast<std::size_t>(leave)] = static_cast<std::size_t>(enter);
        tab.pivot(static_cast<std::size_t>(leave), static_cast<std::size_t>(enter));
        ++pivots;

        const double obj = tab.objective(basis);
        if (obj > last_obj - 1e-12) {
            if (++stall > kStallLimit) bland = true;
        } else {
            stall = 0;
            last_obj = obj;
        }
        if (pivots > max_iters) throw ConvergenceFailure("l1 simplex: pivot limit");
    }
    return pivots;
}

// Dual simplex, used when a warm-started basis is dual feasible but the
// basic solution has negative entries. Returns false on failure.
bool dual_simplex(Tableau& tab, std::vector<std::size_t>& basis, std::size_t& pivots) {
    const std::size_t n = tab.n, m = tab.m, cols = 2 * m + 2 * n;
    std::vector<char> is_basic(cols, 0);
    for (std::size_t j : basis) is_basic[j] = 1;
    const std::size_t max_iters = 10000 + 200 * (n + m);
    Vector z;
    std::size_t local = 0;
    while (true) {
        std::ptrdiff_t leave = -1;
        double most_negative = -kFeasTol;
        for (std::size_t i = 0; i < n; ++i)
            if (tab.at(i, tab.rhs()) < most_negative) {
                most_negative = tab.at(i, tab.rhs());
                leave = static_cast<std::ptrdiff_t>(i);
            }
        if (leave < 0) break;

        reduced_costs(tab, basis, z);
        std::ptrdiff_t enter = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < cols; ++j) {
            if (is_basic[j]) continue;
            const double a = tab.at(static_cast<std::size_t>(leave), j);
            if (a < -kPivotTol) {
                const double ratio = std::max(z[j], 0.0) / (-a);
                if (ratio < best_ratio) {
                    best_ratio = ratio;
                    enter = static_cast<std::ptrdiff_t>(j);
                }
            }
        }
        if (enter < 0) return false;

        is_basic[basis[static_cast<std::size_t>(leave)]] = 0;
        is_basic[static_cast<std::size_t>(enter)] = 1;
        basis[static_cast<std::size_t>(leave)] = static_cast<std::size_t>(enter);
        tab.pivot(static_cast<std::size_t>(leave), static_cast<std::size_t>(enter));
        ++pivots;
        if (++local > max_iters) return false;
    }
    return true;
}

}  // namespace

L1State L1State::solve(const DenseMatrix& m, const Vector& b) {
    if (b.size() != m.rows()) throw ShapeMismatch("solve_l1: b length mismatch");
    L1State s;
    s.m_ = m;
    s.b_ = b;
    s.solve_scratch();
    return s;
}

L1State solve_l1(const DenseMatrix& m, const Vector& b) { return L1State::solve(m, b); }

L1State L1State::init(const DynamicGraph& g, const EmbeddingKind& kind, const Vector& b) {
    L1State s = solve(materialize(g, kind), b);
    s.graph_ = g;
    s.kind_ = kind;
    return s;
}

const DynamicGraph& L1State::graph() const {
    if (!graph_) throw UnsupportedOperation("l1 state has no graph attached");
    return *graph_;
}

void L1State::solve_scratch() {
    if (m_.rows() == 0) {
        x_.assign(m_.cols(), 0.0);
        objective_ = 0.0;
        basis_.clear();
        scratch_pivots_ = 0;
        return;
    }
    Tableau tab = initial_tableau(m_, b_, basis_);
    scratch_pivots_ = primal_simplex(tab, basis_);
    Vector xb(tab.n);
    for (std::size_t i = 0; i < tab.n; ++i) xb[i] = tab.at(i, tab.rhs());
    extract_solution(xb);
}

void L1State::resolve_warm() {
    last_fell_back_ = false;
    if (m_.rows() == 0) {
        last_update_pivots_ = 0;
        return;
    }
    Tableau tab;
    if (!tableau_from_basis(m_, b_, basis_, tab)) {
        const std::size_t before = scratch_pivots_;
        solve_scratch();
        last_update_pivots_ = scratch_pivots_;
        scratch_pivots_ = before;
        last_fell_back_ = true;
        return;
    }

    double min_rhs = 0.0;
    for (std::size_t i = 0; i < tab.n; ++i)
        min_rhs = std::min(min_rhs, tab.at(i, tab.rhs()));

    std::size_t pivots = 0;
    bool ok = true;
    if (min_rhs < -kFeasTol) {
        Vector z;
        reduced_costs(tab, basis_, z);
        double min_z = 0.0;
        for (double v : z) min_z = std::min(min_z, v);
        if (min_z >= -1e-7)
            ok = dual_simplex(tab, basis_, pivots);
        else
            ok = false;
    }
    if (ok) pivots += primal_simplex(tab, basis_);

    if (!ok) {
        const std::size_t before = scratch_pivots_;
        solve_scratch();
        last_update_pivots_ = scratch_pivots_;
        scratch_pivots_ = before;
        last_fell_back_ = true;
        return;
    }
    last_update_pivots_ = pivots;
    Vector xb(tab.n);
    for (std::size_t i = 0; i < tab.n; ++i) xb[i] = tab.at(i, tab.rhs());
    extract_solution(xb);
}

void L1State::extract_solution(const std::vector<double>& xb) {
    const std::size_t n = m_.rows(), m = m_.cols();
    x_.assign(m, 0.0);
    objective_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = basis_[i];
        const double val = xb[i];
        if (j < m)
            x_[j] += val;
        else if (j < 2 * m)
            x_[j - m] -= val;
        else
            objective_ += std::max(val, 0.0);
    }
}

void L1State::apply_rank1_and_resolve(const Vector& c, const Vector& d) {
    if (c.size() != m_.rows() || d.size() != m_.cols())
        throw ShapeMismatch("l1 rank1: vector lengths");
    kernels::ger(m_.rows(), m_.cols(), 1.0, c.data(), d.data(), m_.data());
    resolve_warm();
}

void L1State::update(const GraphUpdate& u) {
    if (!graph_) throw UnsupportedOperation("l1 update requires a graph-aware state");
    if (!capabilities(kind_).l1(kind_of(u)))
        throw UnsupportedOperation("l1 maintenance supports edge operations only");

    const EmbeddingDelta delta = delta_for_update(*graph_, u, kind_);
    graph_ = apply_update(*graph_, u);
    last_pair_count_ = delta.pair_count();
    if (delta.steps.empty()) {
        last_update_pivots_ = 0;
        last_fell_back_ = false;
        return;
    }
    for (const DeltaStep& step : delta.steps) {
        const auto* pair = std::get_if<ApplyPair>(&step);
        if (!pair) throw UnsupportedOperation("l1: structural embedding change");
        kernels::ger(m_.rows(), m_.cols(), 1.0, pair->pair.c.data(), pair->pair.d.data(),
                     m_.data());
    }
    resolve_warm();
}

std::vector<std::size_t> L1State::active_rows() const {
    Vector r(m_.rows());
    kernels::matvec(m_.rows(), m_.cols(), m_.data(), x_.data(), r.data());
    double scale = 1.0;
    for (double v : b_) scale = std::max(scale, std::abs(v));
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (std::abs(r[i] - b_[i]) <= 1e-8 * scale) rows.push_back(i);
    return rows;
}

L1Certificate L1State::certificate() const {
    L1Certificate cert;
    const std::size_t n = m_.rows(), m = m_.cols();
    if (n == 0) {
        cert.ok = true;
        return cert;
    }

    // Simplex multipliers: solve B^T y = c_B, then s = -y.
    DenseMatrix bt(n, n);
    Vector cb(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = basis_[i];
        cb[i] = Tableau::cost(j, m);
        for (std::size_t r = 0; r < n; ++r) {
            double val = 0.0;
            if (j < m)
                val = m_(r, j);
            else if (j < 2 * m)
                val = -m_(r, j - m);
            else if (j < 2 * m + n)
                val = (r == j - 2 * m) ? 1.0 : 0.0;
            else
                val = (r == j - 2 * m - n) ? -1.0 : 0.0;
            bt(i, r) = val;  // row i of B^T is column i of B
        }
    }
    // Gaussian elimination with partial pivoting on [B^T | c_B].
    Vector y = cb;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(bt(r, c)) > std::abs(bt(p, c))) p = r;
        if (std::abs(bt(p, c)) < 1e-12) return cert;  // singular: not certified
        bt.swap_rows(p, c);
        std::swap(y[p], y[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = bt(r, c) / bt(c, c);
            if (f == 0.0) continue;
            for (std::size_t j = c; j < n; ++j) bt(r, j) -= f * bt(c, j);
            y[r] -= f * y[c];
        }
    }
    for (std::size_t c = n; c-- > 0;) {
        for (std::size_t j = c + 1; j < n; ++j) y[c] -= bt(c, j) * y[j];
        y[c] /= bt(c, c);
    }

    Vector s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = -y[i];

    Vector mts(m, 0.0);
    kernels::matvec_t(n, m, m_.data(), s.data(), mts.data());
    for (double v : mts) cert.eq_residual = std::max(cert.eq_residual, std::abs(v));
    double sinf = 0.0;
    for (double v : s) sinf = std::max(sinf, std::abs(v));
    cert.bound_excess = std::max(0.0, sinf - 1.0);

    Vector r(n);
    kernels::matvec(n, m, m_.data(), x_.data(), r.data());
    double scale = 1.0;
    for (double v : b_) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < n; ++i) {
        const double res = r[i] - b_[i];
        if (std::abs(res) > 1e-7 * scale) {
            const double sign = res > 0 ? 1.0 : -1.0;
            if (s[i] * sign < 1.0 - 1e-6) cert.sign_match = false;
        }
    }

    double mscale = std::max(1.0, frobenius_norm(m_));
    cert.ok = cert.eq_residual <= 1e-6 * mscale && cert.bound_excess <= 1e-8 && cert.sign_match;
    return cert;
}

}  // namespace dyngraph
