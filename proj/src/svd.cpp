#include "dyngraph/svd.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "dyngraph/kernels.hpp"
#include "dyngraph/oracle.hpp"

namespace dyngraph {

namespace {

constexpr double kResidTol = 1e-13;      // outer-basis extension threshold factor
constexpr double kOrthoDriftPerCol = 1e-10;
constexpr int kMaxJacobiSweeps = 100;

// Keeps at most rank_cap values above trunc_tol * sigma[0].
std::size_t trimmed_rank(const Vector& sigma, std::size_t rank_cap, double trunc_tol) {
    if (sigma.empty() || sigma[0] <= 0.0) return 0;
    std::size_t k = 0;
    while (k < sigma.size() && k < rank_cap && sigma[k] > trunc_tol * sigma[0]) ++k;
    return k;
}

DenseMatrix left_cols(const DenseMatrix& a, std::size_t k) {
    DenseMatrix out(a.rows(), k);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < k; ++j) out(i, j) = a(i, j);
    return out;
}

void modified_gram_schmidt(DenseMatrix& a) {
    const std::size_t n = a.rows(), k = a.cols();
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = 0; i < j; ++i) {
                double r = 0.0;
                for (std::size_t t = 0; t < n; ++t) r += a(t, i) * a(t, j);
                for (std::size_t t = 0; t < n; ++t) a(t, j) -= r * a(t, i);
            }
            double nrm = 0.0;
            for (std::size_t t = 0; t < n; ++t) nrm += a(t, j) * a(t, j);
            nrm = std::sqrt(nrm);
            if (nrm > 0.0)
                for (std::size_t t = 0; t < n; ++t) a(t, j) /= nrm;
        }
    }
}

struct Projection {
    Vector coords;   // length = outer column count
    Vector residual; // unit direction when extend is set
    double rho = 0.0;
    bool extend = false;
};

Projection project_onto(const DenseMatrix& outer, const Vector& vec) {
    const std::size_t n = outer.rows(), s = outer.cols();
    Projection pr;
    pr.coords.assign(s, 0.0);
    Vector resid = vec;
    if (s > 0) {
        Vector p(s), tmp(n);
        kernels::matvec_t(n, s, outer.data(), vec.data(), p.data());
        kernels::matvec(n, s, outer.data(), p.data(), tmp.data());
        for (std::size_t i = 0; i < n; ++i) resid[i] -= tmp[i];
        // Second orthogonalization pass keeps the outer basis clean.
        Vector p2(s);
        kernels::matvec_t(n, s, outer.data(), resid.data(), p2.data());
        kernels::matvec(n, s, outer.data(), p2.data(), tmp.data());
        for (std::size_t i = 0; i < n; ++i) resid[i] -= tmp[i];
        for (std::size_t i = 0; i < s; ++i) pr.coords[i] = p[i] + p2[i];
    }
    pr.rho = kernels::nrm2(resid.data(), n);
    const double scale = kernels::nrm2(vec.data(), n);
    if (pr.rho > kResidTol * (1.0 + scale)) {
        pr.extend = true;
        kernels::scal(n, 1.0 / pr.rho, resid.data());
        pr.residual = std::move(resid);
    } else {
        pr.rho = 0.0;
    }
    return pr;
}

}  // namespace

SmallSvd jacobi_svd(const DenseMatrix& a) {
    const std::size_t p = a.rows(), q = a.cols();
    if (p == 0 || q == 0) return {DenseMatrix(p, 0), {}, DenseMatrix(q, 0)};

    const bool swapped = p < q;
    DenseMatrix b = swapped ? a.transposed() : a;
    const std::size_t rows = b.rows(), cols = b.cols();
    DenseMatrix v = DenseMatrix::identity(cols);

    double fro2 = 0.0;
    for (std::size_t i = 0; i < rows * cols; ++i) fro2 += b.data()[i] * b.data()[i];
    // Columns this far below the matrix scale are numerically zero; rotating
    // against them dithers without converging.
    const double col_floor = 1e-34 * fro2;

    std::uint64_t rotations = 0;
    int sweep = 0;
    for (; sweep < kMaxJacobiSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < cols; ++i) {
            for (std::size_t j = i + 1; j < cols; ++j) {
                double aii = 0.0, ajj = 0.0, aij = 0.0;
                for (std::size_t t = 0; t < rows; ++t) {
                    const double bi = b(t, i), bj = b(t, j);
                    aii += bi * bi;
                    ajj += bj * bj;
                    aij += bi * bj;
                }
                if (aii <= col_floor || ajj <= col_floor) continue;
                if (std::abs(aij) <= 1e-15 * std::sqrt(aii * ajj) || aij == 0.0) continue;
                rotated = true;
                ++rotations;
                const double zeta = (ajj - aii) / (2.0 * aij);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (std::size_t r = 0; r < rows; ++r) {
                    const double bi = b(r, i), bj = b(r, j);
                    b(r, i) = cs * bi - sn * bj;
                    b(r, j) = sn * bi + cs * bj;
                }
                for (std::size_t r = 0; r < cols; ++r) {
                    const double vi = v(r, i), vj = v(r, j);
                    v(r, i) = cs * vi - sn * vj;
                    v(r, j) = sn * vi + cs * vj;
                }
            }
        }
        if (!rotated) break;
    }
    if (sweep == kMaxJacobiSweeps)
        throw ConvergenceFailure("jacobi_svd: sweep limit exceeded");
    kernels::add_flops(rotations * 6 * (rows + cols));

    Vector norms(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < rows; ++t) s += b(t, j) * b(t, j);
        norms[j] = std::sqrt(s);
    }
    std::vector<std::size_t> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

    DenseMatrix uu(rows, cols);
    DenseMatrix vv(cols, cols);
    Vector sigma(cols);
    for (std::size_t jj = 0; jj < cols; ++jj) {
        const std::size_t src = order[jj];
        sigma[jj] = norms[src];
        if (norms[src] > 0.0)
            for (std::size_t t = 0; t < rows; ++t) uu(t, jj) = b(t, src) / norms[src];
        for (std::size_t t = 0; t < cols; ++t) vv(t, jj) = v(t, src);
    }

    // First significant component of each left-factor column made positive.
    for (std::size_t j = 0; j < cols; ++j) {
        double peak = 0.0;
        for (std::size_t t = 0; t < rows; ++t) peak = std::max(peak, std::abs(uu(t, j)));
        if (peak == 0.0) continue;
        double lead = 0.0;
        for (std::size_t t = 0; t < rows; ++t)
            if (std::abs(uu(t, j)) > 1e-8 * peak) {
                lead = uu(t, j);
                break;
            }
        if (lead < 0.0) {
            for (std::size_t t = 0; t < rows; ++t) uu(t, j) = -uu(t, j);
            for (std::size_t t = 0; t < cols; ++t) vv(t, j) = -vv(t, j);
        }
    }

    if (swapped) return {vv, std::move(sigma), uu};
    return {uu, std::move(sigma), vv};
}

SvdState SvdState::from_scratch(const DenseMatrix& m, std::size_t rank_cap, double trunc_tol) {
    if (!m.all_finite()) throw InvalidWeight("svd: matrix has non-finite entries");
    SvdState s;
    s.rows_ = m.rows();
    s.cols_ = m.cols();
    // The cap is a request; the effective cap follows the current shape, so
    // a factorization started on a small matrix can grow after appends.
    s.rank_cap_ = rank_cap == 0 ? std::min(m.rows(), m.cols()) : rank_cap;
    s.trunc_tol_ = trunc_tol;
    oracle::SvdResult f = oracle::svd(m);
    const std::size_t k = trimmed_rank(f.sigma, s.effective_cap(), trunc_tol);
    s.sigma_.assign(f.sigma.begin(), f.sigma.begin() + k);
    s.u_outer_ = left_cols(f.U, k);
    s.v_outer_ = left_cols(f.V, k);
    s.u_inner_ = DenseMatrix::identity(k);
    s.v_inner_ = DenseMatrix::identity(k);
    return s;
}

void SvdState::set_from_thin(const DenseMatrix& u, Vector sigma, const DenseMatrix& v) {
    u_outer_ = u;
    v_outer_ = v;
    sigma_ = std::move(sigma);
    u_inner_ = DenseMatrix::identity(sigma_.size());
    v_inner_ = DenseMatrix::identity(sigma_.size());
}

DenseMatrix SvdState::u() const {
    if (rank() == 0) return DenseMatrix(rows_, 0);
    return u_outer_ * u_inner_;
}

DenseMatrix SvdState::v() const {
    if (rank() == 0) return DenseMatrix(cols_, 0);
    return v_outer_ * v_inner_;
}

DenseMatrix SvdState::low_rank_approx() const {
    if (rank() == 0) return DenseMatrix(rows_, cols_);
    DenseMatrix us = u();
    for (std::size_t i = 0; i < us.rows(); ++i)
        for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= sigma_[j];
    return us * v().transposed();
}

void SvdState::rediagonalize(DenseMatrix core, bool, bool) {
    SmallSvd f = jacobi_svd(core);
    const std::size_t k = trimmed_rank(f.sigma, effective_cap(), trunc_tol_);
    sigma_.assign(f.sigma.begin(), f.sigma.begin() + k);
    u_inner_ = left_cols(f.u, k);
    v_inner_ = left_cols(f.v, k);
    compress();
}

void SvdState::compress() {
    const std::size_t limit = std::max<std::size_t>(2 * (effective_cap() + 2), 8);
    const std::size_t k = rank();
    if (u_outer_.cols() > limit) {
        u_outer_ = k > 0 ? u_outer_ * u_inner_ : DenseMatrix(rows_, 0);
        u_inner_ = DenseMatrix::identity(k);
        DenseMatrix gram = u_outer_.transposed() * u_outer_;
        double drift = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                const double d = gram(i, j) - (i == j ? 1.0 : 0.0);
                drift += d * d;
            }
        if (std::sqrt(drift) > kOrthoDriftPerCol * std::max<std::size_t>(k, 1))
            modified_gram_schmidt(u_outer_);
    }
    if (v_outer_.cols() > limit) {
        v_outer_ = k > 0 ? v_outer_ * v_inner_ : DenseMatrix(cols_, 0);
        v_inner_ = DenseMatrix::identity(k);
        DenseMatrix gram = v_outer_.transposed() * v_outer_;
        double drift = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                const double d = gram(i, j) - (i == j ? 1.0 : 0.0);
                drift += d * d;
            }
        if (std::sqrt(drift) > kOrthoDriftPerCol * std::max<std::size_t>(k, 1))
            modified_gram_schmidt(v_outer_);
    }
}

namespace {

// core[0:s,0:t] = u_inner * diag(sigma) * v_inner^T inside a (su x tv) frame.
DenseMatrix padded_inner_product(const DenseMatrix& u_inner, const Vector& sigma,
                                 const DenseMatrix& v_inner, std::size_t su, std::size_t tv) {
    const std::size_t s = u_inner.rows(), t = v_inner.rows(), k = sigma.size();
    DenseMatrix core(su, tv);
    if (k == 0) return core;
    DenseMatrix w = u_inner;  // s x k, columns scaled by sigma
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < k; ++j) w(i, j) *= sigma[j];
    DenseMatrix block(s, t);
    kernels::gemm(s, k, t, w.data(), v_inner.transposed().data(), block.data());
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < t; ++j) core(i, j) = block(i, j);
    return core;
}

}  // namespace

void SvdState::rank1_update(const Vector& c, const Vector& d) {
    if (c.size() != rows_ || d.size() != cols_)
        throw ShapeMismatch("svd rank1_update: vector lengths");
    if (kernels::nrm2(c.data(), c.size()) == 0.0 || kernels::nrm2(d.data(), d.size()) == 0.0)
        return;

    Projection pu = project_onto(u_outer_, c);
    Projection pv = project_onto(v_outer_, d);
    const std::size_t s = u_outer_.cols(), t = v_outer_.cols();
    const std::size_t su = s + (pu.extend ? 1 : 0), tv = t + (pv.extend ? 1 : 0);

    DenseMatrix core = padded_inner_product(u_inner_, sigma_, v_inner_, su, tv);
    Vector cu(su), cv(tv);
    for (std::size_t i = 0; i < s; ++i) cu[i] = pu.coords[i];
    if (pu.extend) cu[s] = pu.rho;
    for (std::size_t j = 0; j < t; ++j) cv[j] = pv.coords[j];
    if (pv.extend) cv[t] = pv.rho;
    kernels::ger(su, tv, 1.0, cu.data(), cv.data(), core.data());

    if (pu.extend) u_outer_.append_col(pu.residual);
    if (pv.extend) v_outer_.append_col(pv.residual);
    rediagonalize(std::move(core), pu.extend, pv.extend);
}

void SvdState::append_column(const Vector& a) {
    if (a.size() != rows_) throw ShapeMismatch("svd append_column: length");
    if (rows_ == 0) {
        ++cols_;
        v_outer_.append_row(Vector(v_outer_.cols(), 0.0));
        return;
    }
    ++cols_;
    v_outer_.append_row(Vector(v_outer_.cols(), 0.0));
    if (kernels::nrm2(a.data(), a.size()) == 0.0) return;

    Projection pu = project_onto(u_outer_, a);
    const std::size_t s = u_outer_.cols(), t = v_outer_.cols();
    const std::size_t su = s + (pu.extend ? 1 : 0);

    DenseMatrix core = padded_inner_product(u_inner_, sigma_, v_inner_, su, t + 1);
    for (std::size_t i = 0; i < s; ++i) core(i, t) = pu.coords[i];
    if (pu.extend) core(s, t) = pu.rho;

    Vector e(cols_, 0.0);
    e[cols_ - 1] = 1.0;
    v_outer_.append_col(e);
    if (pu.extend) u_outer_.append_col(pu.residual);
    rediagonalize(std::move(core), pu.extend, true);
}

void SvdState::append_row(const Vector& a) {
    if (a.size() != cols_) throw ShapeMismatch("svd append_row: length");
    if (cols_ == 0) {
        ++rows_;
        u_outer_.append_row(Vector(u_outer_.cols(), 0.0));
        return;
    }
    ++rows_;
    u_outer_.append_row(Vector(u_outer_.cols(), 0.0));
    if (kernels::nrm2(a.data(), a.size()) == 0.0) return;

    Projection pv = project_onto(v_outer_, a);
    const std::size_t s = u_outer_.cols(), t = v_outer_.cols();
    const std::size_t tv = t + (pv.extend ? 1 : 0);

    DenseMatrix core = padded_inner_product(u_inner_, sigma_, v_inner_, s + 1, tv);
    for (std::size_t j = 0; j < t; ++j) core(s, j) = pv.coords[j];
    if (pv.extend) core(s, t) = pv.rho;

    Vector e(rows_, 0.0);
    e[rows_ - 1] = 1.0;
    u_outer_.append_col(e);
    if (pv.extend) v_outer_.append_col(pv.residual);
    rediagonalize(std::move(core), true, pv.extend);
}

std::size_t SvdState::update_for_graph(const DynamicGraph& g_before, const GraphUpdate& op,
                                       const EmbeddingKind& kind) {
    if (kind_of(op) == OpKind::NodeDelete)
        throw UnsupportedOperation("svd: node deletion has no update path");
    if (!capabilities(kind).svd(kind_of(op)))
        throw IncompatibleEmbedding("svd: operation unsupported by this embedding");
    if (rows_ != static_cast<std::size_t>(g_before.node_count()) || rows_ != cols_)
        throw ShapeMismatch("svd: state shape does not match the graph");

    const EmbeddingDelta delta = delta_for_update(g_before, op, kind);
    for (const DeltaStep& step : delta.steps) {
        std::visit(
            [&](const auto& st) {
                using T = std::decay_t<decltype(st)>;
                if constexpr (std::is_same_v<T, ApplyPair>)
                    rank1_update(st.pair.c, st.pair.d);
                else if constexpr (std::is_same_v<T, AppendColumn>)
                    append_column(st.values);
                else if constexpr (std::is_same_v<T, AppendRow>)
                    append_row(st.values);
                else
                    throw UnsupportedOperation("svd: structural removal/permutation step");
            },
            step);
    }
    return delta.pair_count();
}

double SvdState::orthogonality_drift() const {
    const std::size_t k = rank();
    if (k == 0) return 0.0;
    auto gram_drift = [&](const DenseMatrix& f) {
        DenseMatrix g = f.transposed() * f;
        double drift = 0.0;
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) {
                const double d = g(i, j) - (i == j ? 1.0 : 0.0);
                drift += d * d;
            }
        return std::sqrt(drift);
    };
    return gram_drift(u()) + gram_drift(v());
}

void SvdState::write_checkpoint(std::ostream& os) const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", trunc_tol_);
    os << "svd " << rank_cap_ << ' ' << buf << '\n';
    write_matrix(os, u());
    write_vector(os, sigma_);
    write_matrix(os, v());
}

SvdState SvdState::read_checkpoint(std::istream& is) {
    std::string tag;
    std::size_t cap = 0;
    double tol = 0.0;
    if (!(is >> tag >> cap >> tol) || tag != "svd")
        throw ParseError("svd checkpoint: bad header");
    is.ignore();
    DenseMatrix u = read_matrix(is);
    Vector sigma = read_vector(is);
    DenseMatrix v = read_matrix(is);
    if (u.cols() != sigma.size() || v.cols() != sigma.size())
        throw ParseError("svd checkpoint: factor shape mismatch");
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (sigma[i] <= 0.0 || (i > 0 && sigma[i] > sigma[i - 1]))
            throw ParseError("svd checkpoint: sigma not positive nonincreasing");
    }
    SvdState s;
    s.rows_ = u.rows();
    s.cols_ = v.rows();
    s.rank_cap_ = cap;
    s.trunc_tol_ = tol;
    s.set_from_thin(u, std::move(sigma), v);
    if (s.orthogonality_drift() > 1e-8 * std::max<std::size_t>(s.rank(), 1))
        throw ParseError("svd checkpoint: factors not orthonormal");
    return s;
}

}  // namespace dyngraph
