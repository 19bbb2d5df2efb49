#pragma once

#include "zmodpk.hpp"

#include <optional>

namespace ordforms {

/* Diagonalization left*m*right = diag(p^a_1, ..., p^a_r) over Z/p^k,
   with unit-determinant transforms and 0 <= a_1 <= a_2 <= ...  The
   exponent k stands for the zero divisor. */
struct SmithForm {
    ModulusContext ctx;
    std::size_t rows = 0, cols = 0;
    std::vector<unsigned> diag; // exponents a_i, length min(rows, cols)
    MatrixOk left, right;

    MatrixOk diagonal_matrix() const
    {
        MatrixOk d(ctx, rows, cols);
        for (std::size_t i = 0; i < diag.size(); ++i)
            d.at(i, i) = ctx.pow_p(diag[i]);
        return d;
    }

    /* Exponent of the i-th elementary divisor of the cokernel of m,
       i ranging over the codomain coordinates. */
    unsigned cokernel_exponent(std::size_t i) const
    {
        return i < diag.size() ? diag[i] : ctx.k;
    }
};

/* Elimination over Z/p^k, pivoting on the minimal-valuation entry;
   ties broken by lowest row index, then lowest column index. */
inline SmithForm smith(const MatrixOk& m)
{
    const ModulusContext ctx = m.ctx;
    const std::size_t R = m.rows, C = m.cols;
    SmithForm s;
    s.ctx = ctx;
    s.rows = R;
    s.cols = C;
    s.left = MatrixOk::identity(ctx, R);
    s.right = MatrixOk::identity(ctx, C);
    MatrixOk w = m;

    auto row_scale = [&](MatrixOk& x, std::size_t i, u64 c) {
        for (std::size_t j = 0; j < x.cols; ++j)
            x.at(i, j) = ctx.mul(x.at(i, j), c);
    };
    auto row_axpy = [&](MatrixOk& x, std::size_t dst, std::size_t src, u64 c) {
        for (std::size_t j = 0; j < x.cols; ++j)
            x.at(dst, j) = ctx.add(x.at(dst, j), ctx.mul(c, x.at(src, j)));
    };
    auto col_scale = [&](MatrixOk& x, std::size_t j, u64 c) {
        for (std::size_t i = 0; i < x.rows; ++i)
            x.at(i, j) = ctx.mul(x.at(i, j), c);
    };
    auto col_axpy = [&](MatrixOk& x, std::size_t dst, std::size_t src, u64 c) {
        for (std::size_t i = 0; i < x.rows; ++i)
            x.at(i, dst) = ctx.add(x.at(i, dst), ctx.mul(c, x.at(i, src)));
    };
    auto row_swap = [&](MatrixOk& x, std::size_t i1, std::size_t i2) {
        for (std::size_t j = 0; j < x.cols; ++j)
            std::swap(x.at(i1, j), x.at(i2, j));
    };
    auto col_swap = [&](MatrixOk& x, std::size_t j1, std::size_t j2) {
        for (std::size_t i = 0; i < x.rows; ++i)
            std::swap(x.at(i, j1), x.at(i, j2));
    };

    const std::size_t steps = std::min(R, C);
    for (std::size_t t = 0; t < steps; ++t) {
        unsigned best = ctx.k + 1;
        std::size_t bi = t, bj = t;
        for (std::size_t i = t; i < R; ++i)
            for (std::size_t j = t; j < C; ++j) {
                unsigned v = ctx.val(w.at(i, j));
                if (v < best) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        if (best > ctx.k)
            best = ctx.k; // all remaining entries are 0
        if (best >= ctx.k) {
            for (std::size_t i = t; i < steps; ++i)
                s.diag.push_back(ctx.k);
            break;
        }
        if (bi != t) {
            row_swap(w, t, bi);
            row_swap(s.left, t, bi);
            /* keep det a unit: negate one row */
            row_scale(w, t, ctx.neg(1 % ctx.q));
            row_scale(s.left, t, ctx.neg(1 % ctx.q));
        }
        if (bj != t) {
            col_swap(w, t, bj);
            col_swap(s.right, t, bj);
            col_scale(w, t, ctx.neg(1 % ctx.q));
            col_scale(s.right, t, ctx.neg(1 % ctx.q));
        }
        u64 uinv = ctx.inv(ctx.unit_part(w.at(t, t)));
        row_scale(w, t, uinv);
        row_scale(s.left, t, uinv);
        // pivot is now exactly p^best; every remaining entry is divisible by it
        for (std::size_t i = t + 1; i < R; ++i) {
            u64 e = w.at(i, t);
            if (!e)
                continue;
            u64 c = ctx.neg(ctx.reduce(e / ctx.pow_p_int(best)));
            row_axpy(w, i, t, c);
            row_axpy(s.left, i, t, c);
        }
        for (std::size_t j = t + 1; j < C; ++j) {
            u64 e = w.at(t, j);
            if (!e)
                continue;
            u64 c = ctx.neg(ctx.reduce(e / ctx.pow_p_int(best)));
            col_axpy(w, j, t, c);
            col_axpy(s.right, j, t, c);
        }
        s.diag.push_back(best);
    }
    /* valuations are found in nondecreasing order by minimal-pivot choice */
    return s;
}

/* Solve a*x = b columnwise; nullopt when unsolvable. */
inline std::optional<MatrixOk> solve(const MatrixOk& a, const MatrixOk& b)
{
    assert(a.ctx == b.ctx && a.rows == b.rows);
    const ModulusContext ctx = a.ctx;
    SmithForm s = smith(a);
    MatrixOk lb = mul(s.left, b);
    MatrixOk y(ctx, a.cols, b.cols);
    for (std::size_t j = 0; j < b.cols; ++j) {
        for (std::size_t i = 0; i < a.rows; ++i) {
            u64 e = lb.at(i, j);
            if (i < s.diag.size() && s.diag[i] < ctx.k) {
                u64 piv = ctx.pow_p_int(s.diag[i]);
                if (e % piv != 0)
                    return std::nullopt;
                if (i < a.cols)
                    y.at(i, j) = ctx.reduce(e / piv);
            } else {
                if (e != 0)
                    return std::nullopt;
            }
        }
    }
    return mul(s.right, y);
}

inline std::optional<std::vector<u64>> solve_vec(const MatrixOk& a, const std::vector<u64>& b)
{
    MatrixOk bm(a.ctx, b.size(), 1);
    for (std::size_t i = 0; i < b.size(); ++i)
        bm.at(i, 0) = b[i];
    auto x = solve(a, bm);
    if (!x)
        return std::nullopt;
    std::vector<u64> r(a.cols);
    for (std::size_t i = 0; i < a.cols; ++i)
        r[i] = x->at(i, 0);
    return r;
}

inline bool is_invertible(const MatrixOk& a)
{
    if (a.rows != a.cols)
        return false;
    SmithForm s = smith(a);
    for (unsigned d : s.diag)
        if (d != 0)
            return false;
    return true;
}

inline MatrixOk inverse(const MatrixOk& a)
{
    assert(a.rows == a.cols);
    auto x = solve(a, MatrixOk::identity(a.ctx, a.rows));
    if (!x || mul(*x, a) != MatrixOk::identity(a.ctx, a.rows))
        throw std::logic_error("inverse: matrix is not invertible");
    return *x;
}

/* Valuation of det(a); ctx.k means det == 0. */
inline unsigned det_valuation(const MatrixOk& a)
{
    assert(a.rows == a.cols);
    SmithForm s = smith(a);
    unsigned v = 0;
    for (unsigned d : s.diag) {
        v += d;
        if (v >= a.ctx.k)
            return a.ctx.k;
    }
    return v;
}

} // namespace ordforms
