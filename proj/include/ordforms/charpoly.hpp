#pragma once

#include "zmodpk.hpp"

namespace ordforms {

/* Berkowitz division-free characteristic polynomial; valid over any
   commutative ring, so exact over Z/p^k.  Returns coefficients of
   det(X*I - A) from constant term up to the leading 1. */
inline std::vector<u64> charpoly(const MatrixOk& A)
{
    assert(A.rows == A.cols);
    const ModulusContext ctx = A.ctx;
    const std::size_t n = A.rows;
    std::vector<u64> poly{1 % ctx.q}; // char poly of the 0x0 matrix
    for (std::size_t m = 1; m <= n; ++m) {
        // principal m x m block, partitioned around its last row/column
        const std::size_t r = m - 1;
        u64 arr = A.at(r, r);
        // R = row (A[r][0..r-1]), C = column (A[0..r-1][r]), M = leading block
        // Toeplitz column: (1, -a_rr, -R*C, -R*M*C, -R*M^2*C, ...)
        std::vector<u64> tc(m + 1, 0);
        tc[0] = 1 % ctx.q;
        tc[1] = ctx.neg(arr);
        if (r > 0) {
            std::vector<u64> v(r);
            for (std::size_t i = 0; i < r; ++i)
                v[i] = A.at(i, r);
            for (std::size_t t = 2; t <= m; ++t) {
                u64 dot = 0;
                for (std::size_t i = 0; i < r; ++i)
                    dot = ctx.add(dot, ctx.mul(A.at(r, i), v[i]));
                tc[t] = ctx.neg(dot);
                if (t < m) {
                    std::vector<u64> nv(r, 0);
                    for (std::size_t i = 0; i < r; ++i) {
                        u64 acc = 0;
                        for (std::size_t j = 0; j < r; ++j)
                            acc = ctx.add(acc, ctx.mul(A.at(i, j), v[j]));
                        nv[i] = acc;
                    }
                    v = std::move(nv);
                }
            }
        }
        // multiply the Toeplitz matrix into the previous coefficient vector:
        // new[i] = sum_j tc[i - j] * old[j], old in degree-descending layout
        std::vector<u64> prev = std::move(poly); // length m (degree m-1 poly, descending)
        std::vector<u64> next(m + 1, 0);
        for (std::size_t i = 0; i <= m; ++i) {
            u64 acc = 0;
            for (std::size_t j = 0; j < prev.size(); ++j) {
                if (i >= j && i - j <= m)
                    acc = ctx.add(acc, ctx.mul(tc[i - j], prev[j]));
            }
            next[i] = acc;
        }
        poly = std::move(next);
    }
    // poly is in degree-descending order (leading first); flip to ascending
    std::vector<u64> asc(poly.rbegin(), poly.rend());
    return asc;
}

} // namespace ordforms
