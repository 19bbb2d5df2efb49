#pragma once

#include "common.hpp"

#include <cassert>
#include <vector>

namespace ordforms {

/* The coefficient ring Z/p^k, p prime, k >= 1.  All residues are kept
   reduced into [0, p^k). */
struct ModulusContext {
    u64 p = 0;
    unsigned k = 0;
    u64 q = 0; // p^k

    ModulusContext() = default;
    ModulusContext(u64 p_, unsigned k_) : p(p_), k(k_)
    {
        if (!is_prime_u64(p))
            throw InvalidSpecError("modulus: p = " + std::to_string(p) + " is not prime");
        if (k < 1)
            throw InvalidSpecError("modulus: precision exponent k must be >= 1");
        q = 1;
        for (unsigned i = 0; i < k; ++i) {
            if (q > (u64(1) << 62) / p)
                throw InvalidSpecError("modulus: p^k does not fit in 62 bits");
            q *= p;
        }
    }

    bool operator==(const ModulusContext& o) const { return p == o.p && k == o.k; }
    bool operator!=(const ModulusContext& o) const { return !(*this == o); }

    u64 reduce(u64 x) const { return x % q; }
    u64 reduce_signed(i64 x) const
    {
        i64 r = x % (i64)q;
        if (r < 0)
            r += (i64)q;
        return (u64)r;
    }
    u64 add(u64 a, u64 b) const { return (a + b) % q; }
    u64 sub(u64 a, u64 b) const { return (a + q - b) % q; }
    u64 mul(u64 a, u64 b) const { return q < (u64(1) << 31) ? (a * b) % q : mulmod(a, b, q); }
    u64 neg(u64 a) const { return a == 0 ? 0 : q - a; }

    /* p-adic valuation clipped to k: val(0) = k. */
    unsigned val(u64 x) const
    {
        if (x == 0)
            return k;
        unsigned v = 0;
        while (x % p == 0) {
            x /= p;
            ++v;
        }
        return v;
    }

    bool is_unit(u64 x) const { return x % p != 0; }
    u64 inv(u64 x) const { return invmod(x % q, q); }
    u64 pow_p(unsigned a) const
    {
        u64 r = 1;
        for (unsigned i = 0; i < a && i < k; ++i)
            r *= p;
        return a >= k ? 0 : r; // p^k == 0 in the ring
    }
    /* p^a as an integer, a <= k (p^k returned as the integer q). */
    u64 pow_p_int(unsigned a) const
    {
        u64 r = 1;
        for (unsigned i = 0; i < a; ++i)
            r *= p;
        return r;
    }
    /* unit part u of x = u * p^val(x); unit(0) = 1. */
    u64 unit_part(u64 x) const
    {
        if (x == 0)
            return 1;
        while (x % p == 0)
            x /= p;
        return x;
    }

    ModulusContext lowered(unsigned k2) const
    {
        assert(k2 >= 1 && k2 <= k);
        return ModulusContext(p, k2);
    }
};

/* Dense matrix over Z/p^k, row-major. */
struct MatrixOk {
    ModulusContext ctx;
    std::size_t rows = 0, cols = 0;
    std::vector<u64> a;

    MatrixOk() = default;
    MatrixOk(ModulusContext c, std::size_t r, std::size_t n) : ctx(c), rows(r), cols(n), a(r * n, 0) {}

    u64& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    u64 at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static MatrixOk identity(ModulusContext c, std::size_t n)
    {
        MatrixOk m(c, n, n);
        for (std::size_t i = 0; i < n; ++i)
            m.at(i, i) = 1 % c.q;
        return m;
    }

    static MatrixOk from_rows(ModulusContext c, std::size_t r, std::size_t n, std::initializer_list<i64> vals)
    {
        MatrixOk m(c, r, n);
        assert(vals.size() == r * n);
        std::size_t idx = 0;
        for (i64 v : vals)
            m.a[idx++] = c.reduce_signed(v);
        return m;
    }

    static MatrixOk diagonal(ModulusContext c, std::initializer_list<i64> vals)
    {
        MatrixOk m(c, vals.size(), vals.size());
        std::size_t i = 0;
        for (i64 v : vals) {
            m.at(i, i) = c.reduce_signed(v);
            ++i;
        }
        return m;
    }

    bool operator==(const MatrixOk& o) const
    {
        return ctx == o.ctx && rows == o.rows && cols == o.cols && a == o.a;
    }
    bool operator!=(const MatrixOk& o) const { return !(*this == o); }

    bool is_zero() const
    {
        for (u64 x : a)
            if (x)
                return false;
        return true;
    }

    MatrixOk transpose() const
    {
        MatrixOk t(ctx, cols, rows);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                t.at(j, i) = at(i, j);
        return t;
    }

    /* Entrywise reduction to a lower precision over the same p. */
    MatrixOk reduced(unsigned k2) const
    {
        ModulusContext c2 = ctx.lowered(k2);
        MatrixOk m(c2, rows, cols);
        for (std::size_t i = 0; i < a.size(); ++i)
            m.a[i] = a[i] % c2.q;
        return m;
    }
};

inline MatrixOk add(const MatrixOk& x, const MatrixOk& y)
{
    assert(x.ctx == y.ctx && x.rows == y.rows && x.cols == y.cols);
    MatrixOk r(x.ctx, x.rows, x.cols);
    for (std::size_t i = 0; i < x.a.size(); ++i)
        r.a[i] = x.ctx.add(x.a[i], y.a[i]);
    return r;
}

inline MatrixOk sub(const MatrixOk& x, const MatrixOk& y)
{
    assert(x.ctx == y.ctx && x.rows == y.rows && x.cols == y.cols);
    MatrixOk r(x.ctx, x.rows, x.cols);
    for (std::size_t i = 0; i < x.a.size(); ++i)
        r.a[i] = x.ctx.sub(x.a[i], y.a[i]);
    return r;
}

inline MatrixOk scale(const MatrixOk& x, u64 c)
{
    MatrixOk r(x.ctx, x.rows, x.cols);
    c %= x.ctx.q;
    for (std::size_t i = 0; i < x.a.size(); ++i)
        r.a[i] = x.ctx.mul(x.a[i], c);
    return r;
}

/* q < 2^20: entries < 2^20, products < 2^40, so up to 2^23 terms sum
   exactly in 64 bits.  Everything at desk scale takes that path. */
inline MatrixOk mul(const MatrixOk& x, const MatrixOk& y)
{
    assert(x.ctx == y.ctx && x.cols == y.rows);
    const std::size_t n = x.rows, m = y.cols, l = x.cols;
    MatrixOk r(x.ctx, n, m);
    const u64 q = x.ctx.q;
    if (q < (u64(1) << 20) && l < (std::size_t(1) << 23)) {
        for (std::size_t i = 0; i < n; ++i) {
            const u64* xi = &x.a[i * l];
            u64* ri = &r.a[i * m];
            for (std::size_t t = 0; t < l; ++t) {
                const u64 c = xi[t];
                if (!c)
                    continue;
                const u64* yt = &y.a[t * m];
                for (std::size_t j = 0; j < m; ++j)
                    ri[j] += c * yt[j];
            }
            for (std::size_t j = 0; j < m; ++j)
                ri[j] %= q;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t t = 0; t < l; ++t) {
                const u64 c = x.at(i, t);
                if (!c)
                    continue;
                for (std::size_t j = 0; j < m; ++j)
                    r.at(i, j) = x.ctx.add(r.at(i, j), x.ctx.mul(c, y.at(t, j)));
            }
    }
    return r;
}

inline std::vector<u64> mul_vec(const MatrixOk& x, const std::vector<u64>& v)
{
    assert(x.cols == v.size());
    std::vector<u64> r(x.rows, 0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        u128 acc = 0;
        for (std::size_t j = 0; j < x.cols; ++j)
            acc += (u128)x.at(i, j) * v[j];
        r[i] = (u64)(acc % x.ctx.q);
    }
    return r;
}

inline MatrixOk matpow(const MatrixOk& x, u64 e)
{
    assert(x.rows == x.cols);
    MatrixOk r = MatrixOk::identity(x.ctx, x.rows);
    MatrixOk b = x;
    while (e) {
        if (e & 1)
            r = mul(r, b);
        b = mul(b, b);
        e >>= 1;
    }
    return r;
}

inline bool commute(const MatrixOk& x, const MatrixOk& y) { return mul(x, y) == mul(y, x); }

/* Horizontal concatenation [x | y]. */
inline MatrixOk hconcat(const MatrixOk& x, const MatrixOk& y)
{
    assert(x.ctx == y.ctx && x.rows == y.rows);
    MatrixOk r(x.ctx, x.rows, x.cols + y.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.cols; ++j)
            r.at(i, j) = x.at(i, j);
        for (std::size_t j = 0; j < y.cols; ++j)
            r.at(i, x.cols + j) = y.at(i, j);
    }
    return r;
}

} // namespace ordforms
