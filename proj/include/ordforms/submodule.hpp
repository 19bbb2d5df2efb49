#pragma once

#include "smith.hpp"

#include <algorithm>

namespace ordforms {

/* A submodule of (Z/p^k)^n in Howell normal form.  The basis rows have
   strictly increasing leading columns, each pivot is a power of p, every
   entry in a pivot column is reduced modulo that pivot, and p^(k-a) times
   a row with pivot p^a lies in the span of the later rows.  The form is
   unique per submodule, so equality and membership are syntactic. */
class Submodule {
public:
    Submodule() = default;
    Submodule(ModulusContext c, std::size_t ambient) : ctx_(c), n_(ambient) {}

    static Submodule zero(ModulusContext c, std::size_t ambient) { return Submodule(c, ambient); }

    static Submodule full(ModulusContext c, std::size_t ambient)
    {
        Submodule s(c, ambient);
        for (std::size_t i = 0; i < ambient; ++i) {
            std::vector<u64> e(ambient, 0);
            e[i] = 1 % c.q;
            s.insert_reduce(std::move(e));
        }
        s.finalize();
        return s;
    }

    static Submodule span(ModulusContext c, std::size_t ambient, std::vector<std::vector<u64>> gens)
    {
        Submodule s(c, ambient);
        for (auto& g : gens) {
            if (g.size() != ambient)
                throw InvalidSpecError("submodule: generator has wrong length");
            for (auto& x : g)
                x %= c.q;
            s.insert_reduce(std::move(g));
        }
        s.finalize();
        return s;
    }

    /* Span of the columns of m. */
    static Submodule image(const MatrixOk& m)
    {
        std::vector<std::vector<u64>> gens(m.cols, std::vector<u64>(m.rows));
        for (std::size_t j = 0; j < m.cols; ++j)
            for (std::size_t i = 0; i < m.rows; ++i)
                gens[j][i] = m.at(i, j);
        return span(m.ctx, m.rows, std::move(gens));
    }

    static Submodule kernel(const MatrixOk& m)
    {
        SmithForm s = smith(m);
        std::vector<std::vector<u64>> gens;
        for (std::size_t j = 0; j < m.cols; ++j) {
            unsigned a = j < s.diag.size() ? s.diag[j] : 0;
            // annihilator of p^a is p^(k-a); a == 0 contributes nothing
            if (j < s.diag.size() && a == 0)
                continue;
            u64 cgen = j < s.diag.size() ? m.ctx.pow_p(m.ctx.k - a) : 1 % m.ctx.q;
            std::vector<u64> g(m.cols, 0);
            for (std::size_t i = 0; i < m.cols; ++i)
                g[i] = m.ctx.mul(s.right.at(i, j), cgen);
            gens.push_back(std::move(g));
        }
        return span(m.ctx, m.cols, std::move(gens));
    }

    ModulusContext ctx() const { return ctx_; }
    std::size_t ambient_rank() const { return n_; }
    std::size_t num_generators() const { return rows_.size(); }
    const std::vector<std::vector<u64>>& basis_rows() const { return rows_; }

    bool operator==(const Submodule& o) const
    {
        return ctx_ == o.ctx_ && n_ == o.n_ && rows_ == o.rows_;
    }
    bool operator!=(const Submodule& o) const { return !(*this == o); }

    bool is_zero() const { return rows_.empty(); }

    /* n x r matrix whose columns are the canonical generators. */
    MatrixOk generator_matrix() const
    {
        MatrixOk g(ctx_, n_, rows_.size());
        for (std::size_t j = 0; j < rows_.size(); ++j)
            for (std::size_t i = 0; i < n_; ++i)
                g.at(i, j) = rows_[j][i];
        return g;
    }

    /* Canonical coset representative: entries at pivot columns reduced
       modulo the pivot. */
    std::vector<u64> reduce(std::vector<u64> v) const
    {
        assert(v.size() == n_);
        for (auto& x : v)
            x %= ctx_.q;
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            std::size_t j = lead_[r];
            unsigned a = val_[r];
            u64 piv = ctx_.pow_p_int(a);
            u64 c = v[j] / piv;
            if (c) {
                for (std::size_t t = j; t < n_; ++t)
                    v[t] = ctx_.sub(v[t], ctx_.mul(c, rows_[r][t]));
            }
        }
        return v;
    }

    bool contains(const std::vector<u64>& v) const
    {
        auto r = reduce(v);
        return std::all_of(r.begin(), r.end(), [](u64 x) { return x == 0; });
    }

    bool contains(const Submodule& other) const
    {
        if (other.n_ != n_)
            return false;
        for (const auto& r : other.rows_)
            if (!contains(r))
                return false;
        return true;
    }

    /* log_p of the cardinality. */
    unsigned size_log_p() const
    {
        unsigned s = 0;
        for (unsigned a : val_)
            s += ctx_.k - a;
        return s;
    }

    /* Exponents of the Smith divisors of the generator matrix, one per
       generator; the module is isomorphic to the direct sum of p^a * O_k
       over these a.  Zero exponents count the free rank. */
    std::vector<unsigned> divisor_exponents() const
    {
        if (rows_.empty())
            return {};
        SmithForm s = smith(generator_matrix());
        std::vector<unsigned> r;
        for (unsigned a : s.diag)
            if (a < ctx_.k)
                r.push_back(a);
        return r;
    }

    std::size_t free_rank() const
    {
        auto d = divisor_exponents();
        return (std::size_t)std::count(d.begin(), d.end(), 0u);
    }

    Submodule reduced(unsigned k2) const
    {
        ModulusContext c2 = ctx_.lowered(k2);
        std::vector<std::vector<u64>> gens;
        for (const auto& r : rows_) {
            std::vector<u64> g(n_);
            for (std::size_t i = 0; i < n_; ++i)
                g[i] = r[i] % c2.q;
            gens.push_back(std::move(g));
        }
        return span(c2, n_, std::move(gens));
    }

private:
    ModulusContext ctx_;
    std::size_t n_ = 0;
    std::vector<std::vector<u64>> rows_; // sorted by leading column
    std::vector<std::size_t> lead_;
    std::vector<unsigned> val_;

    static std::size_t leading(const std::vector<u64>& v)
    {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i])
                return i;
        return v.size();
    }

    /* Reduce v against the current basis; insert if a new pivot appears,
       swapping when v carries a smaller valuation at an existing pivot.
       Displaced or saturated rows go back through the same path. */
    void insert_reduce(std::vector<u64> v)
    {
        std::vector<std::vector<u64>> queue;
        queue.push_back(std::move(v));
        while (!queue.empty()) {
            std::vector<u64> w = std::move(queue.back());
            queue.pop_back();
            std::size_t j = leading(w);
            while (j < n_) {
                auto it = std::lower_bound(lead_.begin(), lead_.end(), j);
                std::size_t pos = (std::size_t)(it - lead_.begin());
                if (it == lead_.end() || *it != j) {
                    // new pivot column
                    unsigned a = ctx_.val(w[j]);
                    u64 uinv = ctx_.inv(ctx_.unit_part(w[j]));
                    for (std::size_t t = j; t < n_; ++t)
                        w[t] = ctx_.mul(w[t], uinv);
                    rows_.insert(rows_.begin() + pos, w);
                    lead_.insert(lead_.begin() + pos, j);
                    val_.insert(val_.begin() + pos, a);
                    if (a > 0) {
                        // saturation row for the Howell property
                        std::vector<u64> sat(n_, 0);
                        u64 c = ctx_.pow_p(ctx_.k - a);
                        for (std::size_t t = j; t < n_; ++t)
                            sat[t] = ctx_.mul(w[t], c);
                        queue.push_back(std::move(sat));
                    }
                    break;
                }
                unsigned a = val_[pos];
                unsigned b = ctx_.val(w[j]);
                if (b >= a) {
                    u64 c = w[j] / ctx_.pow_p_int(a);
                    for (std::size_t t = j; t < n_; ++t)
                        w[t] = ctx_.sub(w[t], ctx_.mul(c, rows_[pos][t]));
                } else {
                    // w becomes the new, sharper pivot row
                    u64 uinv = ctx_.inv(ctx_.unit_part(w[j]));
                    for (std::size_t t = j; t < n_; ++t)
                        w[t] = ctx_.mul(w[t], uinv);
                    std::swap(rows_[pos], w);
                    val_[pos] = b;
                    if (b > 0) {
                        std::vector<u64> sat(n_, 0);
                        u64 c = ctx_.pow_p(ctx_.k - b);
                        for (std::size_t t = j; t < n_; ++t)
                            sat[t] = ctx_.mul(rows_[pos][t], c);
                        queue.push_back(std::move(sat));
                    }
                }
                j = leading(w);
            }
        }
    }

    /* Reduce entries above each pivot modulo the pivot. */
    void finalize()
    {
        for (std::size_t l = rows_.size(); l-- > 0;) {
            std::size_t j = lead_[l];
            u64 piv = ctx_.pow_p_int(val_[l]);
            for (std::size_t i = 0; i < l; ++i) {
                u64 c = rows_[i][j] / piv;
                if (c)
                    for (std::size_t t = j; t < n_; ++t)
                        rows_[i][t] = ctx_.sub(rows_[i][t], ctx_.mul(c, rows_[l][t]));
            }
        }
    }

    friend Submodule sum(const Submodule&, const Submodule&);
};

inline Submodule sum(const Submodule& a, const Submodule& b)
{
    if (a.ctx() != b.ctx() || a.ambient_rank() != b.ambient_rank())
        throw InvalidSpecError("submodule sum: ambient mismatch");
    std::vector<std::vector<u64>> gens = a.basis_rows();
    for (const auto& r : b.basis_rows())
        gens.push_back(r);
    return Submodule::span(a.ctx(), a.ambient_rank(), std::move(gens));
}

inline Submodule intersect(const Submodule& a, const Submodule& b)
{
    if (a.ctx() != b.ctx() || a.ambient_rank() != b.ambient_rank())
        throw InvalidSpecError("submodule intersect: ambient mismatch");
    const ModulusContext ctx = a.ctx();
    MatrixOk A = a.generator_matrix(), B = b.generator_matrix();
    if (A.cols == 0 || B.cols == 0)
        return Submodule::zero(ctx, a.ambient_rank());
    MatrixOk AB = hconcat(A, scale(B, ctx.neg(1 % ctx.q)));
    Submodule ker = Submodule::kernel(AB);
    std::vector<std::vector<u64>> gens;
    for (const auto& kr : ker.basis_rows()) {
        std::vector<u64> x(A.cols);
        for (std::size_t i = 0; i < A.cols; ++i)
            x[i] = kr[i];
        std::vector<u64> g = mul_vec(A, x);
        gens.push_back(std::move(g));
    }
    return Submodule::span(ctx, a.ambient_rank(), std::move(gens));
}

/* Apply a matrix to a submodule: span of m * gens. */
inline Submodule apply(const MatrixOk& m, const Submodule& s)
{
    assert(m.cols == s.ambient_rank());
    std::vector<std::vector<u64>> gens;
    for (const auto& r : s.basis_rows())
        gens.push_back(mul_vec(m, r));
    return Submodule::span(m.ctx, m.rows, std::move(gens));
}

/* Presentation of a/b for b contained in a: Smith form of the relation
   matrix on the canonical generators of a.  The quotient is the direct
   sum of Z/p^(c_i) over the cokernel exponents c_i. */
inline SmithForm quotient_presentation(const Submodule& a, const Submodule& b)
{
    if (a.ctx() != b.ctx() || a.ambient_rank() != b.ambient_rank())
        throw InvalidSpecError("quotient: ambient mismatch");
    if (!a.contains(b))
        throw InvalidSpecError("quotient: second module is not contained in the first");
    const ModulusContext ctx = a.ctx();
    MatrixOk A = a.generator_matrix();
    const std::size_t r = A.cols;
    Submodule kerA = r ? Submodule::kernel(A) : Submodule::zero(ctx, 0);
    MatrixOk B = b.generator_matrix();
    std::size_t cols = kerA.num_generators() + B.cols;
    MatrixOk K(ctx, r, std::max(cols, r));
    std::size_t c = 0;
    for (const auto& kr : kerA.basis_rows()) {
        for (std::size_t i = 0; i < r; ++i)
            K.at(i, c) = kr[i];
        ++c;
    }
    if (B.cols) {
        auto X = solve(A, B);
        if (!X)
            throw std::logic_error("quotient: containment held but lift failed");
        for (std::size_t j = 0; j < B.cols; ++j, ++c)
            for (std::size_t i = 0; i < r; ++i)
                K.at(i, c) = X->at(i, j);
    }
    return smith(K);
}

/* Greedy minimal generating set (Nakayama: g is kept unless it lies in
   the span of the kept ones plus p*M). */
inline std::vector<std::vector<u64>> minimal_generators(const Submodule& m)
{
    const ModulusContext ctx = m.ctx();
    std::vector<std::vector<u64>> pm;
    for (const auto& r : m.basis_rows()) {
        std::vector<u64> g(r.size());
        for (std::size_t i = 0; i < r.size(); ++i)
            g[i] = ctx.mul(r[i], ctx.reduce(ctx.p));
        pm.push_back(std::move(g));
    }
    Submodule spanned = Submodule::span(ctx, m.ambient_rank(), pm);
    std::vector<std::vector<u64>> kept;
    for (const auto& r : m.basis_rows()) {
        if (!spanned.contains(r)) {
            kept.push_back(r);
            auto gens = spanned.basis_rows();
            gens.push_back(r);
            spanned = Submodule::span(ctx, m.ambient_rank(), std::move(gens));
        }
    }
    return kept;
}

struct StableChain {
    unsigned stabilization_index = 0;
    Submodule stable;
};

/* Smallest m with im(t^m) == im(t^(m+1)); the chain is strictly
   decreasing before that, so m <= n*k. */
inline StableChain stable_image_chain(const MatrixOk& t)
{
    assert(t.rows == t.cols);
    const unsigned bound = (unsigned)t.rows * t.ctx.k;
    Submodule prev = Submodule::full(t.ctx, t.rows);
    MatrixOk gens = MatrixOk::identity(t.ctx, t.rows);
    for (unsigned m = 0;; ++m) {
        MatrixOk next_gens = mul(t, gens);
        Submodule next = Submodule::image(next_gens);
        if (next == prev)
            return {m, prev};
        if (m > bound)
            throw std::logic_error("image chain failed to stabilize within n*k steps");
        prev = std::move(next);
        gens = std::move(next_gens);
    }
}

/* Mirror for kernels of powers. */
inline StableChain stable_kernel_chain(const MatrixOk& t)
{
    assert(t.rows == t.cols);
    const unsigned bound = (unsigned)t.rows * t.ctx.k;
    Submodule prev = Submodule::zero(t.ctx, t.rows);
    MatrixOk power = MatrixOk::identity(t.ctx, t.rows);
    for (unsigned m = 0;; ++m) {
        MatrixOk next_power = mul(t, power);
        Submodule next = Submodule::kernel(next_power);
        if (next == prev)
            return {m, prev};
        if (m > bound)
            throw std::logic_error("kernel chain failed to stabilize within n*k steps");
        prev = std::move(next);
        power = std::move(next_power);
    }
}

} // namespace ordforms
