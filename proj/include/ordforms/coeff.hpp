#pragma once

#include "levels.hpp"
#include "submodule.hpp"
#include "zmodpk.hpp"

namespace ordforms {

/* Coefficient systems for the symbol spaces.

   Weight w >= 2 acts on Sym^(w-2) of the standard lattice with basis
   X^i Y^(w-2-i), i = 0..w-2, by (g.P)(X,Y) = P(aX+cY, bX+dY) for
   g = [[a,b],[c,d]].  Under this convention the upper-unipotent
   invariants are the line spanned by X^(w-2), diag(1,p) fixes that line
   pointwise, and the standard degree-p Hecke representatives act
   integrally.  Changing the convention invalidates all three facts, so
   they are asserted at construction.

   WeightLine is the invariant line itself and WeightQuot the quotient
   by it; their actions are only defined for matrices whose lower-left
   entry is divisible by p^k, which is exactly the depth at which they
   are used. */
class CoeffModule {
public:
    enum class Kind { Trivial, Weight, WeightLine, WeightQuot, DirectSum };

    static CoeffModule trivial(ModulusContext ctx)
    {
        CoeffModule c;
        c.kind_ = Kind::Trivial;
        c.ctx_ = ctx;
        c.weight_ = 2;
        return c;
    }

    static CoeffModule weight(ModulusContext ctx, unsigned w)
    {
        CoeffModule c;
        c.kind_ = w == 2 ? Kind::Trivial : Kind::Weight;
        c.ctx_ = ctx;
        c.weight_ = w;
        c.validate_weight();
        return c;
    }

    static CoeffModule weight_line(ModulusContext ctx, unsigned w)
    {
        if (w == 2)
            return trivial(ctx);
        CoeffModule c;
        c.kind_ = Kind::WeightLine;
        c.ctx_ = ctx;
        c.weight_ = w;
        c.validate_weight();
        return c;
    }

    static CoeffModule weight_quotient(ModulusContext ctx, unsigned w)
    {
        if (w == 2)
            throw InvalidSpecError("coeff: weight 2 has no quotient piece");
        CoeffModule c;
        c.kind_ = Kind::WeightQuot;
        c.ctx_ = ctx;
        c.weight_ = w;
        c.validate_weight();
        return c;
    }

    static CoeffModule direct_sum(const CoeffModule& a, const CoeffModule& b)
    {
        if (a.ctx_ != b.ctx_)
            throw InvalidSpecError("coeff: direct sum over different moduli");
        CoeffModule c;
        c.kind_ = Kind::DirectSum;
        c.ctx_ = a.ctx_;
        c.weight_ = 2;
        c.parts_ = {std::make_shared<CoeffModule>(a), std::make_shared<CoeffModule>(b)};
        return c;
    }

    Kind kind() const { return kind_; }
    ModulusContext ctx() const { return ctx_; }
    unsigned weight() const { return weight_; }

    std::size_t dim() const
    {
        switch (kind_) {
        case Kind::Trivial: return 1;
        case Kind::Weight: return weight_ - 1;
        case Kind::WeightLine: return 1;
        case Kind::WeightQuot: return weight_ - 2;
        case Kind::DirectSum: return parts_[0]->dim() + parts_[1]->dim();
        }
        return 0;
    }

    std::string key() const
    {
        switch (kind_) {
        case Kind::Trivial: return "triv";
        case Kind::Weight: return "w" + std::to_string(weight_);
        case Kind::WeightLine: return "w" + std::to_string(weight_) + "line";
        case Kind::WeightQuot: return "w" + std::to_string(weight_) + "quot";
        case Kind::DirectSum: return "sum(" + parts_[0]->key() + "," + parts_[1]->key() + ")";
        }
        return "?";
    }

    bool operator==(const CoeffModule& o) const { return key() == o.key() && ctx_ == o.ctx_; }

    /* Action matrix of an integral 2x2 matrix with positive determinant. */
    MatrixOk act(const Mat2& g) const
    {
        switch (kind_) {
        case Kind::Trivial:
            return MatrixOk::identity(ctx_, 1);
        case Kind::Weight:
            return sym_action(g);
        case Kind::WeightLine: {
            guard_line_stable(g);
            MatrixOk m(ctx_, 1, 1);
            m.at(0, 0) = powmod(ctx_.reduce_signed(g.a), weight_ - 2, ctx_.q);
            return m;
        }
        case Kind::WeightQuot: {
            guard_line_stable(g);
            MatrixOk full = sym_action(g);
            MatrixOk m(ctx_, weight_ - 2, weight_ - 2);
            for (std::size_t i = 0; i + 1 < weight_ - 1; ++i)
                for (std::size_t j = 0; j + 1 < weight_ - 1; ++j)
                    m.at(i, j) = full.at(i, j);
            return m;
        }
        case Kind::DirectSum: {
            MatrixOk a = parts_[0]->act(g), b = parts_[1]->act(g);
            MatrixOk m(ctx_, dim(), dim());
            for (std::size_t i = 0; i < a.rows; ++i)
                for (std::size_t j = 0; j < a.cols; ++j)
                    m.at(i, j) = a.at(i, j);
            for (std::size_t i = 0; i < b.rows; ++i)
                for (std::size_t j = 0; j < b.cols; ++j)
                    m.at(a.rows + i, a.cols + j) = b.at(i, j);
            return m;
        }
        }
        throw std::logic_error("coeff: bad kind");
    }

private:
    Kind kind_ = Kind::Trivial;
    ModulusContext ctx_;
    unsigned weight_ = 2;
    std::vector<std::shared_ptr<CoeffModule>> parts_;

    void validate_weight() const
    {
        if (weight_ < 2)
            throw InvalidSpecError("coeff: weight must be >= 2");
        if (weight_ - 2 >= ctx_.p)
            throw InvalidSpecError("coeff: weight " + std::to_string(weight_) +
                                   " violates the invariant-line assertion at p = " +
                                   std::to_string(ctx_.p) +
                                   " (upper-unipotent invariants exceed the top line)");
        if (kind_ == Kind::Weight) {
            // invariants of [[1,1],[0,1]] are exactly the top-monomial line
            MatrixOk u = sym_action(Mat2{1, 1, 0, 1});
            MatrixOk d = sub(u, MatrixOk::identity(ctx_, weight_ - 1));
            std::vector<u64> line(weight_ - 1, 0);
            line[weight_ - 2] = 1 % ctx_.q;
            if (Submodule::kernel(d) != Submodule::span(ctx_, weight_ - 1, {line}))
                throw std::logic_error("coeff: unipotent invariants are not the top line");
            // diag(1,p) fixes the top monomial pointwise
            MatrixOk t = sym_action(Mat2{1, 0, 0, (i64)ctx_.p});
            for (std::size_t i = 0; i < t.rows; ++i)
                if (t.at(i, weight_ - 2) != (i == weight_ - 2 ? 1 % ctx_.q : 0))
                    throw std::logic_error("coeff: diag(1,p) does not fix the top line");
        }
    }

    void guard_line_stable(const Mat2& g) const
    {
        i64 c = g.c;
        if (c < 0)
            c = -c;
        if (c % (i64)ctx_.q != 0)
            throw std::logic_error("coeff: line/quotient action undefined at this depth "
                                   "(lower-left entry not divisible by p^k)");
    }

    MatrixOk sym_action(const Mat2& g) const
    {
        const unsigned m = weight_ - 2;
        const std::size_t d = m + 1;
        u64 a = ctx_.reduce_signed(g.a), b = ctx_.reduce_signed(g.b);
        u64 c = ctx_.reduce_signed(g.c), dd = ctx_.reduce_signed(g.d);
        // binomial table
        std::vector<std::vector<u64>> binom(d, std::vector<u64>(d, 0));
        for (unsigned i = 0; i < d; ++i) {
            binom[i][0] = 1 % ctx_.q;
            for (unsigned j = 1; j <= i; ++j)
                binom[i][j] = ctx_.add(binom[i - 1][j - 1], j < i ? binom[i - 1][j] : 0);
        }
        auto powv = [&](u64 x, unsigned e) { return powmod(x, e, ctx_.q); };
        MatrixOk S(ctx_, d, d);
        for (unsigned i = 0; i <= m; ++i) {
            // g . X^i Y^(m-i) = (aX + cY)^i (bX + dY)^(m-i)
            for (unsigned u = 0; u <= i; ++u)
                for (unsigned v = 0; v <= m - i; ++v) {
                    unsigned j = u + v;
                    u64 t = ctx_.mul(binom[i][u], binom[m - i][v]);
                    t = ctx_.mul(t, ctx_.mul(powv(a, u), powv(c, i - u)));
                    t = ctx_.mul(t, ctx_.mul(powv(b, v), powv(dd, m - i - v)));
                    S.at(j, i) = ctx_.add(S.at(j, i), t);
                }
        }
        return S;
    }
};

} // namespace ordforms
