#pragma once

#include "coeff.hpp"

#include <cstdint>
#include <map>

namespace ordforms {

/* Degree-1 compactly supported cohomology of the open modular curve of
   a torsion-free level group, presented by coset symbols.

   A generator (i, m) stands for the geodesic path g_i{0,oo} carrying the
   constant coefficient section e_m, where g_i is the fixed lift of coset
   i.  The presentation imposes, for every unimodular u and coefficient w,

     [u, w] + [u*sigma, w] = 0,
     [u, w] + [u*tau, w] + [u*tau^2, w] = 0,

   written out on the fixed lifts via coefficient transport by group
   elements g_j h^{-1} only.  Relations with a unit pivot are eliminated
   by substitution (deterministic: largest generator index with a unit
   coefficient); the leftover rows form the residual module, and the
   quotient is (free module on the surviving generators) / residual. */
class ManinSpace {
    using u32 = std::uint32_t;

public:
    explicit ManinSpace(const LevelDatum& lvl, const CoeffModule& coeff, bool reverse_order = false)
        : lvl_(lvl), coeff_(coeff), ctx_(coeff.ctx()), table_(coset_table(lvl))
    {
        if (!table_->torsion_free())
            throw InvalidSpecError("space: level group has torsion (neatness surrogate fails)");
        dim_ = coeff_.dim();
        ngens_ = table_->size() * dim_;
        state_.assign(ngens_, kUndecided);

        const Mat2 sigma_inv = kSigma.inv_unimodular();
        const Mat2 tau2 = kTau.mul(kTau);
        std::vector<std::size_t> order(table_->size());
        std::iota(order.begin(), order.end(), 0);
        if (reverse_order)
            std::reverse(order.begin(), order.end());
        for (std::size_t i : order) {
            const Mat2& gi = table_->rep(i);
            std::size_t j = table_->act(i, kSigma);
            // transport: coefficient of the second term is act(g_j sigma^-1 g_i^-1)
            MatrixOk B = coeff_.act(table_->rep(j).mul(sigma_inv).mul(gi.inv_unimodular()));
            for (std::size_t m = 0; m < dim_; ++m) {
                std::map<u32, u64> row;
                add_term(row, gen_index(i, m), 1 % ctx_.q);
                for (std::size_t m2 = 0; m2 < dim_; ++m2)
                    add_term(row, gen_index(j, m2), B.at(m2, m));
                process_relation(row);
            }
        }
        for (std::size_t i : order) {
            const Mat2& gi = table_->rep(i);
            std::size_t j1 = table_->act(i, kTau);
            std::size_t j2 = table_->act(i, tau2);
            MatrixOk B1 = coeff_.act(table_->rep(j1).mul(kTau.inv_unimodular()).mul(gi.inv_unimodular()));
            MatrixOk B2 = coeff_.act(table_->rep(j2).mul(tau2.inv_unimodular()).mul(gi.inv_unimodular()));
            for (std::size_t m = 0; m < dim_; ++m) {
                std::map<u32, u64> row;
                add_term(row, gen_index(i, m), 1 % ctx_.q);
                for (std::size_t m2 = 0; m2 < dim_; ++m2) {
                    add_term(row, gen_index(j1, m2), B1.at(m2, m));
                    add_term(row, gen_index(j2, m2), B2.at(m2, m));
                }
                process_relation(row);
            }
        }
        finalize();
    }

    const LevelDatum& level() const { return lvl_; }
    const CoeffModule& coeff() const { return coeff_; }
    ModulusContext ctx() const { return ctx_; }
    const CosetTable& table() const { return *table_; }
    std::size_t coeff_dim() const { return dim_; }
    std::size_t num_gens() const { return ngens_; }
    std::size_t gen_index(std::size_t coset, std::size_t m) const { return coset * dim_ + m; }
    std::pair<std::size_t, std::size_t> gen_split(std::size_t g) const { return {g / dim_, g % dim_}; }

    std::size_t free_dim() const { return free_gens_.size(); }
    const std::vector<u32>& free_gens() const { return free_gens_; }
    const Submodule& residual() const { return residual_; }

    /* Substitute eliminated generators, landing in free coordinates. */
    std::vector<u64> project_raw(const std::map<u32, u64>& raw) const
    {
        std::vector<u64> v(free_dim(), 0);
        for (auto [g, c] : raw) {
            if (!c)
                continue;
            if (state_[g] == kFree) {
                std::size_t f = free_index_[g];
                v[f] = ctx_.add(v[f], c);
            } else {
                for (auto [f, e] : final_expr_[(std::size_t)state_[g]])
                    v[f] = ctx_.add(v[f], ctx_.mul(c, e));
            }
        }
        return v;
    }

    /* Canonical representative modulo the residual relations. */
    std::vector<u64> canonical(std::vector<u64> freevec) const { return residual_.reduce(std::move(freevec)); }

    std::vector<u64> canonical_raw(const std::map<u32, u64>& raw) const { return canonical(project_raw(raw)); }

    bool same_class(const std::vector<u64>& a, const std::vector<u64>& b) const
    {
        return canonical(a) == canonical(b);
    }

    /* Ascending exponents e with quotient isomorphic to the direct sum
       of Z/p^e; e = k summands are free. */
    std::vector<unsigned> quotient_profile() const
    {
        std::vector<unsigned> prof;
        if (residual_.num_generators() == 0) {
            prof.assign(free_dim(), ctx_.k);
            return prof;
        }
        SmithForm s = smith(residual_.generator_matrix());
        for (std::size_t i = 0; i < free_dim(); ++i) {
            unsigned e = s.cokernel_exponent(i);
            if (e > 0)
                prof.push_back(e);
        }
        std::sort(prof.begin(), prof.end());
        return prof;
    }

    std::size_t free_rank() const
    {
        auto prof = quotient_profile();
        return (std::size_t)std::count(prof.begin(), prof.end(), ctx_.k);
    }

    /* Path u{0,oo} with constant coefficient w, accumulated as symbols. */
    void accumulate_path(const Mat2& u, const std::vector<u64>& w, bool negate,
                         std::map<u32, u64>& acc) const
    {
        accumulate_cusp_chain(u.a, u.c, w, negate, acc);
        accumulate_cusp_chain(u.b, u.d, w, !negate, acc);
    }

    /* All coset symbols of one generator as an accumulator (identity op). */
    std::map<u32, u64> raw_gen(std::size_t g) const
    {
        std::map<u32, u64> acc;
        acc[(u32)g] = 1 % ctx_.q;
        return acc;
    }

private:
    static constexpr std::int32_t kUndecided = -1;
    static constexpr std::int32_t kFree = -2;

    LevelDatum lvl_;
    CoeffModule coeff_;
    ModulusContext ctx_;
    std::shared_ptr<const CosetTable> table_;
    std::size_t dim_ = 0, ngens_ = 0;

    std::vector<std::int32_t> state_; // kUndecided/kFree or expression id
    std::vector<std::vector<std::pair<u32, u64>>> exprs_; // creation-ordered, over gen ids
    std::vector<u32> expr_gen_;
    std::vector<std::map<u32, u64>> deferred_;
    std::vector<u32> free_gens_;
    std::vector<u32> free_index_;
    std::vector<std::vector<std::pair<u32, u64>>> final_expr_; // over free ids
    Submodule residual_;

    void add_term(std::map<u32, u64>& row, std::size_t g, u64 c) const
    {
        if (!c)
            return;
        auto [it, fresh] = row.emplace((u32)g, c);
        if (!fresh) {
            it->second = ctx_.add(it->second, c);
            if (!it->second)
                row.erase(it);
        }
    }

    /* Expand eliminated generators until the row only references
       still-undecided ones. */
    void substitute(std::map<u32, u64>& row) const
    {
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto it = row.begin(); it != row.end();) {
                if (state_[it->first] >= 0) {
                    u64 c = it->second;
                    const auto& ex = exprs_[(std::size_t)state_[it->first]];
                    it = row.erase(it);
                    for (auto [g2, c2] : ex) {
                        u64 prod = ctx_.mul(c, c2);
                        if (!prod)
                            continue;
                        auto [it2, fresh] = row.emplace(g2, prod);
                        if (!fresh) {
                            it2->second = ctx_.add(it2->second, prod);
                            if (!it2->second)
                                row.erase(it2);
                        }
                    }
                    changed = true;
                    break;
                }
                ++it;
            }
        }
    }

    void process_relation(std::map<u32, u64> row)
    {
        substitute(row);
        if (row.empty())
            return;
        // pivot: largest generator index with a unit coefficient
        auto pivot = row.rend();
        for (auto it = row.rbegin(); it != row.rend(); ++it) {
            if (ctx_.is_unit(it->second)) {
                pivot = it;
                break;
            }
        }
        if (pivot == row.rend()) {
            deferred_.push_back(std::move(row));
            return;
        }
        u32 g = pivot->first;
        u64 cinv = ctx_.inv(pivot->second);
        std::vector<std::pair<u32, u64>> expr;
        for (auto [g2, c2] : row) {
            if (g2 == g)
                continue;
            u64 e = ctx_.neg(ctx_.mul(cinv, c2));
            if (e)
                expr.emplace_back(g2, e);
        }
        state_[g] = (std::int32_t)exprs_.size();
        exprs_.push_back(std::move(expr));
        expr_gen_.push_back(g);
    }

    void finalize()
    {
        free_index_.assign(ngens_, 0);
        for (std::size_t g = 0; g < ngens_; ++g) {
            if (state_[g] == kUndecided) {
                state_[g] = kFree;
                free_index_[g] = (u32)free_gens_.size();
                free_gens_.push_back((u32)g);
            }
        }
        /* Expressions reference only generators eliminated later (or
           free), so one reverse pass fully resolves them. */
        final_expr_.assign(exprs_.size(), {});
        for (std::size_t e = exprs_.size(); e-- > 0;) {
            std::map<u32, u64> acc; // over free ids
            for (auto [g, c] : exprs_[e]) {
                if (state_[g] == kFree) {
                    u32 f = free_index_[g];
                    auto [it, fresh] = acc.emplace(f, c);
                    if (!fresh) {
                        it->second = ctx_.add(it->second, c);
                        if (!it->second)
                            acc.erase(it);
                    }
                } else {
                    for (auto [f, c2] : final_expr_[(std::size_t)state_[g]]) {
                        u64 prod = ctx_.mul(c, c2);
                        if (!prod)
                            continue;
                        auto [it, fresh] = acc.emplace(f, prod);
                        if (!fresh) {
                            it->second = ctx_.add(it->second, prod);
                            if (!it->second)
                                acc.erase(it);
                        }
                    }
                }
            }
            final_expr_[e].assign(acc.begin(), acc.end());
            exprs_[e].clear();
            exprs_[e].shrink_to_fit();
        }
        std::vector<std::vector<u64>> res_rows;
        for (const auto& row : deferred_) {
            std::vector<u64> v(free_dim(), 0);
            for (auto [g, c] : row) {
                if (state_[g] == kFree) {
                    u32 f = free_index_[g];
                    v[f] = ctx_.add(v[f], c);
                } else {
                    for (auto [f, c2] : final_expr_[(std::size_t)state_[g]])
                        v[f] = ctx_.add(v[f], ctx_.mul(c, c2));
                }
            }
            res_rows.push_back(std::move(v));
        }
        deferred_.clear();
        residual_ = Submodule::span(ctx_, free_dim(), std::move(res_rows));
    }

    static i64 floordiv(i64 a, i64 b)
    {
        i64 q0 = a / b, r0 = a % b;
        return (r0 != 0 && ((r0 < 0) != (b < 0))) ? q0 - 1 : q0;
    }

    /* {oo, n/d} as a chain of unimodular paths via convergents. */
    void accumulate_cusp_chain(i64 n, i64 d, const std::vector<u64>& w, bool negate,
                               std::map<u32, u64>& acc) const
    {
        if (d == 0)
            return;
        i64 g = gcd_i64(n, d);
        n /= g;
        d /= g;
        if (d < 0) {
            n = -n;
            d = -d;
        }
        i64 pm2 = 0, qm2 = 1; // p_{-2}, q_{-2}
        i64 pm1 = 1, qm1 = 0; // p_{-1}, q_{-1}
        std::size_t j = 0;
        while (true) {
            i64 a = floordiv(n, d);
            i64 pj = a * pm1 + pm2;
            i64 qj = a * qm1 + qm2;
            i64 sgn = (j % 2 == 0) ? -1 : 1; // (-1)^(j-1)
            Mat2 h{sgn * pj, pm1, sgn * qj, qm1};
            assert(h.det() == 1);
            add_symbol(h, w, negate, acc);
            i64 rem = n - a * d;
            if (rem == 0)
                break;
            n = d;
            d = rem;
            pm2 = pm1;
            pm1 = pj;
            qm2 = qm1;
            qm1 = qj;
            ++j;
        }
    }

    void add_symbol(const Mat2& h, const std::vector<u64>& w, bool negate, std::map<u32, u64>& acc) const
    {
        std::size_t j = table_->coset_of(h);
        MatrixOk B = coeff_.act(table_->rep(j).mul(h.inv_unimodular()));
        std::vector<u64> m = mul_vec(B, w);
        for (std::size_t t = 0; t < dim_; ++t) {
            if (!m[t])
                continue;
            u64 c = negate ? ctx_.neg(m[t]) : m[t];
            std::size_t g = gen_index(j, t);
            auto [it, fresh] = acc.emplace((u32)g, c);
            if (!fresh) {
                it->second = ctx_.add(it->second, c);
                if (!it->second)
                    acc.erase(it);
            }
        }
    }
};

} // namespace ordforms
