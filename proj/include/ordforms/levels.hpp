#pragma once

#include "common.hpp"

#include <cassert>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <tuple>
#include <vector>

namespace ordforms {

/* 2x2 integer matrices, enough for SL2(Z) words, Hecke representatives
   and continued-fraction chains. */
struct Mat2 {
    i64 a = 1, b = 0, c = 0, d = 1;

    static Mat2 id() { return {1, 0, 0, 1}; }
    i64 det() const { return a * d - b * c; }
    Mat2 mul(const Mat2& o) const
    {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    /* inverse for det == 1 */
    Mat2 inv_unimodular() const
    {
        assert(det() == 1);
        return {d, -b, -c, a};
    }
    bool operator==(const Mat2& o) const { return a == o.a && b == o.b && c == o.c && d == o.d; }
};

inline const Mat2 kSigma{0, -1, 1, 0};  // order 4, z -> -1/z
inline const Mat2 kTau{0, -1, 1, -1};   // order 3 in SL2(Z)
inline const Mat2 kT{1, 1, 0, 1};       // z -> z + 1
inline const Mat2 kMinusId{-1, 0, 0, -1};

/* Level datum (N; p, r, s): tame level N coprime to p, Iwahori depth r
   (lower-left entry divisible by p^r) and torus depth s (diagonal
   congruent to 1 mod p^s).  The attached congruence subgroup is

     Gamma(N,p,r,s) = { [[a,b],[c,d]] in SL2(Z) :
                        a = d = 1 (N), c = 0 (N p^r), d = 1 (p^s) }.
*/
struct LevelDatum {
    u64 N = 1;
    u64 p = 2;
    unsigned r = 1;
    unsigned s = 0;

    LevelDatum() = default;
    LevelDatum(u64 N_, u64 p_, unsigned r_, unsigned s_) : N(N_), p(p_), r(r_), s(s_)
    {
        if (N < 1)
            throw InvalidSpecError("level: N must be >= 1");
        if (!is_prime_u64(p))
            throw InvalidSpecError("level: p must be prime");
        if (N % p == 0)
            throw InvalidSpecError("level: N must be coprime to p");
        if (s > r)
            throw InvalidSpecError("level: torus depth s must satisfy s <= r");
    }

    bool operator==(const LevelDatum& o) const { return N == o.N && p == o.p && r == o.r && s == o.s; }
    bool operator<(const LevelDatum& o) const
    {
        return std::tie(N, p, r, s) < std::tie(o.N, o.p, o.r, o.s);
    }

    u64 p_pow(unsigned e) const
    {
        u64 x = 1;
        for (unsigned i = 0; i < e; ++i)
            x *= p;
        return x;
    }
    u64 modulus() const { return N * p_pow(r); }        // congruence modulus M
    u64 torus_modulus() const { return N * p_pow(s); }  // units fixed mod this

    bool contains(const Mat2& g) const
    {
        if (g.det() != 1)
            return false;
        const i64 M = (i64)modulus();
        auto md = [](i64 x, i64 m) { i64 r0 = x % m; return r0 < 0 ? r0 + m : r0; };
        const i64 Np = (i64)N;
        if (md(g.a - 1, Np) || md(g.d - 1, Np) || md(g.c, Np))
            return false;
        const i64 pr = (i64)p_pow(r);
        if (md(g.c, pr))
            return false;
        const i64 ps = (i64)p_pow(s);
        if (md(g.d - 1, ps))
            return false;
        (void)M;
        return true;
    }

    /* Nesting of the attached subgroups. */
    bool subgroup_of(const LevelDatum& o) const
    {
        return N % o.N == 0 && p == o.p && r >= o.r && s >= o.s && (N == o.N);
    }
};

/* Right coset table of Gamma(N,p,r,s) in SL2(Z).  A coset is determined
   by the bottom row (c,d) mod M up to scaling by units u = 1 mod N p^s;
   representatives are enumerated in lexicographic order of the canonical
   (smallest) pair, which fixes all downstream bases. */
class CosetTable {
    using u32 = std::uint32_t;

public:
    explicit CosetTable(const LevelDatum& lvl) : lvl_(lvl), M_(lvl.modulus())
    {
        const u64 M = M_;
        // units of Z/M congruent to 1 mod N p^s
        const u64 tm = lvl.torus_modulus();
        for (u64 u = 1; u < M; ++u)
            if (gcd_u64(u, M) == 1 && u % tm == 1 % tm)
                units_.push_back(u);
        if (M == 1)
            units_.push_back(0); // degenerate M = 1: single coset
        canon_.assign(M * M, UINT32_MAX);
        std::vector<std::pair<u64, u64>> reps;
        for (u64 c = 0; c < M; ++c)
            for (u64 d = 0; d < M; ++d) {
                if (std::gcd(std::gcd(c, d), M) != 1)
                    continue;
                if (canon_[c * M + d] != UINT32_MAX)
                    continue;
                // mark the whole orbit with the orbit's future index
                u64 bc = c, bd = d;
                for (u64 u : units_) {
                    u64 uc = (u * c) % M, ud = (u * d) % M;
                    if (std::make_pair(uc, ud) < std::make_pair(bc, bd)) {
                        bc = uc;
                        bd = ud;
                    }
                }
                if (bc != c || bd != d)
                    continue; // not the canonical element; handled when reached
                u32 idx = (u32)reps.size();
                reps.emplace_back(c, d);
                for (u64 u : units_) {
                    u64 uc = (u * c) % M, ud = (u * d) % M;
                    canon_[uc * M + ud] = idx;
                }
            }
        if (M == 1) {
            reps.clear();
            reps.emplace_back(0, 0);
            canon_.assign(1, 0);
        }
        reps_ = std::move(reps);
        lifts_.reserve(reps_.size());
        for (auto [c, d] : reps_)
            lifts_.push_back(lift_to_sl2(c, d));
    }

    const LevelDatum& level() const { return lvl_; }
    u64 modulus() const { return M_; }
    std::size_t size() const { return reps_.size(); }
    const Mat2& rep(std::size_t i) const { return lifts_[i]; }

    std::size_t coset_of_pair(u64 c, u64 d) const
    {
        if (M_ == 1)
            return 0;
        u32 idx = canon_[(c % M_) * M_ + (d % M_)];
        if (idx == UINT32_MAX)
            throw std::logic_error("coset table: pair is not unimodular at this level");
        return idx;
    }

    std::size_t coset_of(const Mat2& g) const
    {
        i64 M = (i64)M_;
        auto md = [M](i64 x) { i64 r0 = x % M; return (u64)(r0 < 0 ? r0 + M : r0); };
        return coset_of_pair(md(g.c), md(g.d));
    }

    /* index of coset i * h */
    std::size_t act(std::size_t i, const Mat2& h) const
    {
        auto [c, d] = reps_[i];
        i64 nc = (i64)c * h.a + (i64)d * h.c;
        i64 nd = (i64)c * h.b + (i64)d * h.d;
        i64 M = (i64)M_;
        auto md = [M](i64 x) { i64 r0 = x % M; return (u64)(r0 < 0 ? r0 + M : r0); };
        return coset_of_pair(md(nc), md(nd));
    }

    bool minus_id_in_group() const
    {
        // -1 = 1 mod N p^s
        return lvl_.torus_modulus() <= 2;
    }

    bool torsion_free() const
    {
        if (minus_id_in_group())
            return false;
        // With -I excluded, any torsion is conjugate to a power of tau.
        for (std::size_t i = 0; i < size(); ++i)
            if (act(i, kTau) == i)
                return false;
        return true;
    }

    std::size_t psl_index() const
    {
        if (minus_id_in_group())
            return size();
        return size() / 2;
    }

    std::size_t cusp_count() const
    {
        // orbits of cosets under right multiplication by T and -I
        std::vector<std::size_t> parent(size());
        std::iota(parent.begin(), parent.end(), 0);
        std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
            while (parent[x] != x)
                x = parent[x] = parent[parent[x]];
            return x;
        };
        auto unite = [&](std::size_t x, std::size_t y) { parent[find(x)] = find(y); };
        for (std::size_t i = 0; i < size(); ++i) {
            unite(i, act(i, kT));
            unite(i, act(i, kMinusId));
        }
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < size(); ++i)
            if (find(i) == i)
                ++cnt;
        return cnt;
    }

private:
    LevelDatum lvl_;
    u64 M_;
    std::vector<u64> units_;
    std::vector<std::pair<u64, u64>> reps_;
    std::vector<Mat2> lifts_;
    std::vector<u32> canon_;

    Mat2 lift_to_sl2(u64 c, u64 d) const
    {
        const i64 M = (i64)M_;
        if (M == 1)
            return Mat2::id();
        i64 c0 = (i64)c, d0 = (i64)d;
        if (c0 == 0 && d0 == 1)
            return Mat2::id();
        if (c0 == 0)
            c0 = M;
        while (gcd_i64(c0, d0) != 1)
            d0 += M;
        // x*d0 - y*c0 = 1
        i64 x = 0, y = 0;
        {
            i64 old_r = d0, r0 = c0, old_s = 1, s0 = 0;
            while (r0 != 0) {
                i64 q0 = old_r / r0;
                i64 t = old_r - q0 * r0;
                old_r = r0;
                r0 = t;
                t = old_s - q0 * s0;
                old_s = s0;
                s0 = t;
            }
            // old_r == gcd == 1 = old_s * d0 + t0 * c0
            x = old_s;
            y = -(1 - old_s * d0) / c0;
        }
        Mat2 g{x, y, c0, d0};
        if (g.det() != 1)
            throw std::logic_error("coset lift: determinant is not 1");
        return g;
    }
};

/* Shared, immutable coset tables keyed by level. */
inline std::shared_ptr<const CosetTable> coset_table(const LevelDatum& lvl)
{
    static std::map<LevelDatum, std::shared_ptr<const CosetTable>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(lvl);
    if (it != cache.end())
        return it->second;
    auto t = std::make_shared<const CosetTable>(lvl);
    cache.emplace(lvl, t);
    return t;
}

/* [Gamma : Gamma'] for nested level data. */
inline u64 subgroup_index(const LevelDatum& big, const LevelDatum& small)
{
    if (!small.subgroup_of(big))
        throw InvalidSpecError("subgroup_index: levels are not nested");
    return coset_table(small)->size() / coset_table(big)->size();
}

/* SL2(Z) lift of diag(u^-1, u) mod M; entries b, c vanish mod M. */
inline Mat2 lift_diagonal_unit(u64 u, u64 M)
{
    if (M == 1)
        return Mat2::id();
    u %= M;
    if (gcd_u64(u, M) != 1)
        throw InvalidSpecError("lift_diagonal_unit: not a unit");
    const u64 M2 = M * M;
    u64 x = invmod(u % M2, M2);
    u64 f = (u128(x) * u - 1) / M2;
    Mat2 g{(i64)x, (i64)(f * M), (i64)M, (i64)u};
    if (g.det() != 1)
        throw std::logic_error("lift_diagonal_unit: determinant is not 1");
    return g;
}

} // namespace ordforms
