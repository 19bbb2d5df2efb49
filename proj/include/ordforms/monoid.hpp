#pragma once

#include "charpoly.hpp"
#include "submodule.hpp"

#include <map>
#include <string>

namespace ordforms {

/* A finitely generated module over Z/p^k together with finitely many
   commuting operators (the action of monoid generators) and a designated
   dominating word.  The module itself is a carrier submodule of the
   ambient free module; the default carrier is the whole space.

   That the dominating word actually dominates the monoid is a caller
   obligation (it is not machine-checkable for an abstract monoid);
   ordinary_part verifies the consequence it needs and fails loudly. */
class MonoidModule {
public:
    MonoidModule(ModulusContext ctx, std::size_t rank,
                 std::vector<std::pair<std::string, MatrixOk>> generators,
                 std::vector<std::string> dominating_word)
        : MonoidModule(ctx, rank, std::move(generators), std::move(dominating_word),
                       Submodule::full(ctx, rank))
    {
    }

    MonoidModule(ModulusContext ctx, std::size_t rank,
                 std::vector<std::pair<std::string, MatrixOk>> generators,
                 std::vector<std::string> dominating_word, Submodule carrier)
        : ctx_(ctx), n_(rank), gens_(std::move(generators)), word_(std::move(dominating_word)),
          carrier_(std::move(carrier))
    {
        for (const auto& [name, g] : gens_) {
            if (g.rows != n_ || g.cols != n_ || g.ctx != ctx_)
                throw InvalidSpecError("monoid module: generator '" + name + "' has wrong shape");
        }
        for (std::size_t i = 0; i < gens_.size(); ++i)
            for (std::size_t j = i + 1; j < gens_.size(); ++j)
                if (!commute(gens_[i].second, gens_[j].second))
                    throw InvalidSpecError("monoid module: generators '" + gens_[i].first + "' and '" +
                                           gens_[j].first + "' do not commute");
        if (carrier_.ambient_rank() != n_ || carrier_.ctx() != ctx_)
            throw InvalidSpecError("monoid module: carrier has wrong ambient rank");
        for (const auto& [name, g] : gens_) {
            if (!carrier_.contains(apply(g, carrier_)))
                throw InvalidSpecError("monoid module: generator '" + name + "' does not preserve the carrier");
        }
        (void)word_matrix(word_); // resolves names
    }

    ModulusContext ctx() const { return ctx_; }
    std::size_t rank() const { return n_; }
    const std::vector<std::pair<std::string, MatrixOk>>& generators() const { return gens_; }
    const std::vector<std::string>& dominating_word() const { return word_; }
    const Submodule& carrier() const { return carrier_; }
    bool carrier_is_full() const { return carrier_ == Submodule::full(ctx_, n_); }

    const MatrixOk& generator(const std::string& name) const
    {
        for (const auto& [nm, g] : gens_)
            if (nm == name)
                return g;
        throw InvalidSpecError("monoid module: unknown generator '" + name + "'");
    }

    MatrixOk word_matrix(const std::vector<std::string>& word) const
    {
        MatrixOk m = MatrixOk::identity(ctx_, n_);
        for (const auto& name : word)
            m = mul(m, generator(name));
        return m;
    }

    MatrixOk dominating_matrix() const { return word_matrix(word_); }

    /* Reduce everything mod p^k2. */
    MonoidModule reduced(unsigned k2) const
    {
        std::vector<std::pair<std::string, MatrixOk>> gens;
        for (const auto& [nm, g] : gens_)
            gens.emplace_back(nm, g.reduced(k2));
        return MonoidModule(ctx_.lowered(k2), n_, std::move(gens), word_, carrier_.reduced(k2));
    }

private:
    ModulusContext ctx_;
    std::size_t n_;
    std::vector<std::pair<std::string, MatrixOk>> gens_;
    std::vector<std::string> word_;
    Submodule carrier_;
};

/* Stable image of the dominating word inside the carrier. */
inline std::pair<unsigned, Submodule> stable_image_on_carrier(const MonoidModule& j)
{
    const MatrixOk t = j.dominating_matrix();
    const unsigned bound = (unsigned)j.rank() * j.ctx().k;
    Submodule prev = j.carrier();
    MatrixOk gens = prev.generator_matrix();
    for (unsigned m = 0;; ++m) {
        MatrixOk next_gens = mul(t, gens);
        Submodule next = Submodule::image(next_gens);
        if (next == prev)
            return {m, prev};
        if (m > bound)
            throw std::logic_error("carrier image chain failed to stabilize");
        prev = std::move(next);
        gens = std::move(next_gens);
    }
}

inline std::pair<unsigned, Submodule> stable_kernel_on_carrier(const MonoidModule& j)
{
    const MatrixOk t = j.dominating_matrix();
    const unsigned bound = (unsigned)j.rank() * j.ctx().k;
    Submodule prev = intersect(Submodule::kernel(MatrixOk::identity(j.ctx(), j.rank())), j.carrier());
    MatrixOk power = MatrixOk::identity(j.ctx(), j.rank());
    for (unsigned m = 0;; ++m) {
        MatrixOk next_power = mul(t, power);
        Submodule next = intersect(Submodule::kernel(next_power), j.carrier());
        if (next == prev)
            return {m, prev};
        if (m > bound)
            throw std::logic_error("carrier kernel chain failed to stabilize");
        prev = std::move(next);
        power = std::move(next_power);
    }
}

/* Largest submodule on which every generator acts surjectively, hence
   bijectively: the stable image of the dominating word.  Verifies that
   every generator maps the result onto itself and reports a bad
   dominating word otherwise. */
inline Submodule ordinary_part(const MonoidModule& j)
{
    auto [m, stable] = stable_image_on_carrier(j);
    (void)m;
    for (const auto& [name, g] : j.generators()) {
        if (apply(g, stable) != stable)
            throw CertificateError("ordinary_part: generator '" + name +
                                   "' is not invertible on the stable image; "
                                   "the designated word does not dominate");
    }
    return stable;
}

/* Elements killed by a power of the dominating word. */
inline Submodule nilpotent_part(const MonoidModule& j)
{
    return stable_kernel_on_carrier(j).second;
}

struct OrdinaryDecomposition {
    Submodule ordinary;  // generators act invertibly here
    Submodule nilpotent; // the dominating word is nilpotent here
    unsigned stabilization_index = 0;
    /* Minimal generators of the two summands, side by side; square and
       invertible exactly when the carrier is the full ambient module. */
    MatrixOk basis_witness;
    /* Projector onto the ordinary part along the nilpotent part, as an
       ambient matrix; only available for full carriers. */
    std::optional<MatrixOk> projector;
};

/* J = ordinary + nilpotent with zero intersection (valid over the
   Artinian base ring Z/p^k).  Failure is a hard error: it means the
   commutativity or domination precondition was violated. */
inline OrdinaryDecomposition decompose(const MonoidModule& j)
{
    const ModulusContext ctx = j.ctx();
    OrdinaryDecomposition d;
    auto [mi, ord] = stable_image_on_carrier(j);
    auto [mk, nil] = stable_kernel_on_carrier(j);
    d.ordinary = ord;
    d.nilpotent = nil;
    d.stabilization_index = std::max(mi, mk);
    for (const auto& [name, g] : j.generators())
        if (apply(g, d.ordinary) != d.ordinary)
            throw CertificateError("decompose: generator '" + name + "' not invertible on ordinary part");
    if (!intersect(d.ordinary, d.nilpotent).is_zero())
        throw CertificateError("decompose: summands intersect");
    if (sum(d.ordinary, d.nilpotent) != j.carrier())
        throw CertificateError("decompose: summands do not fill the module");

    auto go = minimal_generators(d.ordinary);
    auto gn = minimal_generators(d.nilpotent);
    MatrixOk b(ctx, j.rank(), go.size() + gn.size());
    for (std::size_t c = 0; c < go.size(); ++c)
        for (std::size_t i = 0; i < j.rank(); ++i)
            b.at(i, c) = go[c][i];
    for (std::size_t c = 0; c < gn.size(); ++c)
        for (std::size_t i = 0; i < j.rank(); ++i)
            b.at(i, go.size() + c) = gn[c][i];
    d.basis_witness = b;

    if (j.carrier_is_full()) {
        if (b.rows != b.cols || !is_invertible(b))
            throw CertificateError("decompose: basis witness is not invertible");
        /* projector P with P*[go|gn] = [go|0]; unique because the columns
           of b generate the module */
        MatrixOk target = b;
        for (std::size_t c = go.size(); c < b.cols; ++c)
            for (std::size_t i = 0; i < j.rank(); ++i)
                target.at(i, c) = 0;
        MatrixOk proj = mul(target, inverse(b));
        if (mul(proj, proj) != proj)
            throw CertificateError("decompose: projector not idempotent");
        for (const auto& [name, g] : j.generators())
            if (!commute(proj, g))
                throw CertificateError("decompose: projector does not commute with generator '" + name + "'");
        d.projector = proj;
    }
    return d;
}

/* Restriction of an ambient operator to a stable submodule, expressed on
   the given minimal generators: solves F * A = T * F. */
inline MatrixOk restrict_to(const MatrixOk& t, const std::vector<std::vector<u64>>& mingens,
                            std::size_t ambient)
{
    const ModulusContext ctx = t.ctx;
    MatrixOk F(ctx, ambient, mingens.size());
    for (std::size_t c = 0; c < mingens.size(); ++c)
        for (std::size_t i = 0; i < ambient; ++i)
            F.at(i, c) = mingens[c][i];
    auto A = solve(F, mul(t, F));
    if (!A)
        throw std::logic_error("restrict_to: submodule is not stable under the operator");
    return *A;
}

struct UnitRootCertificate {
    bool invertible_on_ordinary = false;
    std::size_t ordinary_generators = 0;
    /* constant term of the characteristic polynomial of the restricted
       action, and its p-adic valuation (0 means unit) */
    u64 constant_term = 0;
    unsigned valuation = 0;
};

/* TRUE iff the word acts invertibly on the ordinary part: the constant
   term of its characteristic polynomial there is a unit mod p.  This is
   the finite-precision meaning of "all eigenvalues on the ordinary part
   are p-adic units". */
inline UnitRootCertificate unit_root_check(const MonoidModule& j, const std::vector<std::string>& word)
{
    const ModulusContext ctx = j.ctx();
    MatrixOk t = j.word_matrix(word);
    Submodule ord = ordinary_part(j);
    UnitRootCertificate cert;
    auto mg = minimal_generators(ord);
    cert.ordinary_generators = mg.size();
    if (mg.empty()) {
        cert.invertible_on_ordinary = true; // vacuous on the zero module
        cert.constant_term = 1 % ctx.q;
        cert.valuation = 0;
        return cert;
    }
    MatrixOk A = restrict_to(t, mg, j.rank());
    auto cp = charpoly(A);
    cert.constant_term = cp[0];
    cert.valuation = ctx.val(cp[0]);
    cert.invertible_on_ordinary = ctx.is_unit(cp[0]);
    return cert;
}

struct OrdinaryRankReport {
    std::vector<unsigned> rank_per_precision; // index i = precision i+1
    bool stabilized = false;                  // last two precisions agree
};

/* Number of unit elementary divisors of the ordinary part, per precision
   k = 1..K of a compatible reduction family. */
inline OrdinaryRankReport ordinary_rank(const std::vector<MonoidModule>& family)
{
    if (family.empty())
        throw InvalidSpecError("ordinary_rank: empty family");
    for (std::size_t i = 0; i < family.size(); ++i) {
        if (family[i].ctx().k != i + 1 || family[i].ctx().p != family[0].ctx().p)
            throw InvalidSpecError("ordinary_rank: family must be presented at precisions 1..K");
        if (i + 1 < family.size()) {
            MonoidModule red = family[i + 1].reduced(i + 1);
            if (red.rank() != family[i].rank() || red.generators().size() != family[i].generators().size())
                throw InvalidSpecError("ordinary_rank: non-compatible family");
            for (std::size_t g = 0; g < red.generators().size(); ++g)
                if (red.generators()[g].second != family[i].generators()[g].second)
                    throw InvalidSpecError("ordinary_rank: non-compatible family");
            if (red.carrier() != family[i].carrier())
                throw InvalidSpecError("ordinary_rank: non-compatible family");
        }
    }
    OrdinaryRankReport rep;
    for (const auto& j : family) {
        Submodule ord = ordinary_part(j);
        auto d = ord.divisor_exponents();
        rep.rank_per_precision.push_back((unsigned)std::count(d.begin(), d.end(), 0u));
    }
    if (rep.rank_per_precision.size() >= 2) {
        auto n = rep.rank_per_precision.size();
        rep.stabilized = rep.rank_per_precision[n - 1] == rep.rank_per_precision[n - 2];
    } else {
        rep.stabilized = true;
    }
    return rep;
}

inline std::vector<MonoidModule> precision_family(const MonoidModule& top)
{
    std::vector<MonoidModule> fam;
    for (unsigned k = 1; k <= top.ctx().k; ++k)
        fam.push_back(top.reduced(k));
    return fam;
}

/* Equivariant map between monoid modules: a matrix between the ambients
   that intertwines generators by name and maps carrier into carrier. */
struct EquivariantMap {
    MatrixOk matrix; // rank(dst) x rank(src)
};

struct ExactSequenceReport {
    bool input_exact = false;
    bool input_equivariant = false;
    Submodule ord1, ord2, ord3;
    bool induced_injective = false;
    bool induced_middle_exact = false;
    bool induced_surjective = false;
    bool cardinality_balanced = false; // |ord2| == |ord1| * |ord3|
    bool exact() const { return induced_injective && induced_middle_exact && induced_surjective; }
};

/* Exactness of the ordinary-part functor on a short exact sequence
   j1 -> j2 -> j3 of monoid modules. */
inline ExactSequenceReport ordinary_of_exact_sequence(const MonoidModule& j1, const MonoidModule& j2,
                                                      const MonoidModule& j3, const EquivariantMap& f,
                                                      const EquivariantMap& g)
{
    if (j1.ctx() != j2.ctx() || j2.ctx() != j3.ctx())
        throw InvalidSpecError("exact sequence: moduli differ");
    if (f.matrix.rows != j2.rank() || f.matrix.cols != j1.rank() || g.matrix.rows != j3.rank() ||
        g.matrix.cols != j2.rank())
        throw InvalidSpecError("exact sequence: map shapes do not match");
    if (j1.generators().size() != j2.generators().size() ||
        j2.generators().size() != j3.generators().size())
        throw InvalidSpecError("exact sequence: generator counts differ");

    ExactSequenceReport rep;
    rep.input_equivariant = true;
    for (std::size_t t = 0; t < j1.generators().size(); ++t) {
        if (j1.generators()[t].first != j2.generators()[t].first ||
            j2.generators()[t].first != j3.generators()[t].first)
            throw InvalidSpecError("exact sequence: generator names do not match");
        if (mul(f.matrix, j1.generators()[t].second) != mul(j2.generators()[t].second, f.matrix))
            rep.input_equivariant = false;
        if (mul(g.matrix, j2.generators()[t].second) != mul(j3.generators()[t].second, g.matrix))
            rep.input_equivariant = false;
    }
    if (!rep.input_equivariant)
        throw InvalidSpecError("exact sequence: maps are not equivariant");

    Submodule im_f = apply(f.matrix, j1.carrier());
    Submodule ker_g_carrier = intersect(Submodule::kernel(g.matrix), j2.carrier());
    bool f_inj = true;
    {
        Submodule ker_f_carrier = intersect(Submodule::kernel(f.matrix), j1.carrier());
        f_inj = ker_f_carrier.is_zero();
    }
    bool g_surj = apply(g.matrix, j2.carrier()) == j3.carrier();
    rep.input_exact = f_inj && g_surj && im_f == ker_g_carrier;
    if (!rep.input_exact)
        throw InvalidSpecError("exact sequence: input sequence is not exact");

    rep.ord1 = ordinary_part(j1);
    rep.ord2 = ordinary_part(j2);
    rep.ord3 = ordinary_part(j3);

    Submodule f_ord1 = apply(f.matrix, rep.ord1);
    if (!rep.ord2.contains(f_ord1))
        throw CertificateError("exact sequence: ordinary part is not functorial under f");
    rep.induced_injective = intersect(Submodule::kernel(f.matrix), rep.ord1).is_zero();
    rep.induced_middle_exact = f_ord1 == intersect(Submodule::kernel(g.matrix), rep.ord2);
    rep.induced_surjective = apply(g.matrix, rep.ord2) == rep.ord3;
    rep.cardinality_balanced =
        rep.ord2.size_log_p() == rep.ord1.size_log_p() + rep.ord3.size_log_p();
    return rep;
}

} // namespace ordforms
