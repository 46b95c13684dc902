#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oqk/errors.hpp"
#include "oqk/novikov.hpp"

namespace oqk {

enum class GenTag { unforgettable, unit, weighted };

inline std::string to_string(GenTag t)
{
    switch (t) {
    case GenTag::unit: return "unit";
    case GenTag::weighted: return "weighted";
    default: return "unforgettable";
    }
}

struct Generator {
    std::string name;
    int degree = 0;
    GenTag tag = GenTag::unforgettable;
    friend bool operator==(const Generator&, const Generator&) = default;
};

class GradedBasis {
public:
    GradedBasis() = default;
    explicit GradedBasis(const std::vector<Generator>& gens)
    {
        for (const auto& g : gens)
            add(g);
    }

    int add(const Generator& g)
    {
        if (g.name.empty())
            throw InvalidStructure("empty generator name");
        if (find(g.name))
            throw InvalidStructure("duplicate generator '" + g.name + "'");
        if (g.tag == GenTag::unit && (unit_ || g.degree != 0))
            throw InvalidStructure("at most one unit generator, of degree 0");
        if (g.tag == GenTag::weighted && (weighted_ || g.degree != -1))
            throw InvalidStructure("at most one weighted generator, of degree -1");
        int i = static_cast<int>(gens_.size());
        gens_.push_back(g);
        if (g.tag == GenTag::unit)
            unit_ = i;
        if (g.tag == GenTag::weighted)
            weighted_ = i;
        return i;
    }

    int size() const { return static_cast<int>(gens_.size()); }
    const Generator& operator[](int i) const { return gens_.at(static_cast<std::size_t>(i)); }
    int degree(int i) const { return (*this)[i].degree; }
    const std::string& name(int i) const { return (*this)[i].name; }
    const std::vector<Generator>& generators() const { return gens_; }
    std::optional<int> unit() const { return unit_; }
    std::optional<int> weighted() const { return weighted_; }

    std::optional<int> find(std::string_view name) const
    {
        for (std::size_t i = 0; i < gens_.size(); ++i)
            if (gens_[i].name == name)
                return static_cast<int>(i);
        return std::nullopt;
    }

    int index(std::string_view name) const
    {
        if (auto i = find(name))
            return *i;
        throw InvalidStructure("unknown generator '" + std::string(name) + "'");
    }

    friend bool operator==(const GradedBasis& a, const GradedBasis& b) { return a.gens_ == b.gens_; }

private:
    std::vector<Generator> gens_;
    std::optional<int> unit_, weighted_;
};

using Tuple = std::vector<int>;
using Output = std::map<int, Scalar>;
using Table = std::map<Tuple, Output>;

inline int sign_of(long n) { return (n % 2 == 0) ? 1 : -1; }

class Cochain {
public:
    explicit Cochain(Rational cutoff = kDefaultCutoff) : cutoff_(std::move(cutoff)) {}

    static Cochain generator(int i, const Scalar& c)
    {
        Cochain x(c.cutoff());
        x.add(i, c);
        return x;
    }

    const Rational& cutoff() const { return cutoff_; }
    const std::map<int, Scalar>& coeffs() const { return coeffs_; }
    bool is_zero() const { return coeffs_.empty(); }

    Scalar get(int i) const
    {
        auto it = coeffs_.find(i);
        return it == coeffs_.end() ? Scalar::zero(cutoff_) : it->second;
    }

    void add(int i, const Scalar& c)
    {
        if (c.is_zero())
            return;
        auto it = coeffs_.find(i);
        Scalar v = it == coeffs_.end() ? c.truncated(cutoff_) : Scalar(it->second + c).truncated(cutoff_);
        if (v.is_zero()) {
            if (it != coeffs_.end())
                coeffs_.erase(it);
        } else {
            coeffs_.insert_or_assign(i, std::move(v));
        }
    }

    void set(int i, const Scalar& c)
    {
        coeffs_.erase(i);
        add(i, c);
    }

    Valuation valuation() const
    {
        Valuation v;
        for (const auto& [i, c] : coeffs_)
            v = Valuation::min(v, c.valuation());
        return v;
    }

    Cochain scaled(const Scalar& s) const
    {
        Cochain r(std::min(cutoff_, s.cutoff()));
        for (const auto& [i, c] : coeffs_)
            r.add(i, c * s);
        return r;
    }

    friend Cochain operator+(const Cochain& a, const Cochain& b)
    {
        Cochain r(std::min(a.cutoff_, b.cutoff_));
        for (const auto& [i, c] : a.coeffs_)
            r.add(i, c);
        for (const auto& [i, c] : b.coeffs_)
            r.add(i, c);
        return r;
    }
    friend Cochain operator-(const Cochain& a, const Cochain& b) { return a + b.scaled(Scalar::constant(-1, b.cutoff_)); }

    friend bool operator==(const Cochain& a, const Cochain& b) { return (a - b).is_zero(); }

    std::string str(const GradedBasis& basis) const
    {
        if (coeffs_.empty())
            return "0";
        std::string out;
        for (const auto& [i, c] : coeffs_) {
            if (!out.empty())
                out += " + ";
            out += "(" + c.to_text() + ")*" + basis.name(i);
        }
        return out;
    }

private:
    std::map<int, Scalar> coeffs_;
    Rational cutoff_;
};

namespace detail {

// Degree rule for a map of degree shift - k; classical terms must match exactly, quantum terms by parity.
inline void check_degree(const GradedBasis& basis, const Tuple& in, int out, const Scalar& c, int shift,
                         const char* what)
{
    for (int i : in)
        if (i < 0 || i >= basis.size())
            throw InvalidStructure(std::string(what) + ": input index out of range");
    if (out < 0 || out >= basis.size())
        throw InvalidStructure(std::string(what) + ": output index out of range");
    long expected = shift - static_cast<long>(in.size());
    for (int i : in)
        expected += basis.degree(i);
    long actual = basis.degree(out);
    for (const auto& t : c.terms()) {
        bool ok = t.exp == 0 ? actual == expected : (actual - expected) % 2 == 0;
        if (!ok) {
            std::ostringstream os;
            os << what << " coefficient on (";
            for (std::size_t j = 0; j < in.size(); ++j)
                os << (j ? "," : "") << basis.name(in[j]);
            os << ") -> " << basis.name(out) << " violates the degree rule: output degree " << actual
               << ", expected " << expected << (t.exp == 0 ? "" : " mod 2");
            throw InvalidStructure(os.str());
        }
    }
}

inline void table_add(Table& t, const Tuple& in, int out, const Scalar& c, const Rational& cutoff)
{
    if (c.is_zero())
        return;
    auto& o = t[in];
    auto it = o.find(out);
    Scalar v = (it == o.end() ? c : Scalar(it->second + c)).truncated(cutoff);
    if (v.is_zero()) {
        if (it != o.end())
            o.erase(it);
        if (o.empty())
            t.erase(in);
    } else {
        o.insert_or_assign(out, std::move(v));
    }
}

inline const Output* table_lookup(const Table& t, const Tuple& in)
{
    auto it = t.find(in);
    return it == t.end() ? nullptr : &it->second;
}

// Multilinear evaluation of the arity-k part of a table.
inline Cochain apply(const Table& t, const std::vector<Cochain>& inputs, const Rational& cutoff)
{
    Rational c = cutoff;
    for (const auto& x : inputs)
        c = std::min(c, x.cutoff());
    Cochain r(c);
    for (const auto& [in, outs] : t) {
        if (in.size() != inputs.size())
            continue;
        Scalar f = Scalar::constant(1, c);
        bool zero = false;
        for (std::size_t j = 0; j < in.size() && !zero; ++j) {
            auto it = inputs[j].coeffs().find(in[j]);
            if (it == inputs[j].coeffs().end())
                zero = true;
            else
                f *= it->second;
        }
        if (zero || f.is_zero())
            continue;
        for (const auto& [o, s] : outs)
            r.add(o, f * s);
    }
    return r;
}

// Sum over all arities with every slot filled by b.
inline Cochain total(const Table& t, const Cochain& b, const Rational& cutoff)
{
    Rational c = std::min(cutoff, b.cutoff());
    Cochain r(c);
    for (const auto& [in, outs] : t) {
        Scalar f = Scalar::constant(1, c);
        bool zero = false;
        for (int i : in) {
            auto it = b.coeffs().find(i);
            if (it == b.coeffs().end()) {
                zero = true;
                break;
            }
            f *= it->second;
        }
        if (zero || f.is_zero())
            continue;
        for (const auto& [o, s] : outs)
            r.add(o, f * s);
    }
    return r;
}

inline void require_positive(const Cochain& b, const char* what)
{
    if (!b.valuation().positive())
        throw DivergentSeries(std::string(what) + ": cochain valuation must be positive, got " +
                              b.valuation().str());
}

inline void require_odd(const GradedBasis& basis, const Cochain& b, const char* what)
{
    for (const auto& [i, c] : b.coeffs())
        if (basis.degree(i) % 2 == 0)
            throw InvalidStructure(std::string(what) + ": cochain has even-degree component on '" +
                                   basis.name(i) + "'");
}

// Insert b into every subset of slots of every entry.
inline Table insert_cochain(const Table& t, const Cochain& b, const Rational& cutoff, bool keep_arity_zero)
{
    Rational c = std::min(cutoff, b.cutoff());
    Table r;
    for (const auto& [in, outs] : t) {
        const std::size_t n = in.size();
        std::vector<std::optional<Scalar>> bc(n);
        for (std::size_t j = 0; j < n; ++j)
            if (auto it = b.coeffs().find(in[j]); it != b.coeffs().end())
                bc[j] = it->second;
        for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
            // bit j set: slot j becomes a b-insertion
            Scalar f = Scalar::constant(1, c);
            Tuple kept;
            bool zero = false;
            for (std::size_t j = 0; j < n; ++j) {
                if (mask >> j & 1ul) {
                    if (!bc[j]) {
                        zero = true;
                        break;
                    }
                    f *= *bc[j];
                } else {
                    kept.push_back(in[j]);
                }
            }
            if (zero || f.is_zero() || (kept.empty() && !keep_arity_zero))
                continue;
            for (const auto& [o, s] : outs)
                table_add(r, kept, o, f * s, c);
        }
    }
    return r;
}

}

class AInfinityStructure {
public:
    explicit AInfinityStructure(GradedBasis basis = {}, Rational cutoff = kDefaultCutoff, std::string label = {})
        : basis_(std::move(basis)), cutoff_(std::move(cutoff)), label_(std::move(label))
    {
        if (cutoff_ <= 0)
            throw InvalidStructure("cutoff must be positive");
    }

    const GradedBasis& basis() const { return basis_; }
    const Rational& cutoff() const { return cutoff_; }
    const std::string& label() const { return label_; }
    void set_label(std::string l) { label_ = std::move(l); }
    const Table& table() const { return table_; }

    void add(const Tuple& in, int out, const Scalar& c)
    {
        detail::check_degree(basis_, in, out, c, 2, "m");
        if (!c.valuation().nonnegative())
            throw InvalidStructure("m coefficients must have nonnegative valuation");
        if (in.empty() && !c.valuation().positive())
            throw InvalidStructure("m_0 coefficients must have positive valuation");
        detail::table_add(table_, in, out, c, cutoff_);
    }

    void add(const std::vector<std::string>& in, const std::string& out, const Scalar& c)
    {
        Tuple t;
        for (const auto& n : in)
            t.push_back(basis_.index(n));
        add(t, basis_.index(out), c);
    }

    const Output* lookup(const Tuple& in) const { return detail::table_lookup(table_, in); }

    Scalar coefficient(const Tuple& in, int out) const
    {
        if (auto o = lookup(in))
            if (auto it = o->find(out); it != o->end())
                return it->second;
        return Scalar::zero(cutoff_);
    }

    int max_arity() const
    {
        std::size_t k = 0;
        for (const auto& [in, o] : table_)
            k = std::max(k, in.size());
        return static_cast<int>(k);
    }

private:
    GradedBasis basis_;
    Rational cutoff_;
    std::string label_;
    Table table_;
};

using StructurePtr = std::shared_ptr<const AInfinityStructure>;

class Morphism {
public:
    Morphism(StructurePtr source, StructurePtr target) : source_(std::move(source)), target_(std::move(target))
    {
        if (!source_ || !target_)
            throw InvalidStructure("morphism needs a source and a target");
        if (!(source_->basis() == target_->basis()))
            throw InvalidStructure("source and target must share one basis");
        cutoff_ = std::min(source_->cutoff(), target_->cutoff());
    }

    static Morphism identity(const StructurePtr& s)
    {
        Morphism f(s, s);
        for (int i = 0; i < s->basis().size(); ++i)
            f.add({i}, i, Scalar::constant(1, f.cutoff_));
        return f;
    }

    const AInfinityStructure& source() const { return *source_; }
    const AInfinityStructure& target() const { return *target_; }
    const StructurePtr& source_ptr() const { return source_; }
    const StructurePtr& target_ptr() const { return target_; }
    const GradedBasis& basis() const { return source_->basis(); }
    const Rational& cutoff() const { return cutoff_; }
    const Table& table() const { return table_; }

    void add(const Tuple& in, int out, const Scalar& c)
    {
        detail::check_degree(basis(), in, out, c, 1, "phi");
        if (!c.valuation().nonnegative())
            throw InvalidStructure("phi coefficients must have nonnegative valuation");
        detail::table_add(table_, in, out, c, cutoff_);
    }

    void add(const std::vector<std::string>& in, const std::string& out, const Scalar& c)
    {
        Tuple t;
        for (const auto& n : in)
            t.push_back(basis().index(n));
        add(t, basis().index(out), c);
    }

    const Output* lookup(const Tuple& in) const { return detail::table_lookup(table_, in); }

    // phi_1 = id + O(q), phi_k = O(q) otherwise.
    std::optional<std::string> higher_order_defect() const
    {
        for (int i = 0; i < basis().size(); ++i) {
            Scalar d = Scalar::constant(-1, cutoff_);
            if (auto o = lookup({i}))
                if (auto it = o->find(i); it != o->end())
                    d += it->second;
            if (!d.valuation().positive())
                return "phi_1(" + basis().name(i) + ") has classical part different from identity";
        }
        for (const auto& [in, outs] : table_)
            for (const auto& [o, c] : outs) {
                if (in.size() == 1 && in[0] == o)
                    continue;
                if (!c.valuation().positive())
                    return "coefficient on arity " + std::to_string(in.size()) + " into '" + basis().name(o) +
                           "' is not O(q)";
            }
        return std::nullopt;
    }
    bool is_higher_order_deformation() const { return !higher_order_defect(); }

    void set_table(Table t) { table_ = std::move(t); }

private:
    StructurePtr source_, target_;
    Rational cutoff_;
    Table table_;
};

struct Violation {
    Tuple inputs;
    int output = 0;
    Scalar residual;
};

struct VerifyReport {
    std::vector<Violation> violations;
    std::size_t tuples_checked = 0;
    bool ok() const { return violations.empty(); }
};

struct CheckReport {
    bool ok = true;
    std::vector<std::string> failures;
    std::optional<Tuple> counterexample;

    void fail(std::string msg, std::optional<Tuple> t = std::nullopt)
    {
        if (ok && t)
            counterexample = std::move(t);
        ok = false;
        failures.push_back(std::move(msg));
    }
};

inline std::string tuple_str(const GradedBasis& basis, const Tuple& t)
{
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i)
        s += (i ? "," : "") + basis.name(t[i]);
    return s + ")";
}

inline Cochain compose(const AInfinityStructure& s, const std::vector<Cochain>& inputs)
{
    return detail::apply(s.table(), inputs, s.cutoff());
}

namespace detail {

template <class F>
void for_each_tuple(int dim, int k, F&& f)
{
    Tuple t(static_cast<std::size_t>(k), 0);
    if (dim == 0 && k > 0)
        return;
    while (true) {
        f(t);
        int j = k - 1;
        while (j >= 0 && ++t[static_cast<std::size_t>(j)] == dim)
            t[static_cast<std::size_t>(j--)] = 0;
        if (j < 0)
            return;
    }
}

inline void collect(VerifyReport& rep, const Tuple& a, std::map<int, Scalar>& residual)
{
    for (auto& [o, r] : residual)
        if (!r.is_zero())
            rep.violations.push_back({a, o, r});
}

inline void accumulate(std::map<int, Scalar>& acc, int o, const Scalar& v, const Rational& cutoff)
{
    auto it = acc.find(o);
    if (it == acc.end())
        acc.emplace(o, v.truncated(cutoff));
    else
        it->second = Scalar(it->second + v).truncated(cutoff);
}

}

// Relations for k = 1..max_arity: sum over (j, r) of (-1)^{N_j} m(a_1..a_j, m_r(a_{j+1}..a_{j+r}), ..).
inline VerifyReport verify_ainfty(const AInfinityStructure& s, int max_arity)
{
    VerifyReport rep;
    const auto& B = s.basis();
    for (int k = 1; k <= max_arity; ++k) {
        detail::for_each_tuple(B.size(), k, [&](const Tuple& a) {
            ++rep.tuples_checked;
            std::map<int, Scalar> res;
            long N = 0;
            for (int j = 0; j <= k; ++j) {
                if (j > 0)
                    N += B.degree(a[static_cast<std::size_t>(j - 1)]) + 1;
                for (int r = 0; j + r <= k; ++r) {
                    const Output* inner =
                        s.lookup(Tuple(a.begin() + j, a.begin() + j + r));
                    if (!inner)
                        continue;
                    for (const auto& [o, c] : *inner) {
                        Tuple outer(a.begin(), a.begin() + j);
                        outer.push_back(o);
                        outer.insert(outer.end(), a.begin() + j + r, a.end());
                        const Output* top = s.lookup(outer);
                        if (!top)
                            continue;
                        for (const auto& [y, d] : *top)
                            detail::accumulate(res, y, (c * d).scaled(sign_of(N)), s.cutoff());
                    }
                }
            }
            detail::collect(rep, a, res);
        });
    }
    return rep;
}

inline CheckReport verify_strict_unit(const AInfinityStructure& s, int e)
{
    CheckReport rep;
    const auto& B = s.basis();
    if (e < 0 || e >= B.size()) {
        rep.fail("unit index out of range");
        return rep;
    }
    auto expect = [&](const Tuple& in, int a, int sgn) {
        const Output* o = s.lookup(in);
        bool good = o && o->size() == 1 && o->begin()->first == a &&
                    o->begin()->second == Scalar::constant(sgn, s.cutoff());
        if (!good)
            rep.fail("m_2" + tuple_str(B, in) + " must equal " + (sgn < 0 ? "-" : "") + B.name(a), in);
    };
    for (int a = 0; a < B.size(); ++a) {
        expect({e, a}, a, 1);
        if (a != e)
            expect({a, e}, a, sign_of(B.degree(a)));
    }
    for (const auto& [in, outs] : s.table()) {
        if (in.size() == 2 || std::find(in.begin(), in.end(), e) == in.end())
            continue;
        rep.fail("m_" + std::to_string(in.size()) + tuple_str(B, in) + " must vanish", in);
    }
    return rep;
}

inline Cochain curvature(const AInfinityStructure& s, const Cochain& b)
{
    detail::require_positive(b, "curvature");
    return detail::total(s.table(), b, s.cutoff());
}

// Without a unit, weakly bounding means the curvature vanishes.
inline bool is_weakly_bounding(const AInfinityStructure& s, const Cochain& b)
{
    Cochain c = curvature(s, b);
    auto e = s.basis().unit();
    for (const auto& [i, v] : c.coeffs())
        if (!e || i != *e)
            return false;
    return true;
}

inline Scalar potential(const AInfinityStructure& s, const Cochain& b)
{
    Cochain c = curvature(s, b);
    auto e = s.basis().unit();
    std::string bad;
    for (const auto& [i, v] : c.coeffs())
        if (!e || i != *e)
            bad += (bad.empty() ? "" : ", ") + s.basis().name(i);
    if (!bad.empty())
        throw NotWeaklyBounding("curvature has components on " + bad);
    return e ? c.get(*e) : Scalar::zero(c.cutoff());
}

inline AInfinityStructure deform(const AInfinityStructure& s, const Cochain& b)
{
    detail::require_positive(b, "deform");
    detail::require_odd(s.basis(), b, "deform");
    if (!is_weakly_bounding(s, b))
        (void)potential(s, b);
    AInfinityStructure r(s.basis(), std::min(s.cutoff(), b.cutoff()), s.label());
    for (const auto& [in, outs] : detail::insert_cochain(s.table(), b, r.cutoff(), true))
        for (const auto& [o, c] : outs)
            r.add(in, o, c);
    return r;
}

// Residual sum_j (-1)^{N_j} phi(.., m_r(..), ..) - sum m'(phi(..), .., phi(..)), arities 0..max_arity.
inline VerifyReport verify_morphism(const Morphism& f, int max_arity)
{
    VerifyReport rep;
    const auto& B = f.basis();
    const auto& S = f.source();
    const auto& T = f.target();
    const Rational& C = f.cutoff();
    for (int k = 0; k <= max_arity; ++k) {
        detail::for_each_tuple(B.size(), k, [&](const Tuple& a) {
            ++rep.tuples_checked;
            std::map<int, Scalar> res;
            long N = 0;
            for (int j = 0; j <= k; ++j) {
                if (j > 0)
                    N += B.degree(a[static_cast<std::size_t>(j - 1)]) + 1;
                for (int r = 0; j + r <= k; ++r) {
                    const Output* inner = S.lookup(Tuple(a.begin() + j, a.begin() + j + r));
                    if (!inner)
                        continue;
                    for (const auto& [o, c] : *inner) {
                        Tuple outer(a.begin(), a.begin() + j);
                        outer.push_back(o);
                        outer.insert(outer.end(), a.begin() + j + r, a.end());
                        const Output* top = f.lookup(outer);
                        if (!top)
                            continue;
                        for (const auto& [y, d] : *top)
                            detail::accumulate(res, y, (c * d).scaled(sign_of(N)), C);
                    }
                }
            }
            // phi on every consecutive block a[p..q)
            std::vector<std::vector<const Output*>> blk(static_cast<std::size_t>(k + 1),
                                                        std::vector<const Output*>(static_cast<std::size_t>(k + 1)));
            for (int p = 0; p <= k; ++p)
                for (int q = p; q <= k; ++q)
                    blk[p][q] = f.lookup(Tuple(a.begin() + p, a.begin() + q));
            for (const auto& [ys, outs] : T.table()) {
                const std::size_t r = ys.size();
                // dp[p]: coefficient after consuming a[0..p) with the first t outputs matched
                std::vector<std::optional<Scalar>> dp(static_cast<std::size_t>(k + 1));
                dp[0] = Scalar::constant(1, C);
                for (std::size_t t = 0; t < r; ++t) {
                    std::vector<std::optional<Scalar>> nx(static_cast<std::size_t>(k + 1));
                    for (int p = 0; p <= k; ++p) {
                        if (!dp[p])
                            continue;
                        for (int q = p; q <= k; ++q) {
                            const Output* o = blk[p][q];
                            if (!o)
                                continue;
                            auto it = o->find(ys[t]);
                            if (it == o->end())
                                continue;
                            Scalar v = *dp[p] * it->second;
                            nx[q] = nx[q] ? Scalar(*nx[q] + v) : v;
                        }
                    }
                    dp = std::move(nx);
                }
                if (!dp[k] || dp[k]->is_zero())
                    continue;
                for (const auto& [y, d] : outs)
                    detail::accumulate(res, y, -(*dp[k] * d), C);
            }
            detail::collect(rep, a, res);
        });
    }
    return rep;
}

inline CheckReport verify_unital_morphism(const Morphism& f)
{
    CheckReport rep;
    const auto& B = f.basis();
    auto e = B.unit();
    if (!e) {
        rep.fail("structures have no unit generator");
        return rep;
    }
    const Output* o = f.lookup({*e});
    if (!(o && o->size() == 1 && o->begin()->first == *e && o->begin()->second == Scalar::constant(1, f.cutoff())))
        rep.fail("phi_1(" + B.name(*e) + ") must equal " + B.name(*e), Tuple{*e});
    for (const auto& [in, outs] : f.table()) {
        if (in.size() == 1 || std::find(in.begin(), in.end(), *e) == in.end())
            continue;
        rep.fail("phi_" + std::to_string(in.size()) + tuple_str(B, in) + " must vanish", in);
    }
    return rep;
}

inline Cochain pushforward(const Morphism& f, const Cochain& b)
{
    detail::require_positive(b, "pushforward");
    return detail::total(f.table(), b, f.cutoff());
}

// Solves pushforward(f, a) = t by a <- t - (f(a) - a).
inline Cochain invert_pushforward(const Morphism& f, const Cochain& t)
{
    if (auto d = f.higher_order_defect())
        throw NotHigherOrderDeformation(*d);
    detail::require_positive(t, "invert_pushforward");
    Cochain a = t;
    for (int it = 0; it < 100000; ++it) {
        Cochain next = t - (pushforward(f, a) - a);
        if (next == a)
            return next;
        a = std::move(next);
    }
    throw DivergentSeries("invert_pushforward did not stabilise");
}

struct IntertwineReport {
    bool ok = false;
    bool source_weakly_bounding = false;
    bool target_weakly_bounding = false;
    std::optional<Scalar> w1, w2;
    Cochain image;
    std::vector<std::string> messages;
};

inline IntertwineReport check_intertwine(const Morphism& f, const Cochain& b)
{
    IntertwineReport rep;
    try {
        rep.w1 = potential(f.source(), b);
        rep.source_weakly_bounding = true;
    } catch (const Error& ex) {
        rep.messages.push_back(std::string("source: ") + ex.what());
        return rep;
    }
    try {
        rep.image = pushforward(f, b);
        rep.w2 = potential(f.target(), rep.image);
        rep.target_weakly_bounding = true;
    } catch (const Error& ex) {
        rep.messages.push_back(std::string("target: ") + ex.what());
        return rep;
    }
    rep.ok = congruent(*rep.w1, *rep.w2);
    if (!rep.ok)
        rep.messages.push_back("potentials differ: " + rep.w1->to_text() + " vs " + rep.w2->to_text());
    return rep;
}

inline Morphism deform_morphism(const Morphism& f, const Cochain& b)
{
    Cochain b2 = pushforward(f, b);
    auto src = std::make_shared<const AInfinityStructure>(deform(f.source(), b));
    auto tgt = std::make_shared<const AInfinityStructure>(deform(f.target(), b2));
    Morphism g(src, tgt);
    for (const auto& [in, outs] : detail::insert_cochain(f.table(), b, g.cutoff(), false))
        for (const auto& [o, c] : outs)
            g.add(in, o, c);
    return g;
}

namespace detail {

inline std::vector<std::vector<Scalar>> m1_matrix(const AInfinityStructure& s, const Cochain& b)
{
    const int n = s.basis().size();
    const Rational C = std::min(s.cutoff(), b.cutoff());
    std::vector<std::vector<Scalar>> M(static_cast<std::size_t>(n),
                                       std::vector<Scalar>(static_cast<std::size_t>(n), Scalar::zero(C)));
    for (const auto& [in, outs] : s.table()) {
        for (std::size_t j = 0; j < in.size(); ++j) {
            Scalar f = Scalar::constant(1, C);
            for (std::size_t i = 0; i < in.size() && !f.is_zero(); ++i)
                if (i != j)
                    f *= b.get(in[i]);
            if (f.is_zero())
                continue;
            for (const auto& [o, c] : outs)
                M[static_cast<std::size_t>(o)][static_cast<std::size_t>(in[j])] += f * c;
        }
    }
    return M;
}

// Cauchy product terms below an explicit cutoff.
inline std::vector<Scalar::Term> product_terms(const Scalar& x, const Scalar& y, const Rational& cutoff)
{
    std::vector<Scalar::Term> out;
    for (const auto& a : x.terms())
        for (const auto& b : y.terms())
            if (a.exp + b.exp < cutoff)
                out.push_back({Rational(a.exp + b.exp), Rational(a.coef * b.coef)});
    return out;
}

inline int rank(std::vector<std::vector<Scalar>> M)
{
    const std::size_t rows = M.size(), cols = rows ? M[0].size() : 0;
    std::vector<bool> row_used(rows), col_used(cols);
    int rk = 0;
    while (true) {
        std::size_t pr = rows, pc = cols;
        Valuation best;
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                if (!row_used[i] && !col_used[j] && !M[i][j].is_zero() &&
                    (pr == rows || M[i][j].valuation() < best)) {
                    pr = i;
                    pc = j;
                    best = M[i][j].valuation();
                }
        if (pr == rows)
            return rk;
        ++rk;
        row_used[pr] = col_used[pc] = true;
        // row_i <- (P row_i - M[i][pc] row_pr) / q^v, exact to the cutoff since every entry has valuation >= v
        const Rational v = *best.value;
        const Scalar& P = M[pr][pc];
        for (std::size_t i = 0; i < rows; ++i) {
            if (row_used[i] || M[i][pc].is_zero())
                continue;
            const Scalar a = M[i][pc];
            for (std::size_t j = 0; j < cols; ++j) {
                if (col_used[j] && j != pc)
                    continue;
                const Rational c = M[i][j].cutoff();
                auto raw = product_terms(M[i][j], P, Rational(c + v));
                for (const auto& t : product_terms(a, M[pr][j], Rational(c + v)))
                    raw.push_back({t.exp, Rational(-t.coef)});
                for (auto& t : raw)
                    t.exp -= v;
                M[i][j] = Scalar::from_terms(std::move(raw), c);
            }
        }
    }
}

}

// dim - 2 rank(m_1^b), valid when m_1^b squares to zero.
inline int cohomology_rank(const AInfinityStructure& s, const Cochain& b)
{
    detail::require_odd(s.basis(), b, "cohomology_rank");
    return s.basis().size() - 2 * detail::rank(detail::m1_matrix(s, b));
}

struct NamedEntry {
    std::vector<std::string> inputs;
    std::string output;
    Scalar coef;
};

// Adds e (strict unit) and p with m_1(p) = e - x_M; corrections may only touch tuples containing p and not e.
inline AInfinityStructure homotopy_unit_extend(const AInfinityStructure& s, int x_max,
                                               const std::vector<NamedEntry>& correction = {},
                                               bool positivity = true)
{
    const auto& B0 = s.basis();
    if (B0.unit() || B0.weighted())
        throw InvalidStructure("structure already has unit or weighted generators");
    if (x_max < 0 || x_max >= B0.size())
        throw InvalidStructure("x_M index out of range");
    GradedBasis B = B0;
    const int e = B.add({"e", 0, GenTag::unit});
    const int p = B.add({"p", -1, GenTag::weighted});
    AInfinityStructure r(B, s.cutoff(), s.label().empty() ? "" : s.label() + "+ep");
    for (const auto& [in, outs] : s.table())
        for (const auto& [o, c] : outs)
            r.add(in, o, c);
    const Scalar one = Scalar::constant(1, s.cutoff());
    for (int a = 0; a < B.size(); ++a) {
        r.add({e, a}, a, one);
        if (a != e)
            r.add({a, e}, a, one.scaled(sign_of(B.degree(a))));
    }
    r.add({p}, e, one);
    r.add({p}, x_max, -one);
    for (const auto& c : correction) {
        Tuple in;
        for (const auto& n : c.inputs)
            in.push_back(B.index(n));
        const int out = B.index(c.output);
        std::string where = "correction on " + tuple_str(B, in);
        if (std::find(in.begin(), in.end(), p) == in.end())
            throw ConstraintViolation(where + " does not involve p");
        if (std::find(in.begin(), in.end(), e) != in.end())
            throw ConstraintViolation(where + " involves the strict unit");
        if (in.size() == 1)
            throw ConstraintViolation(where + " contradicts m_1(p) = e - x_M");
        if (positivity && std::all_of(in.begin(), in.end(), [&](int i) { return i == p; }) && !c.coef.is_zero())
            throw ConstraintViolation(where + " contradicts m_k(p,...,p) = 0");
        r.add(in, out, c.coef);
    }
    return r;
}

// Extends a morphism by phi_1(e) = e, phi_1(p) = p plus p-channel corrections.
inline Morphism homotopy_unit_extend(const Morphism& f, StructurePtr source, StructurePtr target,
                                     const std::vector<NamedEntry>& correction = {})
{
    Morphism g(std::move(source), std::move(target));
    const auto& B = g.basis();
    auto e = B.unit(), p = B.weighted();
    if (!e || !p)
        throw InvalidStructure("extended structures need e and p");
    for (int i = 0; i < f.basis().size(); ++i)
        if (!(f.basis()[i] == B[i]))
            throw InvalidStructure("extended basis must start with the original basis");
    for (const auto& [in, outs] : f.table())
        for (const auto& [o, c] : outs)
            g.add(in, o, c);
    g.add({*e}, *e, Scalar::constant(1, g.cutoff()));
    g.add({*p}, *p, Scalar::constant(1, g.cutoff()));
    for (const auto& c : correction) {
        Tuple in;
        for (const auto& n : c.inputs)
            in.push_back(B.index(n));
        std::string where = "correction on " + tuple_str(B, in);
        if (std::find(in.begin(), in.end(), *p) == in.end())
            throw ConstraintViolation(where + " does not involve p");
        if (std::find(in.begin(), in.end(), *e) != in.end())
            throw ConstraintViolation(where + " involves the strict unit");
        if (in.size() == 1)
            throw ConstraintViolation(where + " contradicts phi_1(p) = p");
        g.add(in, B.index(c.output), c.coef);
    }
    return g;
}

// W p for the canonical cochain of an extended structure.
inline Cochain canonical_cochain(const AInfinityStructure& s, const Scalar& w)
{
    auto p = s.basis().weighted();
    if (!p)
        throw InvalidStructure("structure has no weighted generator");
    return Cochain::generator(*p, w);
}

}
