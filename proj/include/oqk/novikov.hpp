#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "oqk/errors.hpp"
#include "oqk/rational.hpp"

namespace oqk {

using json = nlohmann::json;

inline const Rational kDefaultCutoff = Rational(10);

// q-adic valuation; an empty value stands for +infinity (the zero scalar).
struct Valuation {
    std::optional<Rational> value;

    bool infinite() const { return !value.has_value(); }

    friend bool operator==(const Valuation& a, const Valuation& b)
    {
        if (a.infinite() || b.infinite())
            return a.infinite() == b.infinite();
        return *a.value == *b.value;
    }
    friend bool operator<(const Valuation& a, const Valuation& b)
    {
        if (a.infinite())
            return false;
        if (b.infinite())
            return true;
        return *a.value < *b.value;
    }
    friend bool operator<=(const Valuation& a, const Valuation& b) { return !(b < a); }
    friend bool operator>(const Valuation& a, const Valuation& b) { return b < a; }
    friend bool operator>=(const Valuation& a, const Valuation& b) { return !(a < b); }

    bool positive() const { return infinite() || *value > 0; }
    bool nonnegative() const { return infinite() || *value >= 0; }

    static Valuation min(const Valuation& a, const Valuation& b) { return a < b ? a : b; }
    friend Valuation operator+(const Valuation& a, const Valuation& b)
    {
        if (a.infinite() || b.infinite())
            return {};
        return {Rational(*a.value + *b.value)};
    }

    std::string str() const { return infinite() ? "inf" : to_string(*value); }
};

// Truncated Novikov series sum a_i q^{e_i}, known modulo q^cutoff.
class Scalar {
public:
    struct Term {
        Rational exp;
        Rational coef;
        friend bool operator==(const Term& a, const Term& b) { return a.exp == b.exp && a.coef == b.coef; }
    };

    Scalar() : cutoff_(kDefaultCutoff) {}
    explicit Scalar(Rational cutoff) : cutoff_(std::move(cutoff)) {}

    static Scalar zero(const Rational& cutoff) { return Scalar(cutoff); }
    static Scalar constant(const Rational& c, const Rational& cutoff) { return monomial(c, Rational(0), cutoff); }
    static Scalar monomial(const Rational& c, const Rational& e, const Rational& cutoff)
    {
        Scalar s(cutoff);
        if (c != 0 && e < cutoff) {
            s.terms_.push_back({e, c});
            s.terms_.back().exp.canonicalize();
            s.terms_.back().coef.canonicalize();
        }
        return s;
    }
    static Scalar from_terms(std::vector<Term> terms, const Rational& cutoff)
    {
        for (auto& t : terms) {
            t.exp.canonicalize();
            t.coef.canonicalize();
        }
        std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.exp < b.exp; });
        Scalar s(cutoff);
        for (auto& t : terms) {
            if (t.exp >= cutoff)
                break;
            if (!s.terms_.empty() && s.terms_.back().exp == t.exp)
                s.terms_.back().coef += t.coef;
            else
                s.terms_.push_back(std::move(t));
        }
        std::erase_if(s.terms_, [](const Term& t) { return t.coef == 0; });
        return s;
    }

    const std::vector<Term>& terms() const { return terms_; }
    const Rational& cutoff() const { return cutoff_; }
    bool is_zero() const { return terms_.empty(); }

    Valuation valuation() const
    {
        if (terms_.empty())
            return {};
        return {terms_.front().exp};
    }

    Rational coefficient(const Rational& e) const
    {
        for (const auto& t : terms_)
            if (t.exp == e)
                return t.coef;
        return Rational(0);
    }

    Scalar truncated(const Rational& c) const
    {
        if (c >= cutoff_)
            return *this;
        Scalar s(c);
        for (const auto& t : terms_)
            if (t.exp < c)
                s.terms_.push_back(t);
        return s;
    }

    Scalar scaled(const Rational& c) const
    {
        Scalar s(cutoff_);
        if (c == 0)
            return s;
        s.terms_ = terms_;
        for (auto& t : s.terms_)
            t.coef *= c;
        return s;
    }

    Scalar operator-() const { return scaled(Rational(-1)); }

    friend Scalar operator+(const Scalar& x, const Scalar& y)
    {
        Rational c = std::min(x.cutoff_, y.cutoff_);
        Scalar s(c);
        auto i = x.terms_.begin(), j = y.terms_.begin();
        auto push = [&](const Rational& e, const Rational& a) {
            if (a != 0 && e < c)
                s.terms_.push_back({e, a});
        };
        while (i != x.terms_.end() || j != y.terms_.end()) {
            if (j == y.terms_.end() || (i != x.terms_.end() && i->exp < j->exp)) {
                push(i->exp, i->coef);
                ++i;
            } else if (i == x.terms_.end() || j->exp < i->exp) {
                push(j->exp, j->coef);
                ++j;
            } else {
                push(i->exp, Rational(i->coef + j->coef));
                ++i;
                ++j;
            }
        }
        return s;
    }
    friend Scalar operator-(const Scalar& x, const Scalar& y) { return x + (-y); }

    friend Scalar operator*(const Scalar& x, const Scalar& y)
    {
        Rational c = std::min(x.cutoff_, y.cutoff_);
        std::vector<Term> out;
        out.reserve(x.terms_.size() * y.terms_.size());
        for (const auto& a : x.terms_)
            for (const auto& b : y.terms_) {
                Rational e = a.exp + b.exp;
                if (e < c)
                    out.push_back({std::move(e), Rational(a.coef * b.coef)});
            }
        return from_terms(std::move(out), c);
    }

    Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
    Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
    Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

    friend bool operator==(const Scalar& a, const Scalar& b) { return a.cutoff_ == b.cutoff_ && a.terms_ == b.terms_; }
    friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

    double evaluate(double q) const
    {
        double s = 0;
        for (const auto& t : terms_)
            s += t.coef.get_d() * std::pow(q, t.exp.get_d());
        return s;
    }

    std::string to_text() const
    {
        std::string out;
        for (const auto& t : terms_) {
            if (!out.empty())
                out += " + ";
            out += to_string(t.coef) + "*q^(" + to_string(t.exp) + ")";
        }
        if (out.empty())
            out = "0";
        return out + " + O(q^(" + to_string(cutoff_) + "))";
    }

    static Scalar from_text(std::string_view text, std::optional<Rational> default_cutoff = std::nullopt)
    {
        std::vector<std::string> pieces;
        std::string cur;
        int depth = 0;
        char last = 0;
        for (char ch : text) {
            if (ch == '(')
                ++depth;
            if (ch == ')')
                --depth;
            if (depth < 0)
                throw ParseError("unbalanced parentheses in '" + std::string(text) + "'");
            bool sep_ok = depth == 0 && !only_space(cur)
                && (std::isdigit(static_cast<unsigned char>(last)) || last == ')' || last == 'q');
            if (ch == '+' && sep_ok) {
                pieces.push_back(cur);
                cur.clear();
                last = ch;
                continue;
            }
            if (ch == '-' && sep_ok) {
                pieces.push_back(cur);
                cur.clear();
            }
            cur.push_back(ch);
            if (!std::isspace(static_cast<unsigned char>(ch)))
                last = ch;
        }
        if (depth != 0)
            throw ParseError("unbalanced parentheses in '" + std::string(text) + "'");
        pieces.push_back(cur);

        std::optional<Rational> cutoff;
        std::vector<Term> terms;
        for (auto& raw : pieces) {
            std::string p = strip(raw);
            if (p.empty())
                throw ParseError("empty term in '" + std::string(text) + "'");
            if (p.rfind("O(", 0) == 0) {
                if (p.back() != ')')
                    throw ParseError("malformed order term '" + p + "'");
                auto [c, e] = parse_monomial(p.substr(2, p.size() - 3));
                if (c != 1)
                    throw ParseError("malformed order term '" + p + "'");
                if (cutoff)
                    throw ParseError("repeated order term in '" + std::string(text) + "'");
                cutoff = e;
                continue;
            }
            auto [c, e] = parse_monomial(p);
            terms.push_back({e, c});
        }
        if (!cutoff)
            cutoff = default_cutoff;
        if (!cutoff)
            throw ParseError("missing O(q^(cutoff)) term in '" + std::string(text) + "'");
        for (const auto& t : terms)
            if (t.exp >= *cutoff)
                throw ParseError("exponent " + to_string(t.exp) + " not below cutoff");
        return from_terms(std::move(terms), *cutoff);
    }

    json to_json() const
    {
        json t = json::array();
        for (const auto& term : terms_)
            t.push_back({to_string(term.exp), term.coef.get_num().get_str(), term.coef.get_den().get_str()});
        return {{"terms", t}, {"cutoff", to_string(cutoff_)}};
    }

    static Scalar from_json(const json& j, std::optional<Rational> default_cutoff = std::nullopt)
    {
        if (j.is_string())
            return from_text(j.get<std::string>(), default_cutoff);
        if (j.is_number_integer())
            return constant(Rational(j.get<long>()), default_cutoff.value_or(kDefaultCutoff));
        if (!j.is_object() || !j.contains("terms"))
            throw ParseError("scalar must be a string or an object with 'terms'");
        Rational cutoff = j.contains("cutoff") ? rational_of(j.at("cutoff"))
                                               : default_cutoff.value_or(kDefaultCutoff);
        std::vector<Term> terms;
        for (const auto& t : j.at("terms")) {
            if (!t.is_array() || t.size() != 3)
                throw ParseError("scalar term must be [exponent, numerator, denominator]");
            Rational e = rational_of(t[0]);
            Rational n = rational_of(t[1]), d = rational_of(t[2]);
            if (d == 0 || n.get_den() != 1 || d.get_den() != 1)
                throw ParseError("scalar coefficient must be integer numerator and nonzero denominator");
            if (e >= cutoff)
                throw ParseError("exponent " + to_string(e) + " not below cutoff");
            terms.push_back({e, Rational(n / d)});
        }
        return from_terms(std::move(terms), cutoff);
    }

    static Rational rational_of(const json& j)
    {
        if (j.is_string())
            return parse_rational(j.get<std::string>());
        if (j.is_number_integer())
            return Rational(j.get<long>());
        if (j.is_number_float())
            return parse_rational(j.dump());
        throw ParseError("expected a rational, got " + j.dump());
    }

private:
    std::vector<Term> terms_;
    Rational cutoff_;

    static bool only_space(const std::string& s)
    {
        return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    }

    static std::string strip(const std::string& s)
    {
        std::string out;
        for (char c : s)
            if (!std::isspace(static_cast<unsigned char>(c)))
                out.push_back(c);
        return out;
    }

    // "c", "c*q", "q^(e)", "c*q^(e)", "-q^e"
    static std::pair<Rational, Rational> parse_monomial(const std::string& p)
    {
        auto qpos = p.find('q');
        if (qpos == std::string::npos)
            return {parse_rational(p), Rational(0)};
        std::string coef = p.substr(0, qpos), rest = p.substr(qpos + 1);
        Rational c(1);
        if (!coef.empty()) {
            if (coef.back() == '*')
                coef.pop_back();
            if (coef == "-")
                c = -1;
            else if (coef == "+" || coef.empty())
                c = 1;
            else
                c = parse_rational(coef);
        }
        Rational e(1);
        if (!rest.empty()) {
            if (rest.front() != '^')
                throw ParseError("malformed monomial '" + p + "'");
            rest.erase(0, 1);
            if (!rest.empty() && rest.front() == '(') {
                if (rest.back() != ')')
                    throw ParseError("malformed monomial '" + p + "'");
                rest = rest.substr(1, rest.size() - 2);
            }
            e = parse_rational(rest);
        }
        return {c, e};
    }
};

inline Scalar nv_add(const Scalar& x, const Scalar& y) { return x + y; }
inline Scalar nv_mul(const Scalar& x, const Scalar& y) { return x * y; }
inline Valuation valuation(const Scalar& x) { return x.valuation(); }

// Equality modulo the smaller of the two cutoffs.
inline bool congruent(const Scalar& a, const Scalar& b)
{
    return (a - b).is_zero();
}

// q^v (c + higher) inverts to q^{-v} c^{-1} sum (-r)^n. The truncation of x
// leaves q^{-v} c^{-1} S known modulo q^{cutoff - 2v}.
inline Scalar nv_inv(const Scalar& x)
{
    if (x.is_zero())
        throw InversionOfZero("cannot invert 0 (mod q^" + to_string(x.cutoff()) + ")");
    const Rational v = x.terms().front().exp;
    const Rational c = x.terms().front().coef;
    const Rational inner = x.cutoff() - v;
    std::vector<Scalar::Term> rt;
    for (std::size_t i = 1; i < x.terms().size(); ++i)
        rt.push_back({Rational(x.terms()[i].exp - v), Rational(-x.terms()[i].coef / c)});
    Scalar negr = Scalar::from_terms(std::move(rt), inner);
    Scalar sum = Scalar::constant(Rational(1), inner), term = sum;
    while (true) {
        term = term * negr;
        if (term.is_zero())
            break;
        sum += term;
    }
    std::vector<Scalar::Term> out;
    for (const auto& t : sum.terms())
        out.push_back({Rational(t.exp - v), Rational(t.coef / c)});
    return Scalar::from_terms(std::move(out), Rational(x.cutoff() - 2 * v));
}

inline Scalar nv_exp(const Scalar& x)
{
    if (!x.valuation().positive())
        throw ExpOfNonpositiveValuation("valuation " + x.valuation().str() + " is not positive");
    Scalar sum = Scalar::constant(Rational(1), x.cutoff()), term = sum;
    for (long n = 1;; ++n) {
        term = (term * x).scaled(Rational(1, n));
        if (term.is_zero())
            break;
        sum += term;
    }
    return sum;
}

}
