#pragma once

#include <gmpxx.h>

#include <cctype>
#include <string>
#include <string_view>

#include "oqk/errors.hpp"

namespace oqk {

using Rational = mpq_class;
using Integer = mpz_class;

inline Rational rat(long num, long den = 1)
{
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline std::string to_string(const Rational& r)
{
    return r.get_str();
}

// Accepts "p", "p/q", "-p/q" and finite decimals such as "0.25" or "-1.5e-3".
inline Rational parse_rational(std::string_view text)
{
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            s.push_back(c);
    if (s.empty())
        throw ParseError("empty rational");

    auto digits = [](std::string_view d) {
        if (d.empty())
            return false;
        for (char c : d)
            if (!std::isdigit(static_cast<unsigned char>(c)))
                return false;
        return true;
    };

    std::string_view body = s;
    bool neg = false;
    if (body.front() == '+' || body.front() == '-') {
        neg = body.front() == '-';
        body.remove_prefix(1);
    }

    Rational r;
    if (auto slash = body.find('/'); slash != std::string_view::npos) {
        auto p = body.substr(0, slash), q = body.substr(slash + 1);
        if (!digits(p) || !digits(q))
            throw ParseError("malformed rational '" + s + "'");
        Integer den{std::string(q)};
        if (den == 0)
            throw ParseError("zero denominator in '" + s + "'");
        r = Rational(Integer{std::string(p)}, den);
        r.canonicalize();
    } else {
        std::string_view mant = body;
        long exp10 = 0;
        if (auto e = body.find_first_of("eE"); e != std::string_view::npos) {
            mant = body.substr(0, e);
            auto ex = body.substr(e + 1);
            bool eneg = false;
            if (!ex.empty() && (ex.front() == '+' || ex.front() == '-')) {
                eneg = ex.front() == '-';
                ex.remove_prefix(1);
            }
            if (!digits(ex) || ex.size() > 6)
                throw ParseError("malformed exponent in '" + s + "'");
            exp10 = std::stol(std::string(ex));
            if (eneg)
                exp10 = -exp10;
        }
        std::string ip(mant), fp;
        if (auto dot = mant.find('.'); dot != std::string_view::npos) {
            ip = std::string(mant.substr(0, dot));
            fp = std::string(mant.substr(dot + 1));
        }
        if (ip.empty())
            ip = "0";
        if (!digits(ip) || (!fp.empty() && !digits(fp)))
            throw ParseError("malformed rational '" + s + "'");
        exp10 -= static_cast<long>(fp.size());
        Integer n(ip + fp), scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
        r = exp10 < 0 ? Rational(n, scale) : Rational(n * scale);
        r.canonicalize();
    }
    return neg ? Rational(-r) : r;
}

inline Rational floor_div(const Rational& a, const Rational& b)
{
    Rational q = a / b;
    Integer f;
    mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return Rational(f);
}

}
