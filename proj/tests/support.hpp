#pragma once

#include <map>
#include <random>

#include "oqk/ainfty.hpp"
#include "oqk/novikov.hpp"

namespace oqk::testing {

// Random scalar with exponents in (lo + k/den) and small integer coefficients.
inline Scalar random_scalar(std::mt19937_64& rng, const Rational& cutoff, int lo = 0, int terms = 4, int den = 3)
{
    std::uniform_int_distribution<int> n(0, terms), ex(lo * den, 8 * den), co(-5, 5);
    std::vector<Scalar::Term> t;
    const int k = n(rng);
    for (int i = 0; i < k; ++i)
        t.push_back({Rational(ex(rng), den), Rational(co(rng))});
    return Scalar::from_terms(std::move(t), cutoff);
}

inline Scalar random_positive(std::mt19937_64& rng, const Rational& cutoff, int terms = 3)
{
    std::uniform_int_distribution<int> n(1, terms), ex(1, 12), co(-4, 4);
    std::vector<Scalar::Term> t;
    const int k = n(rng);
    for (int i = 0; i < k; ++i)
        t.push_back({Rational(ex(rng), 2), Rational(co(rng))});
    return Scalar::from_terms(std::move(t), cutoff);
}

// Schoolbook product on an exponent map, truncated at the cutoff.
inline std::map<Rational, Rational> naive_mul(const Scalar& a, const Scalar& b, const Rational& cutoff)
{
    std::map<Rational, Rational> m;
    for (const auto& x : a.terms())
        for (const auto& y : b.terms())
            if (x.exp + y.exp < cutoff)
                m[Rational(x.exp + y.exp)] += x.coef * y.coef;
    std::erase_if(m, [](const auto& kv) { return kv.second == 0; });
    return m;
}

inline std::map<Rational, Rational> as_map(const Scalar& a)
{
    std::map<Rational, Rational> m;
    for (const auto& x : a.terms())
        m[x.exp] = x.coef;
    return m;
}

inline Scalar q(const Rational& e, const Rational& cutoff = kDefaultCutoff, const Rational& c = 1)
{
    return Scalar::monomial(c, e, cutoff);
}

}

#include "oqk/toric.hpp"

namespace oqk::testing {

// phi_1 = algebra automorphism of H(T^n) induced by x_i -> x_i + q sum_{j<i} N_ij x_j.
struct NilpotentFamily {
    int n = 0;
    StructurePtr s;
    std::vector<std::vector<int>> N;
    std::vector<Cochain> images;  // phi_1 of each basis element (exterior part)
    Morphism phi;
};

inline std::vector<Cochain> automorphism_images(const AInfinityStructure& s, int n, const std::vector<std::vector<int>>& N)
{
    const Rational C = s.cutoff();
    const unsigned full = 1u << n;
    std::vector<Cochain> img(full, Cochain(C));
    img[0] = Cochain::generator(0, Scalar::constant(1, C));
    for (int i = 0; i < n; ++i) {
        Cochain c = Cochain::generator(1 << i, Scalar::constant(1, C));
        for (int j = 0; j < n; ++j)
            if (N[i][j])
                c.add(1 << j, Scalar::monomial(N[i][j], 1, C));
        img[1u << i] = c;
    }
    for (unsigned S = 1; S < full; ++S) {
        if (std::popcount(S) < 2)
            continue;
        const unsigned low = S & (~S + 1u), rest = S ^ low;
        const int ws = *wedge_sign(low, rest, n);
        img[S] = compose(s, {img[low], img[rest]}).scaled(Scalar::constant(-ws, C));
    }
    return img;
}

inline NilpotentFamily nilpotent_family(std::mt19937_64& rng, int n, const Rational& cutoff,
                                        const Scalar& curvature = Scalar())
{
    AInfinityStructure base = exterior_algebra(n, cutoff, "T");
    if (!curvature.is_zero())
        base.add(Tuple{}, 0, curvature);
    auto s = std::make_shared<const AInfinityStructure>(homotopy_unit_extend(base, 0));
    std::uniform_int_distribution<int> d(-3, 3);
    std::vector<std::vector<int>> N(n, std::vector<int>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j)
            N[i][j] = d(rng);
    auto img = automorphism_images(*s, n, N);
    Morphism phi(s, s);
    for (unsigned S = 0; S < img.size(); ++S)
        for (const auto& [o, c] : img[S].coeffs())
            phi.add({static_cast<int>(S)}, o, c);
    phi.add({*s->basis().unit()}, *s->basis().unit(), Scalar::constant(1, cutoff));
    phi.add({*s->basis().weighted()}, *s->basis().weighted(), Scalar::constant(1, cutoff));
    return {n, s, N, img, phi};
}

// Random odd cochain of positive valuation on the exterior generators.
inline Cochain random_odd(std::mt19937_64& rng, int n, const Rational& cutoff)
{
    Cochain b(cutoff);
    for (unsigned S = 1; S < (1u << n); ++S)
        if (std::popcount(S) % 2)
            b.add(static_cast<int>(S), random_positive(rng, cutoff));
    return b;
}

// Linear map on cochains given by a dense table of images.
inline Cochain apply_linear(const std::vector<Cochain>& img, const Cochain& x)
{
    Cochain r(x.cutoff());
    for (const auto& [i, c] : x.coeffs())
        r = r + img.at(static_cast<std::size_t>(i)).scaled(c);
    return r;
}

}
