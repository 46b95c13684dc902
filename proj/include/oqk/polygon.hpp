#pragma once

#include <bit>
#include <string>
#include <vector>

#include "oqk/ainfty.hpp"
#include "oqk/ainfty_json.hpp"

namespace oqk {

struct PolygonReport {
    int l = 0;
    int ambient_factors = 0;
    int ambient_real_dim = 0;
    int quotient_real_dim = 0;
    int lagrangian_real_dim = 0;
    int reduced_lagrangian_real_dim = 0;
    std::vector<long> betti;  // betti[k] = b_{2k}((S^2)^l)
    long betti_sum = 0;
    int min_maslov = 0;
    int min_maslov_antidiagonal = 0;
    int min_maslov_triangle = 0;
    int min_chern_number = 0;
    bool doubled_class_spherical = true;
    int unstable_coincidences = 0;
    int unstable_real_codim = 0;
    bool equivariantly_rational = true;
    int min_equivariant_chern = 0;
    long expected_rank = 0;

    json to_json() const
    {
        return {{"l", l},
                {"ambient_factors", ambient_factors},
                {"ambient_real_dim", ambient_real_dim},
                {"quotient_real_dim", quotient_real_dim},
                {"lagrangian_real_dim", lagrangian_real_dim},
                {"reduced_lagrangian_real_dim", reduced_lagrangian_real_dim},
                {"betti_even", betti},
                {"betti_sum", betti_sum},
                {"min_maslov", min_maslov},
                {"min_maslov_antidiagonal", min_maslov_antidiagonal},
                {"min_maslov_triangle", min_maslov_triangle},
                {"min_chern_number", min_chern_number},
                {"doubled_class_spherical", doubled_class_spherical},
                {"unstable_locus", "at least " + std::to_string(unstable_coincidences) + " equal coordinates"},
                {"unstable_real_codim", unstable_real_codim},
                {"equivariantly_rational", equivariantly_rational},
                {"min_equivariant_chern", min_equivariant_chern},
                {"expected_rank", expected_rank}};
    }
};

inline PolygonReport polygon_report(int l)
{
    if (l < 1)
        throw ParseError("polygon space needs l >= 1");
    PolygonReport r;
    r.l = l;
    r.ambient_factors = 2 * l + 3;
    r.ambient_real_dim = 2 * r.ambient_factors;
    r.quotient_real_dim = r.ambient_real_dim - 2 * 3;
    r.lagrangian_real_dim = r.ambient_factors;
    r.reduced_lagrangian_real_dim = 2 * l;
    long c = 1;
    for (int k = 0; k <= l; ++k) {
        r.betti.push_back(c);
        r.betti_sum += c;
        c = c * (l - k) / (k + 1);
    }
    r.min_maslov_antidiagonal = 4;
    r.min_maslov_triangle = 2;
    r.min_maslov = 2;
    r.min_chern_number = 2;
    r.unstable_coincidences = l + 2;
    // l + 2 unit vectors coinciding: 2 (l + 1) real conditions
    r.unstable_real_codim = 2 * (l + 1);
    r.min_equivariant_chern = 1;
    r.expected_rank = r.betti_sum;
    return r;
}

struct PolygonFixture {
    AInfinityStructure structure;
    Cochain cochain;
    long expected_rank = 0;
};

inline std::string polygon_name(unsigned mask, int l)
{
    if (mask == 0)
        return "xM";
    std::string s = "x";
    for (int i = 0; i < l; ++i)
        if (mask >> i & 1u)
            s += std::to_string(i + 1);
    return s;
}

// Cup product on H*((S^2)^l) with curvature W x_M, extended by e and p; the cochain is W p.
inline PolygonFixture polygon_fixture(int l, const Rational& cutoff, const Scalar& w)
{
    if (l < 1 || l > 12)
        throw ParseError("polygon fixture supports 1 <= l <= 12");
    GradedBasis B;
    for (unsigned m = 0; m < (1u << l); ++m)
        B.add({polygon_name(m, l), 2 * std::popcount(m), GenTag::unforgettable});
    AInfinityStructure s(B, cutoff, "Fuk(Lbar_" + std::to_string(l) + ")");
    const Scalar one = Scalar::constant(1, cutoff);
    for (unsigned a = 0; a < (1u << l); ++a)
        for (unsigned b = 0; b < (1u << l); ++b)
            if (!(a & b))
                s.add({static_cast<int>(a), static_cast<int>(b)}, static_cast<int>(a | b), one);
    if (!w.is_zero())
        s.add(Tuple{}, 0, w);
    AInfinityStructure ext = homotopy_unit_extend(s, 0);
    Cochain b = canonical_cochain(ext, w.truncated(cutoff));
    return {std::move(ext), std::move(b), 1L << l};
}

inline PolygonFixture polygon_fixture(int l, const Rational& cutoff = kDefaultCutoff)
{
    return polygon_fixture(l, cutoff, Scalar::zero(cutoff));
}

}
