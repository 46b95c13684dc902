#include <gtest/gtest.h>

#include <fstream>

#include "oqk/ainfty.hpp"
#include "oqk/ainfty_json.hpp"
#include "support.hpp"

using namespace oqk;
using oqk::testing::q;

namespace {

const Rational C(10);

AInfinityStructure load_structure(const std::string& name)
{
    std::ifstream in(std::string(OQK_FIXTURES) + "/" + name);
    return structure_from_json(json::parse(in));
}

Scalar one() { return Scalar::constant(1, C); }

Cochain gen(const AInfinityStructure& s, const std::string& name, const Scalar& c = one())
{
    return Cochain::generator(s.basis().index(name), c);
}

// x (degree 0) -> y (degree 1) with coefficient c.
AInfinityStructure two_term(const Scalar& c)
{
    AInfinityStructure s(GradedBasis({{"x", 0}, {"y", 1}}), C);
    s.add({"x"}, "y", c);
    return s;
}

AInfinityStructure flat_torus(int n) { return homotopy_unit_extend(exterior_algebra(n, C), 0); }

}

TEST(Compose, UnitOnStrictUnitalFixture)
{
    auto s = flat_torus(2);
    EXPECT_EQ(compose(s, {gen(s, "e"), gen(s, "x1")}), gen(s, "x1"));
    EXPECT_EQ(compose(s, {gen(s, "e"), gen(s, "e")}), gen(s, "e"));
}

TEST(Compose, DifferentialSquaresToZero)
{
    auto s = two_term(one());
    Cochain d = compose(s, {gen(s, "x")});
    EXPECT_EQ(d, gen(s, "y"));
    EXPECT_TRUE(compose(s, {d}).is_zero());
}

TEST(Compose, AssociativeTableValue)
{
    auto s = load_structure("assoc.json");
    EXPECT_EQ(compose(s, {gen(s, "e11"), gen(s, "e12")}), gen(s, "e12"));
    EXPECT_EQ(compose(s, {gen(s, "e12"), gen(s, "e22")}), gen(s, "e12"));
    EXPECT_TRUE(compose(s, {gen(s, "e22"), gen(s, "e12")}).is_zero());
}

TEST(VerifyAInfty, AssociativeFixturePasses)
{
    auto s = load_structure("assoc.json");
    EXPECT_TRUE(verify_ainfty(s, 6).ok());
}

TEST(VerifyAInfty, PerturbedFixtureResidualAtOrderQ)
{
    auto s = load_structure("assoc_perturbed.json");
    auto rep = verify_ainfty(s, 4);
    ASSERT_FALSE(rep.ok());
    // (e12 e22) e22 - e12 (e22 e22) with e12 e22 = (1 + q) e12
    const Tuple bad{s.basis().index("e12"), s.basis().index("e22"), s.basis().index("e22")};
    bool found = false;
    for (const auto& v : rep.violations) {
        EXPECT_EQ(v.residual.valuation(), Valuation{Rational(1)});
        if (v.inputs == bad && v.output == s.basis().index("e12")) {
            found = true;
            Scalar expect = Scalar::from_text("q + q^2", C);
            EXPECT_TRUE(v.residual == expect || v.residual == -expect) << v.residual.to_text();
        }
    }
    EXPECT_TRUE(found);
}

TEST(VerifyAInfty, EveryProductPerturbationFails)
{
    auto s = load_structure("assoc.json");
    for (const auto& [in, outs] : s.table())
        for (const auto& [o, c] : outs) {
            AInfinityStructure p = s;
            p.add(in, o, q(1, C));
            auto rep = verify_ainfty(p, 4);
            ASSERT_FALSE(rep.ok()) << tuple_str(s.basis(), in);
            for (const auto& v : rep.violations) {
                EXPECT_EQ(v.inputs.size(), 3u);
                EXPECT_EQ(v.residual.valuation(), Valuation{Rational(1)});
            }
        }
}

TEST(VerifyAInfty, ArityOneDifferential)
{
    EXPECT_TRUE(verify_ainfty(two_term(q(1, C)), 1).ok());
    AInfinityStructure s(GradedBasis({{"x", 0}, {"y", 1}, {"z", 2}}), C);
    s.add({"x"}, "y", one());
    s.add({"y"}, "z", one());
    EXPECT_FALSE(verify_ainfty(s, 1).ok());
}

TEST(VerifyAInfty, ExteriorAlgebraAndExtension)
{
    EXPECT_TRUE(verify_ainfty(exterior_algebra(3, C), 4).ok());
    EXPECT_TRUE(verify_ainfty(flat_torus(2), 4).ok());
}

TEST(StrictUnit, ExtensionPasses)
{
    auto s = flat_torus(2);
    EXPECT_TRUE(verify_strict_unit(s, *s.basis().unit()).ok);
}

TEST(StrictUnit, HigherInsertionFails)
{
    auto s = flat_torus(2);
    s.add({"x1", "e", "x2"}, "x1", q(1, C));
    auto rep = verify_strict_unit(s, *s.basis().unit());
    EXPECT_FALSE(rep.ok);
    ASSERT_TRUE(rep.counterexample.has_value());
    const Tuple expect{s.basis().index("x1"), s.basis().index("e"), s.basis().index("x2")};
    EXPECT_EQ(*rep.counterexample, expect);
}

TEST(Curvature, ZeroCochainGivesM0)
{
    AInfinityStructure s = exterior_algebra(2, C);
    s.add(Tuple{}, 0, q(Rational(1, 2), C));
    EXPECT_EQ(curvature(s, Cochain(C)), Cochain::generator(0, q(Rational(1, 2), C)));
}

TEST(Curvature, ClosedCochainOnFlatAlgebra)
{
    auto s = flat_torus(2);
    Cochain b = gen(s, "x1", q(1, C)) + gen(s, "x2", Scalar::from_text("2q^(1/2)", C));
    EXPECT_TRUE(curvature(s, b).is_zero());
}

TEST(Curvature, ValuationZeroDiverges)
{
    auto s = flat_torus(2);
    EXPECT_THROW(curvature(s, gen(s, "x1")), DivergentSeries);
}

TEST(Potential, CanonicalCochain)
{
    const Scalar w = Scalar::from_text("3q^(1/2) - q^2", C);
    AInfinityStructure base = exterior_algebra(2, C);
    base.add(Tuple{}, 0, w);
    auto s = homotopy_unit_extend(base, 0);
    Cochain b = canonical_cochain(s, w);
    EXPECT_TRUE(is_weakly_bounding(s, b));
    EXPECT_EQ(potential(s, b), w);
    EXPECT_EQ(curvature(s, b), gen(s, "e", w));
}

TEST(Potential, FlatZero)
{
    auto s = flat_torus(2);
    EXPECT_TRUE(potential(s, Cochain(C)).is_zero());
}

TEST(Potential, NonUnitCurvatureThrows)
{
    auto s = load_structure("torus2_curved.json");
    EXPECT_FALSE(is_weakly_bounding(s, Cochain(C)));
    EXPECT_THROW(potential(s, Cochain(C)), NotWeaklyBounding);
}

TEST(Potential, AddingUnitMultipleShiftsByLambdaSquared)
{
    auto s = flat_torus(2);
    Cochain b = gen(s, "x1", q(1, C)) + gen(s, "x2", q(2, C));
    for (const char* l : {"q", "2q^(1/3)", "-q^3"}) {
        Scalar lambda = Scalar::from_text(l, C);
        Cochain d = curvature(s, b + gen(s, "e", lambda)) - curvature(s, b);
        EXPECT_EQ(d, gen(s, "e", lambda * lambda)) << l;
        EXPECT_NE(potential(s, b + gen(s, "e", lambda)), potential(s, b));
    }
}

TEST(Deform, ZeroIsIdentity)
{
    auto s = flat_torus(2);
    auto d = deform(s, Cochain(C));
    EXPECT_EQ(d.table(), s.table());
}

TEST(Deform, PassesVerifyAndSquaresToZero)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const Scalar w = oqk::testing::random_positive(rng, C);
        AInfinityStructure base = exterior_algebra(2, C);
        base.add(Tuple{}, 0, w);
        auto s = homotopy_unit_extend(base, 0);
        Cochain b = oqk::testing::random_odd(rng, 2, C) + canonical_cochain(s, w);
        auto d = deform(s, b);
        EXPECT_TRUE(verify_ainfty(d, 4).ok());
        EXPECT_TRUE(verify_strict_unit(d, *d.basis().unit()).ok);
        for (int i = 0; i < d.basis().size(); ++i) {
            Cochain x = Cochain::generator(i, one());
            EXPECT_TRUE(compose(d, {compose(d, {x})}).is_zero()) << d.basis().name(i);
        }
    }
}

TEST(Deform, RejectsNonBounding)
{
    auto s = load_structure("torus2_curved.json");
    Cochain b = gen(s, "a", q(1, C));
    EXPECT_THROW(deform(s, b), NotWeaklyBounding);
}

TEST(VerifyMorphism, Identity)
{
    auto s = std::make_shared<const AInfinityStructure>(flat_torus(2));
    EXPECT_TRUE(verify_morphism(Morphism::identity(s), 4).ok());
    EXPECT_TRUE(verify_unital_morphism(Morphism::identity(s)).ok);
}

TEST(VerifyMorphism, NilpotentFamilyPasses)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        auto fam = oqk::testing::nilpotent_family(rng, 3, C);
        EXPECT_TRUE(verify_morphism(fam.phi, 3).ok());
        EXPECT_TRUE(verify_unital_morphism(fam.phi).ok);
        EXPECT_TRUE(fam.phi.is_higher_order_deformation());
    }
}

TEST(VerifyMorphism, PerturbedPhi2Fails)
{
    std::mt19937_64 rng(6);
    auto fam = oqk::testing::nilpotent_family(rng, 2, C);
    Morphism g = fam.phi;
    const auto& B = g.basis();
    g.add({B.index("x1"), B.index("x2")}, B.index("x1"), q(1, C));
    EXPECT_FALSE(verify_morphism(g, 3).ok());
}

TEST(VerifyMorphism, NonUnitalFails)
{
    auto s = std::make_shared<const AInfinityStructure>(flat_torus(2));
    const auto& B = s->basis();
    Morphism f = Morphism::identity(s);
    f.add(Tuple{}, B.index("x1"), q(1, C));
    f.add({B.index("e"), B.index("x1")}, B.index("xM"), q(1, C));
    auto rep = verify_unital_morphism(f);
    EXPECT_FALSE(rep.ok);
    EXPECT_TRUE(rep.counterexample.has_value());
    Morphism g = Morphism::identity(s);
    g.add({B.index("e"), B.index("x1")}, B.index("xM"), q(1, C));
    EXPECT_FALSE(verify_unital_morphism(g).ok);
}

TEST(VerifyMorphism, ExtendedMorphismFixesP)
{
    std::mt19937_64 rng(7);
    AInfinityStructure base = exterior_algebra(2, C);
    auto bs = std::make_shared<const AInfinityStructure>(base);
    auto fam = oqk::testing::nilpotent_family(rng, 2, C);
    Morphism f(bs, bs);
    for (unsigned S = 0; S < fam.images.size(); ++S)
        for (const auto& [o, c] : fam.images[S].coeffs())
            f.add({static_cast<int>(S)}, o, c);
    auto ext = std::make_shared<const AInfinityStructure>(homotopy_unit_extend(base, 0));
    Morphism g = homotopy_unit_extend(f, ext, ext);
    EXPECT_TRUE(verify_unital_morphism(g).ok);
    EXPECT_TRUE(verify_morphism(g, 3).ok());
    const int p = *g.basis().weighted();
    EXPECT_EQ(pushforward(g, Cochain::generator(p, q(1, C))), Cochain::generator(p, q(1, C)));
}

TEST(Pushforward, IdentityAndFamily)
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        auto fam = oqk::testing::nilpotent_family(rng, 3, C);
        Cochain b = oqk::testing::random_odd(rng, 3, C);
        EXPECT_EQ(pushforward(Morphism::identity(fam.s), b), b);
        EXPECT_EQ(pushforward(fam.phi, b), oqk::testing::apply_linear(fam.images, b));
    }
}

TEST(Pushforward, CanonicalCochainIsFixed)
{
    std::mt19937_64 rng(9);
    const Scalar w = Scalar::from_text("q^(1/2) + q", C);
    auto fam = oqk::testing::nilpotent_family(rng, 2, C, w);
    Cochain b = canonical_cochain(*fam.s, w);
    EXPECT_EQ(pushforward(fam.phi, b), b);
}

TEST(InvertPushforward, IdentityAndClosedForm)
{
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        auto fam = oqk::testing::nilpotent_family(rng, 3, C);
        Cochain t = oqk::testing::random_odd(rng, 3, C);
        EXPECT_EQ(invert_pushforward(Morphism::identity(fam.s), t), t);
        // t - qN t + (qN)^2 t - ... with qN = phi_1 - id
        Cochain sum = t, term = t;
        for (int k = 0; k < 40 && !term.is_zero(); ++k) {
            term = (oqk::testing::apply_linear(fam.images, term) - term).scaled(Scalar::constant(-1, C));
            sum = sum + term;
        }
        EXPECT_EQ(invert_pushforward(fam.phi, t), sum);
    }
}

TEST(InvertPushforward, RoundTripProperty)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        auto fam = oqk::testing::nilpotent_family(rng, 3, C);
        Cochain t = oqk::testing::random_odd(rng, 3, C);
        EXPECT_EQ(pushforward(fam.phi, invert_pushforward(fam.phi, t)), t);
        EXPECT_EQ(invert_pushforward(fam.phi, pushforward(fam.phi, t)), t);
    }
}

TEST(InvertPushforward, RequiresHigherOrderDeformation)
{
    auto s = std::make_shared<const AInfinityStructure>(flat_torus(2));
    Morphism f(s, s);
    for (int i = 0; i < s->basis().size(); ++i)
        f.add({i}, i, Scalar::constant(2, C));
    EXPECT_THROW(invert_pushforward(f, Cochain::generator(1, q(1, C))), NotHigherOrderDeformation);
}

TEST(Intertwine, IdentityAndFamily)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const Scalar w = oqk::testing::random_positive(rng, C);
        auto fam = oqk::testing::nilpotent_family(rng, 2, C, w);
        Cochain b = oqk::testing::random_odd(rng, 2, C) + canonical_cochain(*fam.s, w);
        auto id = check_intertwine(Morphism::identity(fam.s), b);
        EXPECT_TRUE(id.ok);
        auto rep = check_intertwine(fam.phi, b);
        ASSERT_TRUE(rep.ok) << (rep.messages.empty() ? "" : rep.messages[0]);
        EXPECT_EQ(*rep.w1, w);
        EXPECT_EQ(*rep.w2, w);
    }
}

TEST(Intertwine, FailsOnlyWhenMorphismRelationFails)
{
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const Scalar w = oqk::testing::random_positive(rng, C);
        auto fam = oqk::testing::nilpotent_family(rng, 2, C, w);
        Morphism g = fam.phi;
        const auto& B = g.basis();
        if (trial % 2)
            g.add({B.index("x1"), B.index("x2")}, B.index("x1"), oqk::testing::random_positive(rng, C));
        Cochain b = oqk::testing::random_odd(rng, 2, C) + canonical_cochain(*fam.s, w);
        auto rep = check_intertwine(g, b);
        if (!rep.ok) {
            EXPECT_FALSE(verify_morphism(g, 3).ok());
        }
    }
}

TEST(DeformMorphism, ZeroAndChainMap)
{
    std::mt19937_64 rng(14);
    const Scalar w = Scalar::from_text("2q", C);
    auto flat = oqk::testing::nilpotent_family(rng, 2, C);
    Morphism g0 = deform_morphism(flat.phi, Cochain(C));
    EXPECT_EQ(g0.table(), flat.phi.table());
    auto fam = oqk::testing::nilpotent_family(rng, 2, C, w);
    Cochain b = oqk::testing::random_odd(rng, 2, C) + canonical_cochain(*fam.s, w);
    Morphism g = deform_morphism(fam.phi, b);
    EXPECT_TRUE(verify_morphism(g, 3).ok());
    auto phi1 = [&](const Cochain& x) {
        Cochain r(C);
        for (const auto& [i, c] : x.coeffs())
            if (auto o = g.lookup({i}))
                for (const auto& [out, v] : *o)
                    r.add(out, v * c);
        return r;
    };
    for (int i = 0; i < g.basis().size(); ++i) {
        Cochain x = Cochain::generator(i, one());
        EXPECT_EQ(compose(g.target(), {phi1(x)}), phi1(compose(g.source(), {x}))) << g.basis().name(i);
    }
}

TEST(CohomologyRank, Examples)
{
    auto s = flat_torus(2);
    EXPECT_EQ(cohomology_rank(exterior_algebra(2, C), Cochain(C)), 4);
    EXPECT_EQ(cohomology_rank(s, Cochain(C)), 4);
    EXPECT_EQ(cohomology_rank(two_term(q(1, C)), Cochain(C)), 0);
}

TEST(CohomologyRank, InvariantUnderConjugation)
{
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 4;
        // random m_1 with m_1^2 = 0: chain x0 -> x1 -> ... with a random kernel pattern
        std::vector<std::vector<Scalar>> M(n, std::vector<Scalar>(n, Scalar::zero(C)));
        std::uniform_int_distribution<int> pick(0, 2);
        for (int i = 0; i + 1 < n; i += 2)
            if (pick(rng))
                M[i + 1][i] = oqk::testing::random_positive(rng, C);
        std::vector<std::vector<Scalar>> G(n, std::vector<Scalar>(n, Scalar::zero(C))), Gi = G;
        for (int i = 0; i < n; ++i)
            G[i][i] = Gi[i][i] = one();
        // unipotent change of basis within matching parity blocks
        const int a = 0, b = 2;
        Scalar t = oqk::testing::random_scalar(rng, C, 0);
        G[b][a] = t;
        Gi[b][a] = -t;
        auto mul = [&](const auto& X, const auto& Y) {
            std::vector<std::vector<Scalar>> Z(n, std::vector<Scalar>(n, Scalar::zero(C)));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        Z[i][j] += X[i][k] * Y[k][j];
            return Z;
        };
        auto conj = mul(mul(G, M), Gi);
        EXPECT_EQ(detail::rank(M), detail::rank(conj)) << [&] {
            std::string o;
            for (auto* X : {&M, &conj})
                for (auto& r : *X) {
                    for (auto& c : r)
                        o += c.to_text() + " | ";
                    o += "\n";
                }
            return o;
        }();
    }
}

TEST(HomotopyUnit, ForcedTerms)
{
    auto s = flat_torus(2);
    const int e = *s.basis().unit(), p = *s.basis().weighted();
    Cochain mp = compose(s, {Cochain::generator(p, one())});
    EXPECT_EQ(mp, gen(s, "e") - gen(s, "xM"));
    for (int k = 2; k <= 4; ++k) {
        std::vector<Cochain> ps(static_cast<std::size_t>(k), Cochain::generator(p, one()));
        EXPECT_TRUE(compose(s, ps).is_zero()) << k;
    }
    EXPECT_EQ(e, s.basis().size() - 2);
}

TEST(HomotopyUnit, CorrectionConstraints)
{
    AInfinityStructure base = exterior_algebra(2, C);
    EXPECT_THROW(homotopy_unit_extend(base, 0, {{{"p"}, "x1", q(1, C)}}), ConstraintViolation);
    EXPECT_THROW(homotopy_unit_extend(base, 0, {{{"p", "p"}, "xM", q(1, C)}}), ConstraintViolation);
    EXPECT_THROW(homotopy_unit_extend(base, 0, {{{"x1", "x2"}, "x12", q(1, C)}}), ConstraintViolation);
    EXPECT_THROW(homotopy_unit_extend(base, 0, {{{"e", "p"}, "p", q(1, C)}}), ConstraintViolation);
}

TEST(Json, RoundTripAndAlternateLayout)
{
    auto s = load_structure("assoc.json");
    EXPECT_EQ(structure_from_json(structure_to_json(s)).table(), s.table());
    json j = structure_to_json(s);
    json alt = json::array();
    for (const auto& e : j.at("m"))
        alt.push_back({{"arity", e.at("in").size()}, {"inputs", e.at("in")}, {"output", e.at("out")},
                       {"scalar", e.at("coef")}});
    j.erase("m");
    j["coeffs"] = alt;
    EXPECT_EQ(structure_from_json(j).table(), s.table());
}

TEST(Json, MalformedThrows)
{
    EXPECT_THROW(structure_from_json(json::parse(R"({"basis": 3})")), Error);
    EXPECT_THROW(structure_from_json(json::parse(
                     R"({"basis": [{"name": "x", "degree": 0}], "m": [{"in": ["x"], "out": "y", "coef": 1}]})")),
                 Error);
}
