// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "oqk/ainfty.hpp"
#include "oqk/ainfty_json.hpp"
#include "oqk/polygon.hpp"
#include "oqk/toric.hpp"
#include "oqk/trees_vortex.hpp"
#include "oqk/trees_weighted.hpp"
#include "support.hpp"
#include "tree_oracle.hpp"

using namespace oqk;
using oqk::testing::q;

namespace {

const Rational C(10);

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what)
    {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

AInfinityStructure load_structure(const std::string& name)
{
    std::ifstream in(std::string(OQK_FIXTURES) + "/" + name);
    return structure_from_json(json::parse(in));
}

Outcome novikov_suite()
{
    Outcome r;
    std::mt19937_64 rng(101);
    const Scalar one = Scalar::constant(1, C);
    for (int i = 0; i < 1000 && r.ok; ++i) {
        Scalar a = oqk::testing::random_scalar(rng, C), b = oqk::testing::random_scalar(rng, C),
               c = oqk::testing::random_scalar(rng, C);
        r.require((a + b) + c == a + (b + c) && a + b == b + a, "addition axioms");
        r.require((a * b) * c == a * (b * c) && a * b == b * a, "multiplication axioms");
        r.require(a * (b + c) == a * b + a * c, "distributivity");
        r.require(oqk::testing::as_map(a * b) == oqk::testing::naive_mul(a, b, C), "product vs naive convolution");
        Valuation va = a.valuation(), vb = b.valuation();
        r.require((a + b).valuation() >= Valuation::min(va, vb), "ultrametric inequality");
        if (!a.is_zero() && !b.is_zero() && *va.value + *vb.value < C)
            r.require((a * b).valuation() == va + vb, "valuation is multiplicative");
        if (!a.is_zero())
            r.require((a * nv_inv(a) - one).is_zero(), "inversion round trip");
    }
    return r;
}

Outcome verifier()
{
    Outcome r;
    auto s = load_structure("assoc.json");
    r.require(s.basis().size() == 3, "fixture has 3 generators");
    r.require(verify_ainfty(s, 6).ok(), "associative fixture fails at arity 6");
    int perturbed = 0;
    for (const auto& [in, outs] : s.table())
        for (const auto& [o, c] : outs) {
            AInfinityStructure p = s;
            p.add(in, o, q(1, C));
            auto rep = verify_ainfty(p, 4);
            r.require(!rep.ok(), "perturbation of " + tuple_str(s.basis(), in) + " passes");
            for (const auto& v : rep.violations)
                r.require(v.inputs.size() == 3 && v.residual.valuation() == Valuation{Rational(1)},
                          "residual not localized at order q");
            ++perturbed;
        }
    r.detail = r.ok ? std::to_string(perturbed) + " perturbations all fail" : r.detail;
    return r;
}

Outcome pushforward_roundtrip()
{
    Outcome r;
    std::mt19937_64 rng(103);
    for (int trial = 0; trial < 100 && r.ok; ++trial) {
        const bool curved = trial % 2;
        const Scalar w = curved ? oqk::testing::random_positive(rng, C) : Scalar::zero(C);
        auto fam = oqk::testing::nilpotent_family(rng, 3, C, w);
        Cochain t = oqk::testing::random_odd(rng, 3, C);
        r.require(pushforward(fam.phi, invert_pushforward(fam.phi, t)) == t, "pushforward after invert");
        r.require(invert_pushforward(fam.phi, pushforward(fam.phi, t)) == t, "invert after pushforward");
        Cochain b = curved ? Cochain(oqk::testing::random_odd(rng, 3, C) + canonical_cochain(*fam.s, w))
                           : oqk::testing::random_odd(rng, 3, C);
        auto rep = check_intertwine(fam.phi, b);
        r.require(rep.ok && rep.w1 && rep.w2 && *rep.w1 == *rep.w2, "W1(b) != W2(phi(b))");
        if (rep.ok && rep.w1)
            r.require(*rep.w1 == w, "potential differs from the curvature constant");
    }
    r.detail = r.ok ? "100 fixtures, flat and curved" : r.detail;
    return r;
}

Outcome channel_constraints()
{
    Outcome r;
    for (const char* name : {"CP1", "CP2", "CP1xCP1"}) {
        Fan f = builtin_fan(name);
        auto qd = quotient_data(f);
        auto ext = homotopy_unit_extend(generate_fukaya_fixture(f, qd, C), 0);
        const auto& B = ext.basis();
        const int e = *B.unit(), p = *B.weighted(), xm = B.index("xM");
        const Cochain P = Cochain::generator(p, Scalar::constant(1, C));
        r.require(compose(ext, {P}) == Cochain::generator(e, Scalar::constant(1, C)) -
                                           Cochain::generator(xm, Scalar::constant(1, C)),
                  std::string(name) + ": m1(p) != e - xM");
        for (int k = 2; k <= 5; ++k)
            r.require(compose(ext, std::vector<Cochain>(static_cast<std::size_t>(k), P)).is_zero(),
                      std::string(name) + ": m_k(p,...,p) != 0");
        r.require(verify_strict_unit(ext, e).ok, std::string(name) + ": strict unit");
        Scalar W = ghv_potential(f, qd, C).evaluate(std::vector<Rational>(static_cast<std::size_t>(f.dim()), 1));
        r.require(curvature(ext, canonical_cochain(ext, W)) == Cochain::generator(e, W),
                  std::string(name) + ": sum m_k(Wp,...) != W e");
    }
    return r;
}

Outcome weighted_shapes()
{
    Outcome r;
    const auto y = enumerate_weighted_shapes("Y").size(), phi = enumerate_weighted_shapes("Phi").size();
    r.require(y == 9 && phi == 3, "counts differ");
    r.detail = "Y " + std::to_string(y) + ", Phi " + std::to_string(phi);
    return r;
}

Outcome dimension_formula()
{
    Outcome r;
    long types = 0, collapses = 0;
    for (auto [kbar, k] : {std::pair{2, 0}, std::pair{3, 0}, std::pair{2, 1}}) {
        TreeBuilder tb;
        int v = tb.vertex(Color::up);
        for (int i = 0; i < kbar; ++i)
            tb.tail(v);
        for (int i = 0; i < k; ++i)
            tb.leaf(v);
        r.require(dimension(tb.done()) == 2 * kbar + 2 * k - 2, "top dimension");
        EnumOptions o;
        o.max_vertices = 5;
        o.inputs = kbar;
        o.leaves = k;
        o.nonbase = true;
        o.max_breakings = 2;
        for (const auto& t : enumerate_types(o)) {
            ++types;
            const auto a = oqk::testing::oracle_terms(t);
            r.require(dimension(t) == a.dimension(), "dimension of " + canonical(t));
            for (const auto& e : enumerate_elementary(t)) {
                ++collapses;
                const int drop = dimension(e.target) - dimension(t);
                r.require(drop == oqk::testing::oracle_terms(e.target).dimension() - a.dimension() && drop > 0,
                          "collapse " + canonical(t) + " -> " + e.canon);
            }
        }
    }
    if (r.ok)
        r.detail = std::to_string(types) + " types, " + std::to_string(collapses) + " collapses";
    return r;
}

Outcome boundary_closure()
{
    Outcome r;
    std::size_t members = 0, pairs = 0, real = 0;
    for (int k = 0; k <= 2; ++k) {
        auto fam = vortex_family(Color::up, 2, k, 5);
        r.require(!fam.empty(), "empty family");
        members += fam.size();
        for (const auto& g : fam)
            for (const auto& s : classify_codim1(g))
                r.require(s.cls == "bu" || s.cls == "f1" || s.cls == "f2", "class " + s.cls);
        auto rep = pair_fake_boundaries(fam, 1, 5);
        r.require(rep.truncated.empty(), "unmatched strata beyond the bound");
        for (const auto& x : rep.real)
            r.require(x.cls == "bu", "leftover " + x.cls);
        pairs += rep.pairs.size();
        real += rep.real.size();
    }
    if (r.ok)
        r.detail = std::to_string(members) + " members, " + std::to_string(pairs) + " fake pairs, " +
                   std::to_string(real) + " bu strata";
    return r;
}

bool same_values(std::vector<Complex> a, std::vector<Complex> b)
{
    if (a.size() != b.size())
        return false;
    for (const auto& x : a) {
        auto it = std::find_if(b.begin(), b.end(), [&](const Complex& y) { return std::abs(x - y) < 1e-8; });
        if (it == b.end())
            return false;
        b.erase(it);
    }
    return true;
}

Outcome toric_potentials()
{
    Outcome r;
    SolverSettings s;
    const double q3 = std::cbrt(s.q), q2 = std::sqrt(s.q);
    std::vector<Complex> cube;
    for (int k = 0; k < 3; ++k)
        cube.push_back(3 * q3 * std::polar(1.0, 2 * std::numbers::pi * k / 3));
    const std::vector<std::pair<const char*, std::size_t>> cases = {
        {"CP1", 2}, {"CP2", 3}, {"CP1xCP1", 4}, {"CP3", 4}};
    std::string counts;
    for (const auto& [name, n] : cases) {
        Fan f = builtin_fan(name);
        auto t0 = std::chrono::steady_clock::now();
        auto rep = critical_points(ghv_potential(f, quotient_data(f), C), s);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.require(secs < 10, std::string(name) + " too slow");
        r.require(rep.points.size() == n && maximal_cones(f).size() == n, std::string(name) + " count");
        std::vector<Complex> vals;
        for (const auto& p : rep.points) {
            vals.push_back(p.value);
            r.require(p.residual < 1e-8, std::string(name) + " residual");
        }
        if (std::string(name) == "CP1")
            r.require(same_values(vals, {Complex(2 * q2), Complex(-2 * q2)}), "CP1 values");
        if (std::string(name) == "CP2")
            r.require(same_values(vals, cube), "CP2 values");
        counts += (counts.empty() ? "" : ", ") + std::string(name) + " " + std::to_string(rep.points.size());
    }
    if (r.ok)
        r.detail = counts;
    return r;
}

Outcome hypotheses()
{
    Outcome r;
    for (const char* name : {"CP1", "CP2", "CP3", "CP1xCP1", "F1"}) {
        Fan f = builtin_fan(name);
        auto h = check_hypotheses(f, quotient_data(f));
        r.require(h.ok() && h.fano, std::string(name) + " should pass as Fano");
    }
    Fan f2 = builtin_fan("F2");
    auto h2 = check_hypotheses(f2, quotient_data(f2));
    bool zero = false;
    for (const auto& rel : h2.relations)
        zero = zero || rel.degree == 0;
    r.require(h2.ok() && h2.semi_fano && !h2.fano && zero, "F2 semi-Fano with a degree-0 class");
    std::ifstream in(std::string(OQK_FIXTURES) + "/fan_f3.json");
    Fan f3 = fan_from_json(json::parse(in));
    auto h3 = check_hypotheses(f3, quotient_data(f3));
    r.require(!h3.ok() && !h3.semi_fano, "F3 should fail");
    return r;
}

Complex u0_closed(const BlaschkeFactor& b)
{
    Complex u = std::sqrt(b.tau) * std::polar(1.0, b.theta);
    for (const auto& a : b.alpha)
        u *= -a;
    return u;
}

Complex up0_closed(const BlaschkeFactor& b)
{
    Complex s = 0;
    for (std::size_t k = 0; k < b.alpha.size(); ++k) {
        Complex p = 1.0 - std::norm(b.alpha[k]);
        for (std::size_t l = 0; l < b.alpha.size(); ++l)
            if (l != k)
                p *= -b.alpha[l];
        s += p;
    }
    return std::sqrt(b.tau) * std::polar(1.0, b.theta) * s;
}

Outcome blaschke()
{
    Outcome r;
    std::mt19937_64 rng(110);
    std::uniform_real_distribution<double> rad(0.1, 0.9), ph(0, 2 * std::numbers::pi), tau(0.1, 3);
    double worst = 0;
    const double h = 1e-6;
    auto rel = [](Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    for (int t = 0; t < 100; ++t) {
        BlaschkeFactor b{tau(rng), ph(rng), {}};
        for (int k = 0; k < 1 + t % 4; ++k)
            b.alpha.push_back(std::polar(rad(rng), ph(rng)));
        for (std::size_t k = 0; k < b.alpha.size(); ++k) {
            auto fd = [&](auto f) {
                auto at = [&](Complex d) {
                    BlaschkeFactor c = b;
                    c.alpha[k] += d;
                    return f(c);
                };
                Complex fx = (at({h, 0}) - at({-h, 0})) / (2 * h), fy = (at({0, h}) - at({0, -h})) / (2 * h);
                const Complex i(0, 1);
                return std::pair{(fx - i * fy) / 2.0, (fx + i * fy) / 2.0};
            };
            auto [ua, uab] = fd(u0_closed);
            auto [pa, pab] = fd(up0_closed);
            worst = std::max({worst, rel(b.du0_dalpha(k), ua), rel(b.du0_dalphabar(k), uab),
                              rel(b.dup0_dalpha(k), pa), rel(b.dup0_dalphabar(k), pab)});
        }
    }
    r.require(worst <= 1e-6, "relative error above 1e-6");
    std::ostringstream os;
    os << "max relative error " << worst;
    if (r.ok)
        r.detail = os.str();
    return r;
}

Outcome polygons()
{
    Outcome r;
    for (int l = 1; l <= 3; ++l) {
        auto fx = polygon_fixture(l, C);
        r.require(cohomology_rank(fx.structure, fx.cochain) == (1L << l), "rank for l = " + std::to_string(l));
        r.require(polygon_report(l).betti_sum == (1L << l), "Betti sum for l = " + std::to_string(l));
    }
    return r;
}

std::string run(const std::string& cmd, int& status)
{
    std::string out;
    FILE* p = popen((cmd + " 2>&1").c_str(), "r");
    if (!p) {
        status = -1;
        return out;
    }
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0)
        out.append(buf.data(), n);
    status = pclose(p);
    return out;
}

Outcome determinism()
{
    Outcome r;
    const std::string cli = OQK_CLI, fx = OQK_FIXTURES;
    const std::vector<std::string> cmds = {
        "--seed 7 verify " + fx + "/assoc.json",
        "--seed 7 verify " + fx + "/assoc_perturbed.json",
        "--seed 7 verify " + fx + "/torus2_nilpotent.json",
        "--seed 7 mc --structure " + fx + "/torus2_curved.json",
        "--seed 7 potential --builtin CP2",
        "--seed 7 --format json potential --builtin CP1xCP1",
        "--seed 7 potential --fan " + fx + "/fan_f3.json",
        "--seed 7 trees enumerate --max-vertices 1 --type mixed --weighted --shape Y",
        "--seed 7 trees enumerate --max-vertices 3 --inputs 2",
        "--seed 7 --format json trees pair --type up --inputs 1 --leaves 1 --max-vertices 5",
        "--seed 7 trees boundary " + fx + "/vortex_up_one_leaf.json",
        "--seed 7 polygon --l 3",
    };
    for (const auto& c : cmds) {
        int s1 = 0, s2 = 0;
        std::string a = run(cli + " " + c, s1), b = run(cli + " " + c, s2);
        r.require(!a.empty() && a == b && s1 == s2, "output differs: " + c);
    }
    if (r.ok)
        r.detail = std::to_string(cmds.size()) + " commands";
    return r;
}

}

int main()
{
    const std::vector<std::tuple<int, std::string, double, std::function<Outcome()>>> criteria = {
        {1, "Novikov ring properties", 5, novikov_suite},
        {2, "A-infinity verifier", 10, verifier},
        {3, "pushforward inverse and potential", 30, pushforward_roundtrip},
        {4, "homotopy unit channel constraints", 0, channel_constraints},
        {5, "weighted shape counts", 0, weighted_shapes},
        {6, "dimension formula and collapses", 60, dimension_formula},
        {7, "boundary closure", 0, boundary_closure},
        {8, "toric potentials", 0, toric_potentials},
        {9, "hypothesis checker", 0, hypotheses},
        {10, "Blaschke derivatives", 0, blaschke},
        {11, "polygon spaces", 0, polygons},
        {12, "CLI determinism", 0, determinism},
    };
    int failed = 0;
    for (const auto& [id, name, limit, fn] : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (limit > 0 && secs > limit && o.ok) {
            o.ok = false;
            o.detail = "runtime above " + std::to_string(static_cast<int>(limit)) + " s";
        }
        failed += !o.ok;
        std::printf("%s %2d %-38s %7.2f s  %s\n", o.ok ? "PASS" : "FAIL", id, name.c_str(), secs, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
