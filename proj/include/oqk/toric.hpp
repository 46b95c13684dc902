#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <numeric>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "oqk/ainfty.hpp"
#include "oqk/errors.hpp"
#include "oqk/novikov.hpp"
#include "oqk/rational.hpp"

namespace oqk {

using IntVec = std::vector<int>;
using Complex = std::complex<double>;

struct Fan {
    std::vector<IntVec> rays;
    std::vector<std::vector<int>> cones;
    std::vector<Rational> offsets;
    std::optional<std::vector<Rational>> fiber;

    int dim() const { return rays.empty() ? 0 : static_cast<int>(rays.front().size()); }
    int size() const { return static_cast<int>(rays.size()); }
};

namespace detail {

inline Rational det(std::vector<std::vector<Rational>> m)
{
    const std::size_t n = m.size();
    Rational d = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && m[p][c] == 0)
            ++p;
        if (p == n)
            return 0;
        if (p != c) {
            std::swap(m[p], m[c]);
            d = -d;
        }
        d *= m[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            if (m[r][c] == 0)
                continue;
            Rational f = m[r][c] / m[c][c];
            for (std::size_t k = c; k < n; ++k)
                m[r][k] -= f * m[c][k];
        }
    }
    return d;
}

// Solves sum_j a_j g_j = w for linearly independent generators g_j (least rows); nullopt if w is not in the span.
inline std::optional<std::vector<Rational>> solve_in_span(const std::vector<IntVec>& gens, const std::vector<Rational>& w)
{
    const std::size_t k = gens.size(), n = w.size();
    std::vector<std::vector<Rational>> m(n, std::vector<Rational>(k + 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j)
            m[i][j] = gens[j][i];
        m[i][k] = w[i];
    }
    std::vector<std::size_t> pivcol;
    std::size_t row = 0;
    for (std::size_t c = 0; c < k && row < n; ++c) {
        std::size_t p = row;
        while (p < n && m[p][c] == 0)
            ++p;
        if (p == n)
            return std::nullopt;
        std::swap(m[p], m[row]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == row || m[r][c] == 0)
                continue;
            Rational f = m[r][c] / m[row][c];
            for (std::size_t q = c; q <= k; ++q)
                m[r][q] -= f * m[row][q];
        }
        pivcol.push_back(c);
        ++row;
    }
    if (pivcol.size() != k)
        return std::nullopt;
    for (std::size_t r = row; r < n; ++r)
        if (m[r][k] != 0)
            return std::nullopt;
    std::vector<Rational> a(k);
    for (std::size_t r = 0; r < k; ++r)
        a[pivcol[r]] = m[r][k] / m[r][pivcol[r]];
    return a;
}

inline Integer gcd_of_minors(const std::vector<IntVec>& gens, int n)
{
    const int k = static_cast<int>(gens.size());
    Integer g = 0;
    // iterate over k-subsets of coordinates
    std::vector<bool> pick(static_cast<std::size_t>(n), false);
    std::fill(pick.begin(), pick.begin() + k, true);
    do {
        std::vector<std::vector<Rational>> m;
        for (int i = 0; i < n; ++i) {
            if (!pick[static_cast<std::size_t>(i)])
                continue;
            std::vector<Rational> r;
            for (int j = 0; j < k; ++j)
                r.push_back(gens[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
            m.push_back(std::move(r));
        }
        Rational d = det(m);
        Integer di = d.get_num();
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), di.get_mpz_t());
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return g;
}

}

inline std::vector<std::vector<int>> maximal_cones(const Fan& f)
{
    std::vector<std::vector<int>> out;
    for (auto c : f.cones) {
        std::sort(c.begin(), c.end());
        if (static_cast<int>(c.size()) == f.dim())
            out.push_back(c);
    }
    return out;
}

inline bool spans_cone(const Fan& f, const std::vector<int>& subset)
{
    for (const auto& c : f.cones)
        if (std::all_of(subset.begin(), subset.end(),
                        [&](int i) { return std::find(c.begin(), c.end(), i) != c.end(); }))
            return true;
    return false;
}

inline void validate_fan(const Fan& f)
{
    const int n = f.dim(), N = f.size();
    if (n == 0 || N == 0)
        throw InvalidFan("fan needs rays of positive dimension");
    for (const auto& v : f.rays) {
        if (static_cast<int>(v.size()) != n)
            throw InvalidFan("rays of mixed dimension");
        int g = 0;
        for (int x : v)
            g = std::gcd(g, x);
        if (g != 1)
            throw InvalidFan("ray is not primitive");
    }
    if (static_cast<int>(f.offsets.size()) != N)
        throw InvalidFan("need one offset per ray");
    auto maxc = maximal_cones(f);
    if (maxc.empty())
        throw InvalidFan("fan has no top-dimensional cone");
    for (const auto& c : f.cones) {
        for (int i : c)
            if (i < 0 || i >= N)
                throw InvalidFan("cone index out of range");
        std::vector<IntVec> gens;
        for (int i : c)
            gens.push_back(f.rays[static_cast<std::size_t>(i)]);
        if (static_cast<int>(c.size()) > n || detail::gcd_of_minors(gens, n) != 1)
            throw InvalidFan("cone is not regular");
        if (!spans_cone(Fan{f.rays, maxc, {}, {}}, c))
            throw InvalidFan("cone is not a face of a top-dimensional cone");
    }
    for (int i = 0; i < N; ++i)
        if (!spans_cone(f, {i}))
            throw InvalidFan("ray not used by any cone");
    // completeness and non-overlap probed along generic directions
    std::mt19937 gen(12345);
    std::uniform_int_distribution<int> d(-997, 997);
    int probes = 0;
    for (int t = 0; t < 400 && probes < 64; ++t) {
        std::vector<Rational> w(static_cast<std::size_t>(n));
        for (auto& x : w)
            x = d(gen);
        int hits = 0;
        bool boundary = false;
        for (const auto& c : maxc) {
            std::vector<IntVec> gens;
            for (int i : c)
                gens.push_back(f.rays[static_cast<std::size_t>(i)]);
            auto a = detail::solve_in_span(gens, w);
            if (!a)
                continue;
            bool nonneg = std::all_of(a->begin(), a->end(), [](const Rational& x) { return x >= 0; });
            if (nonneg && std::any_of(a->begin(), a->end(), [](const Rational& x) { return x == 0; }))
                boundary = true;
            if (nonneg)
                ++hits;
        }
        if (boundary)
            continue;
        ++probes;
        if (hits != 1)
            throw InvalidFan(hits == 0 ? "fan is not complete" : "cones overlap");
    }
}

// Interior point of P: the fiber if given, otherwise the barycenter of the vertices.
inline std::vector<Rational> interior_point(const Fan& f)
{
    const int n = f.dim();
    if (f.fiber) {
        if (static_cast<int>(f.fiber->size()) != n)
            throw InvalidFan("fiber has wrong dimension");
        return *f.fiber;
    }
    auto maxc = maximal_cones(f);
    std::vector<Rational> sum(static_cast<std::size_t>(n));
    for (const auto& c : maxc) {
        // rows v_i, i in c: <v_i, u> = lambda_i
        std::vector<IntVec> cols(static_cast<std::size_t>(n), IntVec(static_cast<std::size_t>(n)));
        std::vector<Rational> rhs;
        for (int r = 0; r < n; ++r) {
            for (int k = 0; k < n; ++k)
                cols[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)] =
                    f.rays[static_cast<std::size_t>(c[static_cast<std::size_t>(r)])][static_cast<std::size_t>(k)];
            rhs.push_back(f.offsets[static_cast<std::size_t>(c[static_cast<std::size_t>(r)])]);
        }
        auto u = detail::solve_in_span(cols, rhs);
        if (!u)
            throw InvalidFan("degenerate vertex");
        for (int k = 0; k < n; ++k)
            sum[static_cast<std::size_t>(k)] += (*u)[static_cast<std::size_t>(k)];
    }
    for (auto& x : sum)
        x /= static_cast<long>(maxc.size());
    return sum;
}

struct QuotientData {
    std::vector<IntVec> weights;
    std::vector<Rational> fiber;
    std::vector<Rational> tau;
};

// Integer basis of ker(Z^N -> Z^n, e_i -> v_i) by unimodular row reduction of [V | I].
inline std::vector<IntVec> weight_matrix(const Fan& f)
{
    const std::size_t N = f.rays.size(), n = static_cast<std::size_t>(f.dim());
    std::vector<std::vector<Integer>> m(N, std::vector<Integer>(n + N));
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t k = 0; k < n; ++k)
            m[i][k] = f.rays[i][k];
        m[i][n + i] = 1;
    }
    std::size_t row = 0;
    for (std::size_t c = 0; c < n && row < N; ++c) {
        while (true) {
            std::size_t p = N;
            for (std::size_t r = row; r < N; ++r)
                if (m[r][c] != 0 && (p == N || abs(m[r][c]) < abs(m[p][c])))
                    p = r;
            if (p == N)
                break;
            std::swap(m[p], m[row]);
            bool done = true;
            for (std::size_t r = row + 1; r < N; ++r) {
                if (m[r][c] == 0)
                    continue;
                Integer q;
                mpz_fdiv_q(q.get_mpz_t(), m[r][c].get_mpz_t(), m[row][c].get_mpz_t());
                for (std::size_t k = 0; k < n + N; ++k)
                    m[r][k] -= q * m[row][k];
                if (m[r][c] != 0)
                    done = false;
            }
            if (done) {
                ++row;
                break;
            }
        }
    }
    std::vector<IntVec> out;
    for (std::size_t r = row; r < N; ++r) {
        IntVec w;
        for (std::size_t k = 0; k < N; ++k)
            w.push_back(static_cast<int>(m[r][n + k].get_si()));
        out.push_back(std::move(w));
    }
    return out;
}

inline QuotientData quotient_data(const Fan& f)
{
    validate_fan(f);
    QuotientData q;
    q.weights = weight_matrix(f);
    q.fiber = interior_point(f);
    for (std::size_t i = 0; i < f.rays.size(); ++i) {
        Rational t = -f.offsets[i];
        for (std::size_t k = 0; k < q.fiber.size(); ++k)
            t += f.rays[i][k] * q.fiber[k];
        if (t <= 0)
            throw InvalidFan("fiber is not in the interior of the polytope");
        q.tau.push_back(t);
    }
    return q;
}

inline std::vector<std::vector<int>> primitive_collections(const Fan& f)
{
    const int N = f.size();
    std::vector<std::vector<int>> out;
    for (unsigned long mask = 1; mask < (1ul << N); ++mask) {
        std::vector<int> s;
        for (int i = 0; i < N; ++i)
            if (mask >> i & 1ul)
                s.push_back(i);
        if (spans_cone(f, s))
            continue;
        bool minimal = true;
        for (std::size_t j = 0; j < s.size() && minimal; ++j) {
            auto t = s;
            t.erase(t.begin() + static_cast<long>(j));
            minimal = spans_cone(f, t);
        }
        if (minimal)
            out.push_back(s);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return out;
}

inline int unstable_codim(const Fan& f)
{
    auto pc = primitive_collections(f);
    std::size_t m = static_cast<std::size_t>(f.size());
    for (const auto& g : pc)
        m = std::min(m, g.size());
    return static_cast<int>(m);
}

struct PrimitiveRelation {
    std::vector<int> collection;
    std::map<int, Rational> cone_part;
    Rational degree;
};

// sum_{i in gamma} v_i = sum_{j in sigma} c_j v_j with c_j > 0; anticanonical degree |gamma| - sum c_j.
inline PrimitiveRelation primitive_relation(const Fan& f, const std::vector<int>& gamma)
{
    const std::size_t n = static_cast<std::size_t>(f.dim());
    std::vector<Rational> w(n);
    for (int i : gamma)
        for (std::size_t k = 0; k < n; ++k)
            w[k] += f.rays[static_cast<std::size_t>(i)][k];
    PrimitiveRelation r{gamma, {}, Rational(static_cast<long>(gamma.size()))};
    if (std::all_of(w.begin(), w.end(), [](const Rational& x) { return x == 0; }))
        return r;
    for (const auto& c : maximal_cones(f)) {
        std::vector<IntVec> gens;
        for (int i : c)
            gens.push_back(f.rays[static_cast<std::size_t>(i)]);
        auto a = detail::solve_in_span(gens, w);
        if (!a || std::any_of(a->begin(), a->end(), [](const Rational& x) { return x < 0; }))
            continue;
        for (std::size_t j = 0; j < c.size(); ++j)
            if ((*a)[j] != 0) {
                r.cone_part[c[j]] = (*a)[j];
                r.degree -= (*a)[j];
            }
        return r;
    }
    throw InvalidFan("primitive relation not found; fan is not complete");
}

struct HypothesisReport {
    bool disk_positivity = true;
    std::string disk_witness;
    bool semi_fano = true;
    bool fano = true;
    std::vector<PrimitiveRelation> relations;
    int unstable_codim = 0;
    bool codim_ok = true;
    bool ok() const { return disk_positivity && semi_fano && codim_ok; }
};

inline HypothesisReport check_hypotheses(const Fan& f, const QuotientData& q)
{
    HypothesisReport r;
    // every effective nonzero class has sum d_i >= 1, so Maslov >= 2, attained by a basic disk
    r.disk_positivity = std::all_of(q.tau.begin(), q.tau.end(), [](const Rational& t) { return t > 0; });
    r.disk_witness = "d = e_1: Maslov 2, energy " + to_string(q.tau.empty() ? Rational(0) : q.tau.front());
    for (const auto& g : primitive_collections(f)) {
        auto rel = primitive_relation(f, g);
        if (rel.degree < 0)
            r.semi_fano = false;
        if (rel.degree <= 0)
            r.fano = false;
        r.relations.push_back(std::move(rel));
    }
    r.unstable_codim = unstable_codim(f);
    r.codim_ok = r.unstable_codim >= 2;
    return r;
}

struct DiskClass {
    std::vector<int> d;
    int maslov() const
    {
        int s = 0;
        for (int x : d)
            s += x;
        return 2 * s;
    }
    Rational energy(const std::vector<Rational>& tau) const
    {
        Rational e = 0;
        for (std::size_t i = 0; i < d.size(); ++i)
            e += d[i] * tau.at(i);
        return e;
    }
};

// One factor: u(z) = sqrt(tau) e^{i theta} prod (z - a_k)/(1 - conj(a_k) z); tau is |u|^2 on the circle.
struct BlaschkeFactor {
    double tau = 1;
    double theta = 0;
    std::vector<Complex> alpha;

    void check() const
    {
        for (const auto& a : alpha)
            if (std::abs(a) >= 1)
                throw RootOnBoundary("Blaschke root must lie in the open unit disk");
    }

    Complex value(Complex z) const
    {
        Complex u = std::sqrt(tau) * std::polar(1.0, theta);
        for (const auto& a : alpha)
            u *= (z - a) / (1.0 - std::conj(a) * z);
        return u;
    }

    // u'(0) = u(0) * sum_k (conj(a_k) - 1/a_k)
    Complex derivative_at_zero() const
    {
        Complex s = 0;
        Complex u0 = value(0);
        if (u0 == 0.0) {
            Complex h = 1e-7;
            return (value(h) - value(-h)) / (2.0 * h);
        }
        for (const auto& a : alpha)
            s += std::conj(a) - 1.0 / a;
        return u0 * s;
    }

    Complex leading() const { return (alpha.size() % 2 ? -1.0 : 1.0) * std::sqrt(tau) * std::polar(1.0, theta); }

    Complex prod_except(std::size_t k) const
    {
        Complex p = 1;
        for (std::size_t l = 0; l < alpha.size(); ++l)
            if (l != k)
                p *= alpha[l];
        return p;
    }

    Complex prod_all() const
    {
        Complex p = 1;
        for (const auto& a : alpha)
            p *= a;
        return p;
    }

    // d u(0) / d alpha_k
    Complex du0_dalpha(std::size_t k) const { return leading() * prod_except(k); }
    Complex du0_dalphabar(std::size_t) const { return 0; }
    // d u'(0) / d alpha_k
    Complex dup0_dalpha(std::size_t k) const
    {
        return leading() * prod_except(k) * (derivative_at_zero() / value(0) + 1.0 / alpha[k]);
    }
    // d u'(0) / d conj(alpha_k)
    Complex dup0_dalphabar(std::size_t) const { return leading() * prod_all(); }
};

inline std::vector<Complex> blaschke_eval(const DiskClass& b, const std::vector<BlaschkeFactor>& factors, Complex z)
{
    if (factors.size() != b.d.size())
        throw InvalidFan("one Blaschke factor per ray required");
    if (std::abs(z) > 1 + 1e-12)
        throw RootOnBoundary("evaluation point outside the closed unit disk");
    std::vector<Complex> out;
    for (std::size_t j = 0; j < factors.size(); ++j) {
        if (static_cast<int>(factors[j].alpha.size()) != b.d[j])
            throw InvalidFan("factor " + std::to_string(j) + " has the wrong number of roots");
        factors[j].check();
        out.push_back(factors[j].value(z));
    }
    return out;
}

struct TorusLaurentPoly {
    int n = 0;
    std::map<IntVec, Scalar> terms;

    std::string to_text() const
    {
        std::string out;
        for (const auto& [e, c] : terms) {
            if (!out.empty())
                out += " + ";
            out += "(" + c.to_text() + ")";
            for (std::size_t j = 0; j < e.size(); ++j)
                if (e[j] != 0)
                    out += "*y" + std::to_string(j + 1) + (e[j] == 1 ? "" : "^(" + std::to_string(e[j]) + ")");
        }
        return out.empty() ? "0" : out;
    }

    json to_json() const
    {
        json a = json::array();
        for (const auto& [e, c] : terms)
            a.push_back({{"exponent", e}, {"coef", c.to_text()}});
        return a;
    }

    // Exact value at rational y and Lambda_{>0} shifts beta (y^v exp(<v, beta>)).
    Scalar evaluate(const std::vector<Rational>& y, const std::vector<Scalar>& beta = {}) const
    {
        if (static_cast<int>(y.size()) != n || (!beta.empty() && static_cast<int>(beta.size()) != n))
            throw InvalidFan("evaluation point has wrong dimension");
        std::optional<Scalar> sum;
        for (const auto& [e, c] : terms) {
            Rational m = 1;
            for (int j = 0; j < n; ++j) {
                if (y[static_cast<std::size_t>(j)] == 0)
                    throw InversionOfZero("torus coordinate must be nonzero");
                Rational p = 1;
                for (int k = 0; k < std::abs(e[static_cast<std::size_t>(j)]); ++k)
                    p *= y[static_cast<std::size_t>(j)];
                m *= e[static_cast<std::size_t>(j)] >= 0 ? p : Rational(1 / p);
            }
            Scalar t = c.scaled(m);
            if (!beta.empty()) {
                Scalar s = Scalar::zero(c.cutoff());
                for (int j = 0; j < n; ++j)
                    s += beta[static_cast<std::size_t>(j)].scaled(e[static_cast<std::size_t>(j)]);
                t *= nv_exp(s);
            }
            sum = sum ? Scalar(*sum + t) : t;
        }
        return sum ? *sum : Scalar();
    }

    Complex evaluate(const std::vector<Complex>& y, double q) const
    {
        Complex s = 0;
        for (const auto& [e, c] : terms) {
            Complex m = c.evaluate(q);
            for (std::size_t j = 0; j < e.size(); ++j)
                m *= std::pow(y[j], e[j]);
            s += m;
        }
        return s;
    }
};

inline TorusLaurentPoly ghv_potential(const Fan& f, const QuotientData& q, const Rational& cutoff = kDefaultCutoff)
{
    TorusLaurentPoly w;
    w.n = f.dim();
    for (std::size_t i = 0; i < f.rays.size(); ++i) {
        Scalar t = Scalar::monomial(1, q.tau[i], cutoff);
        auto it = w.terms.find(f.rays[i]);
        if (it == w.terms.end())
            w.terms.emplace(f.rays[i], t);
        else
            it->second += t;
    }
    return w;
}

struct SolverSettings {
    double q = 1e-3;
    unsigned long seed = 0;
    int max_order = 0;
    int random_starts = 0;
    int max_iter = 200;
    double tol = 1e-12;
    double dedup = 1e-6;
};

struct CriticalPoint {
    std::vector<Complex> y;
    Complex value;
    double residual = 0;
};

struct CriticalReport {
    std::vector<CriticalPoint> points;
    int seeds = 0;
    std::vector<std::string> nonconverged;
};

namespace detail {

inline std::optional<std::vector<Complex>> newton_log(const std::vector<std::pair<IntVec, double>>& mono,
                                                      Eigen::VectorXcd w, const SolverSettings& s, double& res)
{
    const int n = static_cast<int>(w.size());
    auto eval = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& F, Eigen::MatrixXcd& J, double& scale) {
        F.setZero(n);
        J.setZero(n, n);
        scale = 0;
        for (const auto& [v, c] : mono) {
            Complex ex = 0;
            for (int j = 0; j < n; ++j)
                ex += static_cast<double>(v[static_cast<std::size_t>(j)]) * x[j];
            Complex t = c * std::exp(ex);
            scale = std::max(scale, std::abs(t));
            for (int j = 0; j < n; ++j) {
                F[j] += static_cast<double>(v[static_cast<std::size_t>(j)]) * t;
                for (int k = 0; k < n; ++k)
                    J(j, k) += static_cast<double>(v[static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(k)]) * t;
            }
        }
    };
    Eigen::VectorXcd F;
    Eigen::MatrixXcd J;
    double scale = 0;
    for (int it = 0; it < s.max_iter; ++it) {
        eval(w, F, J, scale);
        if (!std::isfinite(scale) || scale == 0)
            return std::nullopt;
        double fn = F.norm() / scale;
        Eigen::VectorXcd step = J.fullPivLu().solve(-F);
        if (!step.allFinite())
            return std::nullopt;
        double lam = 1;
        // backtracking on the scaled residual
        for (int b = 0; b < 30; ++b) {
            Eigen::VectorXcd F2;
            Eigen::MatrixXcd J2;
            double sc2 = 0;
            eval(w + lam * step, F2, J2, sc2);
            if (std::isfinite(sc2) && sc2 > 0 && F2.norm() / sc2 < fn * (1 - 1e-4 * lam))
                break;
            lam *= 0.5;
        }
        w += lam * step;
        if (step.norm() * lam < s.tol) {
            eval(w, F, J, scale);
            res = F.norm() / scale;
            if (res < 1e-9) {
                std::vector<Complex> y;
                for (int j = 0; j < n; ++j)
                    y.push_back(std::exp(w[j]));
                return y;
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}

// Multistart Newton in logarithmic coordinates on y_j dW/dy_j = 0.
inline CriticalReport critical_points(const TorusLaurentPoly& W, const SolverSettings& s)
{
    if (!(s.q > 0 && s.q < 1))
        throw ParseError("q must lie in (0, 1)");
    const int n = W.n;
    std::vector<std::pair<IntVec, double>> mono;
    for (const auto& [e, c] : W.terms)
        mono.emplace_back(e, c.evaluate(s.q));
    int order = s.max_order > 0 ? s.max_order : static_cast<int>(W.terms.size());
    std::vector<Eigen::VectorXcd> seeds;
    for (int m = 1; m <= order; ++m) {
        std::vector<int> k(static_cast<std::size_t>(n), 0);
        while (true) {
            Eigen::VectorXcd w(n);
            for (int j = 0; j < n; ++j)
                w[j] = Complex(0, 2 * std::numbers::pi * k[static_cast<std::size_t>(j)] / m + 0.1 * (j + 1) / m);
            seeds.push_back(w);
            int j = n - 1;
            while (j >= 0 && ++k[static_cast<std::size_t>(j)] == m)
                k[static_cast<std::size_t>(j--)] = 0;
            if (j < 0)
                break;
        }
    }
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> mag(-std::abs(std::log(s.q)), std::abs(std::log(s.q)));
    std::uniform_real_distribution<double> ph(0, 2 * std::numbers::pi);
    int extra = s.random_starts > 0 ? s.random_starts : 8 * static_cast<int>(W.terms.size());
    for (int r = 0; r < extra; ++r) {
        Eigen::VectorXcd w(n);
        for (int j = 0; j < n; ++j) {
            double a = mag(rng);
            w[j] = Complex(a, ph(rng));
        }
        seeds.push_back(w);
    }
    CriticalReport rep;
    rep.seeds = static_cast<int>(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        double res = 0;
        auto y = detail::newton_log(mono, seeds[i], s, res);
        if (!y) {
            rep.nonconverged.push_back("seed " + std::to_string(i));
            continue;
        }
        bool dup = false;
        for (const auto& p : rep.points) {
            double d = 0, m = 0;
            for (int j = 0; j < n; ++j) {
                d = std::max(d, std::abs(p.y[static_cast<std::size_t>(j)] - (*y)[static_cast<std::size_t>(j)]));
                m = std::max(m, std::abs(p.y[static_cast<std::size_t>(j)]));
            }
            if (d <= s.dedup * std::max(1.0, m)) {
                dup = true;
                break;
            }
        }
        if (!dup)
            rep.points.push_back({*y, W.evaluate(*y, s.q), res});
    }
    auto key = [](const CriticalPoint& p) {
        std::vector<double> k;
        for (const auto& c : p.y) {
            k.push_back(std::round(c.real() * 1e8) / 1e8);
            k.push_back(std::round(c.imag() * 1e8) / 1e8);
        }
        return k;
    };
    std::sort(rep.points.begin(), rep.points.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    return rep;
}

inline std::string torus_name(unsigned mask, int n)
{
    if (mask == 0)
        return "xM";
    std::string s = "x";
    for (int i = 0; i < n; ++i)
        if (mask >> i & 1u)
            s += std::to_string(i + 1);
    return s;
}

// Signed wedge of basis subsets; nullopt when they intersect.
inline std::optional<int> wedge_sign(unsigned a, unsigned b, int n)
{
    if (a & b)
        return std::nullopt;
    int sgn = 1;
    for (int i = 0; i < n; ++i)
        if (b >> i & 1u)
            for (int j = i + 1; j < n; ++j)
                if (a >> j & 1u)
                    sgn = -sgn;
    return sgn;
}

// Cohomology of T^n with m_2(a, b) = (-1)^{|a|} a ^ b; generator index = subset mask.
inline AInfinityStructure exterior_algebra(int n, const Rational& cutoff, std::string label = {})
{
    GradedBasis B;
    for (unsigned m = 0; m < (1u << n); ++m)
        B.add({torus_name(m, n), std::popcount(m), GenTag::unforgettable});
    AInfinityStructure s(B, cutoff, std::move(label));
    for (unsigned a = 0; a < (1u << n); ++a)
        for (unsigned b = 0; b < (1u << n); ++b)
            if (auto sg = wedge_sign(a, b, n))
                s.add({static_cast<int>(a), static_cast<int>(b)}, static_cast<int>(a | b),
                      Scalar::constant(*sg * sign_of(std::popcount(a)), cutoff));
    return s;
}

// Morse model of the torus with curvature W(y, beta) x_M.
inline AInfinityStructure generate_fukaya_fixture(const Fan& f, const QuotientData& q, const Rational& cutoff,
                                                  const std::vector<Rational>& y = {},
                                                  const std::vector<Scalar>& beta = {})
{
    auto h = check_hypotheses(f, q);
    if (!h.ok())
        throw HypothesesFailed(!h.semi_fano ? "fan is not semi-Fano" : "hypotheses fail");
    const int n = f.dim();
    std::vector<Rational> yy = y.empty() ? std::vector<Rational>(static_cast<std::size_t>(n), Rational(1)) : y;
    Scalar w = ghv_potential(f, q, cutoff).evaluate(yy, beta);
    AInfinityStructure s = exterior_algebra(n, cutoff, "Fuk(L)");
    s.add(Tuple{}, 0, w);
    return s;
}

inline Fan builtin_fan(std::string_view name)
{
    auto r = [](long a) { return Rational(a); };
    if (name == "CP1")
        return {{{1}, {-1}}, {{0}, {1}}, {r(0), r(-1)}, {}};
    if (name == "CP2")
        return {{{1, 0}, {0, 1}, {-1, -1}}, {{0, 1}, {1, 2}, {0, 2}}, {r(0), r(0), r(-1)}, {}};
    if (name == "CP3")
        return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, -1, -1}},
                {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}},
                {r(0), r(0), r(0), r(-1)},
                {}};
    if (name == "CP1xCP1")
        return {{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, {r(0), r(0), r(-1), r(-1)}, {}};
    if (name.size() == 2 && name[0] == 'F' && name[1] >= '0' && name[1] <= '9') {
        int a = name[1] - '0';
        return {{{1, 0}, {0, 1}, {-1, a}, {0, -1}}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, {r(0), r(0), r(-1), r(-1)}, {}};
    }
    throw ParseError("unknown builtin fan '" + std::string(name) + "'");
}

inline Fan fan_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("rays") || !j.contains("cones"))
        throw ParseError("fan needs 'rays' and 'cones'");
    Fan f;
    f.rays = j.at("rays").get<std::vector<IntVec>>();
    f.cones = j.at("cones").get<std::vector<std::vector<int>>>();
    if (j.contains("offsets"))
        for (const auto& o : j.at("offsets"))
            f.offsets.push_back(Scalar::rational_of(o));
    else
        f.offsets.assign(f.rays.size(), Rational(0));
    if (j.contains("fiber")) {
        std::vector<Rational> u;
        for (const auto& o : j.at("fiber"))
            u.push_back(Scalar::rational_of(o));
        f.fiber = u;
    }
    return f;
}

inline json fan_to_json(const Fan& f)
{
    json j = {{"rays", f.rays}, {"cones", f.cones}};
    json off = json::array();
    for (const auto& o : f.offsets)
        off.push_back(to_string(o));
    j["offsets"] = off;
    if (f.fiber) {
        json u = json::array();
        for (const auto& x : *f.fiber)
            u.push_back(to_string(x));
        j["fiber"] = u;
    }
    return j;
}

}
