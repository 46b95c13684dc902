#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "oqk/trees.hpp"
#include "oqk/trees_morph.hpp"

namespace oqk {

// Vortex type: a colored tree decorated with classes and interior leaves, plus the
// degree of the divisor.
struct VortexType {
    ColoredTree tree;
    int divisor_degree = 1;
};

inline json vortex_to_json(const VortexType& v)
{
    return {{"tree", tree_to_json(v.tree)}, {"divisor_degree", v.divisor_degree}};
}

inline VortexType vortex_from_json(const json& j)
{
    if (j.is_object() && j.contains("tree"))
        return {tree_from_json(j.at("tree")), j.value("divisor_degree", 1)};
    return {tree_from_json(j), 1};
}

inline int leaf_delta(const ColoredTree& t, int vertex, const Leaf& l)
{
    if (ghost(t.vertices[vertex]) || l.divisor < 0)
        return l.codim;
    return 2 * l.refined;
}

inline int vortex_index(const ColoredTree& t)
{
    int r = dimension_terms(t).dimension() + t.out_degree;
    for (const auto& x : t.tails)
        r -= x.degree;
    for (int v : t.alive()) {
        r += t.vertices[v].maslov;
        for (int l : t.vertices[v].leaves)
            r -= leaf_delta(t, v, t.leaves[l]);
    }
    return r;
}

inline int vortex_index(const VortexType& v)
{
    return vortex_index(v.tree);
}

// At most one interior leaf on each maximal connected set of ghost vertices.
inline bool uncrowded(const ColoredTree& t)
{
    std::vector<int> comp(t.vertices.size(), -1);
    std::vector<int> count;
    for (int v : t.alive()) {
        if (!ghost(t.vertices[v]))
            continue;
        int p = t.vertices[v].parent;
        if (p >= 0 && ghost(t.vertices[p]) && comp[p] >= 0) {
            comp[v] = comp[p];
        } else {
            comp[v] = static_cast<int>(count.size());
            count.push_back(0);
        }
    }
    // parents precede children after normalize; otherwise resolve by repeated passes
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v : t.alive()) {
            int p = t.vertices[v].parent;
            if (comp[v] >= 0 && p >= 0 && comp[p] >= 0 && comp[p] != comp[v]) {
                int a = comp[v], b = comp[p];
                for (auto& c : comp)
                    if (c == a)
                        c = b;
                changed = true;
            }
        }
    }
    std::map<int, int> n;
    for (int v : t.alive())
        if (comp[v] >= 0 && (n[comp[v]] += static_cast<int>(t.vertices[v].leaves.size())) > 1)
            return false;
    return true;
}

inline bool admissible(const ColoredTree& t, int divisor_degree = 1)
{
    if (!valid(t) || !uncrowded(t))
        return false;
    for (const auto& l : t.leaves)
        if (l.divisor < 0 || l.contact != 1 || l.refined != 1)
            return false;
    for (int v : t.alive()) {
        const auto& x = t.vertices[v];
        if (!x.base && x.color != Color::diamond)
            return false;
        if (Rational(static_cast<long>(x.leaves.size())) != Rational(divisor_degree) * x.energy)
            return false;
    }
    return true;
}

inline bool admissible(const VortexType& v)
{
    return admissible(v.tree, v.divisor_degree);
}

inline bool essential(const ColoredTree& t, int divisor_degree = 1)
{
    if (!admissible(t, divisor_degree) || t.broken())
        return false;
    for (int v : t.alive())
        if (t.vertices[v].metric == Metric::zero)
            return false;
    return true;
}

inline bool essential(const VortexType& v)
{
    return essential(v.tree, v.divisor_degree);
}

// ---------------------------------------------------------------- codimension one strata

struct Stratum {
    std::string cls;  // bu, bd or f1..f6
    int kind = 0;     // elementary morphism Pi -> Gamma
    ColoredTree pi;
    std::string canon;
};

namespace detail {

// Splits a class proportionally to leaf counts; false if the Maslov share is not integral.
inline bool split_class(const Vertex& w, int part_leaves, Rational& e, int& m)
{
    const int total = static_cast<int>(w.leaves.size());
    if (total == 0) {
        e = 0;
        m = 0;
        return ghost(w);
    }
    e = w.energy * Rational(part_leaves) / Rational(total);
    e.canonicalize();
    if ((static_cast<long>(w.maslov) * part_leaves) % total)
        return false;
    m = w.maslov * part_leaves / total;
    return true;
}

inline void reparent_slots(ColoredTree& t, int v)
{
    for (const auto& s : t.vertices[v].slots)
        if (!s.tail)
            t.vertices[s.ref].parent = v;
}

// Vertex w splits into a lower vertex keeping w's color and an upper vertex joined by a length-zero edge.
inline void split_candidates(const ColoredTree& t, int w, std::vector<ColoredTree>& out)
{
    const Vertex& x = t.vertices[w];
    if (!x.base)
        return;
    const Color up = x.color == Color::down ? Color::down : Color::up;
    const int n = static_cast<int>(x.slots.size());
    const int L = static_cast<int>(x.leaves.size());
    const auto nb = t.nonbase_children(w);
    for (int i = 0; i <= n; ++i)
        for (int j = i; j <= n; ++j)
            for (unsigned lm = 0; lm < (1u << L); ++lm)
                for (unsigned nm = 0; nm < (1u << nb.size()); ++nm) {
                    ColoredTree u = t;
                    const int v = static_cast<int>(u.vertices.size());
                    Vertex nv;
                    nv.color = up;
                    nv.base = true;
                    nv.parent = w;
                    nv.metric = Metric::zero;
                    nv.slots.assign(x.slots.begin() + i, x.slots.begin() + j);
                    std::vector<Slot> low(x.slots.begin(), x.slots.begin() + i);
                    low.push_back({false, v});
                    low.insert(low.end(), x.slots.begin() + j, x.slots.end());
                    std::vector<int> keep;
                    for (int k = 0; k < L; ++k)
                        (lm >> k & 1u ? nv.leaves : keep).push_back(x.leaves[k]);
                    int lv = static_cast<int>(nv.leaves.size());
                    Rational e;
                    int m = 0;
                    if (!split_class(x, lv, e, m))
                        continue;
                    nv.energy = e;
                    nv.maslov = m;
                    u.vertices.push_back(nv);
                    Vertex& W = u.vertices[w];
                    W.slots = low;
                    W.leaves = keep;
                    W.energy = x.energy - e;
                    W.maslov = x.maslov - m;
                    W.level = Level::none;
                    reparent_slots(u, v);
                    for (size_t k = 0; k < nb.size(); ++k)
                        if (nm >> k & 1u)
                            u.vertices[nb[k]].parent = v;
                    for (auto& lvar : level_variants(u))
                        out.push_back(std::move(lvar));
                }
}

// A mixed base vertex d becomes a downstairs vertex on level zero with mixed vertices above it.
inline void bubble_candidates(const ColoredTree& t, int d, std::vector<ColoredTree>& out)
{
    const Vertex& x = t.vertices[d];
    if (!x.base || x.color != Color::diamond || !t.nonbase_children(d).empty())
        return;
    const int n = static_cast<int>(x.slots.size());
    const int L = static_cast<int>(x.leaves.size());
    struct Tok {
        int b, e;  // own slot when b < 0
    };
    std::vector<Tok> toks;
    std::function<void(int, int)> rec = [&](int i, int empties) {
        if (i == n) {
            int blocks = 0;
            for (auto& tk : toks)
                blocks += tk.b >= 0;
            for (int m = 0; m <= L; ++m) {
                const int owners = 1 + blocks + m;
                long combos = 1;
                for (int k = 0; k < L; ++k)
                    combos *= owners;
                for (long c = 0; c < combos; ++c) {
                    std::vector<int> owner(L);
                    long cc = c;
                    for (int k = 0; k < L; ++k) {
                        owner[k] = static_cast<int>(cc % owners);
                        cc /= owners;
                    }
                    ColoredTree u = t;
                    Vertex& D = u.vertices[d];
                    D.color = Color::down;
                    D.level = Level::zero;
                    D.slots.clear();
                    std::vector<int> ids;  // vertex per owner index >= 1
                    for (auto& tk : toks) {
                        if (tk.b < 0) {
                            u.vertices[d].slots.push_back(x.slots[tk.e]);
                            continue;
                        }
                        Vertex nv;
                        nv.color = Color::diamond;
                        nv.base = true;
                        nv.parent = d;
                        nv.metric = Metric::zero;
                        nv.slots.assign(x.slots.begin() + tk.b, x.slots.begin() + tk.e);
                        int id = static_cast<int>(u.vertices.size());
                        u.vertices.push_back(nv);
                        u.vertices[d].slots.push_back({false, id});
                        reparent_slots(u, id);
                        ids.push_back(id);
                    }
                    for (int k = 0; k < m; ++k) {
                        Vertex nv;
                        nv.color = Color::diamond;
                        nv.base = false;
                        nv.parent = d;
                        ids.push_back(static_cast<int>(u.vertices.size()));
                        u.vertices.push_back(nv);
                    }
                    u.vertices[d].leaves.clear();
                    for (int k = 0; k < L; ++k)
                        u.vertices[owner[k] == 0 ? d : ids[owner[k] - 1]].leaves.push_back(x.leaves[k]);
                    bool ok = true;
                    Rational used = 0;
                    int used_m = 0;
                    for (int id : ids) {
                        Rational e;
                        int mm = 0;
                        ok &= split_class(x, static_cast<int>(u.vertices[id].leaves.size()), e, mm);
                        u.vertices[id].energy = e;
                        u.vertices[id].maslov = mm;
                        used += e;
                        used_m += mm;
                    }
                    if (!ok)
                        continue;
                    u.vertices[d].energy = x.energy - used;
                    u.vertices[d].maslov = x.maslov - used_m;
                    clean_levels(u);
                    u.vertices[d].level = Level::zero;
                    out.push_back(std::move(u));
                }
            }
            if (empties >= L)
                return;
        }
        if (i < n) {
            toks.push_back({-1, i});
            rec(i + 1, empties);
            toks.pop_back();
            for (int j = i + 1; j <= n; ++j) {
                toks.push_back({i, j});
                rec(j, empties);
                toks.pop_back();
            }
        }
        if (empties < L) {
            toks.push_back({i, i});
            rec(i, empties + 1);
            toks.pop_back();
        }
    };
    rec(0, 0);
}

}

// Codimension one strata adjacent to an essential type of index one.
inline std::vector<Stratum> classify_codim1(const ColoredTree& g0, int divisor_degree = 1)
{
    ColoredTree g = g0;
    normalize(g);
    if (!essential(g, divisor_degree))
        throw NotEssential("type is not essential (admissible, unbroken, without length-zero edges)");
    if (vortex_index(g) != 1)
        throw ConstraintViolation("type has index " + std::to_string(vortex_index(g)) + ", expected 1");
    const std::string gc = canonical(g);
    std::vector<std::pair<std::string, ColoredTree>> cands;
    const int n = static_cast<int>(g.vertices.size());
    std::vector<int> base_edges;
    for (int v = 0; v < n; ++v)
        if (g.vertices[v].base && g.vertices[v].parent >= 0)
            base_edges.push_back(v);
    // breakings
    for (unsigned m = 1; m < (1u << base_edges.size()); ++m) {
        ColoredTree u = g;
        bool all_up = true, all_down = true;
        for (size_t i = 0; i < base_edges.size(); ++i)
            if (m >> i & 1u) {
                u.vertices[base_edges[i]].metric = Metric::broken;
                all_up &= edge_up_class(g, base_edges[i]);
                all_down &= edge_down_class(g, base_edges[i]);
            }
        std::string cls = all_up ? "bu" : all_down ? "bd" : "b";
        for (auto& lv : level_variants(u))
            cands.push_back({cls, std::move(lv)});
    }
    // one non-special edge shrinks to length zero
    for (int v : base_edges)
        if (!special_edge(g, v)) {
            ColoredTree u = g;
            u.vertices[v].metric = Metric::zero;
            cands.push_back({edge_up_class(g, v) ? "f1" : "f3", std::move(u)});
        }
    // maximal downstairs vertices move to level zero together with their special edges
    {
        std::vector<int> mins;
        for (int v = 0; v < n; ++v)
            if (g.vertices[v].level == Level::minus)
                mins.push_back(v);
        for (unsigned m = 1; m < (1u << mins.size()); ++m) {
            ColoredTree u = g;
            for (size_t i = 0; i < mins.size(); ++i)
                if (m >> i & 1u) {
                    u.vertices[mins[i]].level = Level::zero;
                    for (int c : u.base_children(mins[i]))
                        u.vertices[c].metric = Metric::zero;
                }
            cands.push_back({"f5", std::move(u)});
        }
    }
    // vertex splittings
    for (int w = 0; w < n; ++w) {
        std::vector<ColoredTree> out;
        detail::split_candidates(g, w, out);
        for (auto& u : out)
            cands.push_back({g.vertices[w].color == Color::down ? "f4" : "f2", std::move(u)});
        out.clear();
        detail::bubble_candidates(g, w, out);
        for (auto& u : out)
            cands.push_back({"f6", std::move(u)});
    }
    std::map<std::string, Stratum> found;
    for (auto& [cls, u] : cands) {
        if (!valid(u))
            continue;
        normalize(u);
        if (!admissible(u, divisor_degree) || vortex_index(u) != 0)
            continue;
        std::string c = canonical(u);
        if (found.count(c))
            continue;
        for (const auto& e : enumerate_elementary(u))
            if (e.canon == gc) {
                found.emplace(c, Stratum{cls, e.kind, u, c});
                break;
            }
    }
    std::vector<Stratum> r;
    for (auto& [c, s] : found)
        r.push_back(std::move(s));
    return r;
}

inline std::vector<Stratum> classify_codim1(const VortexType& v)
{
    return classify_codim1(v.tree, v.divisor_degree);
}

// ---------------------------------------------------------------- families and pairing

// Essential index-one types with monotone decoration: each vertex carries energy
// (#leaves)/N and Maslov index 2 #leaves, and the output degree makes the index one.
inline std::vector<ColoredTree> vortex_family(Color type, int inputs, int leaves, int max_vertices, int divisor_degree = 1)
{
    EnumOptions o;
    o.max_vertices = max_vertices;
    o.inputs = inputs;
    o.leaves = leaves;
    o.type = type == Color::up ? TypeFilter::up : type == Color::down ? TypeFilter::down : TypeFilter::mixed;
    o.nonbase = type != Color::up;
    o.zero_edges = false;
    std::vector<ColoredTree> r;
    for (auto t : enumerate_types(o)) {
        for (int v : t.alive()) {
            int l = static_cast<int>(t.vertices[v].leaves.size());
            t.vertices[v].energy = Rational(l, divisor_degree);
            t.vertices[v].energy.canonicalize();
            t.vertices[v].maslov = 2 * l;
        }
        t.out_degree = 1 - top_dimension(type, inputs, leaves);
        if (essential(t, divisor_degree) && vortex_index(t) == 1)
            r.push_back(std::move(t));
    }
    return r;
}

struct FakePair {
    int first = 0, second = 0;  // family members
    std::string first_cls, second_cls;
    std::string stratum;
};

struct RealStratum {
    int member = 0;
    std::string cls;
    std::string stratum;
};

struct PairingReport {
    std::vector<FakePair> pairs;
    std::vector<RealStratum> real;
    std::vector<RealStratum> truncated;  // fake strata whose partner lies beyond the vertex bound
    json to_json() const
    {
        json p = json::array(), r = json::array();
        for (const auto& x : pairs)
            p.push_back({{"members", {x.first, x.second}}, {"classes", {x.first_cls, x.second_cls}}, {"stratum", x.stratum}});
        for (const auto& x : real)
            r.push_back({{"member", x.member}, {"class", x.cls}, {"stratum", x.stratum}});
        json u = json::array();
        for (const auto& x : truncated)
            u.push_back({{"member", x.member}, {"class", x.cls}, {"stratum", x.stratum}});
        return {{"pairs", p}, {"breakings", r}, {"beyond_vertex_bound", u}};
    }
};

// Matches every fake codimension one stratum with exactly one partner from another member. With a
// vertex bound, fake strata having more vertices than the bound may lack a partner in the family;
// these are reported separately.
inline PairingReport pair_fake_boundaries(const std::vector<ColoredTree>& family, int divisor_degree = 1,
                                          int max_vertices = -1)
{
    if (!family.empty())
        for (const auto& t : family)
            if (t.num_inputs() != family[0].num_inputs() || t.num_leaves() != family[0].num_leaves())
                throw ConstraintViolation("family members have different numbers of inputs or leaves");
    std::map<std::string, std::vector<std::pair<int, std::string>>> by;
    std::map<std::string, int> size;
    for (size_t i = 0; i < family.size(); ++i)
        for (const auto& s : classify_codim1(family[i], divisor_degree)) {
            by[s.canon].push_back({static_cast<int>(i), s.cls});
            size[s.canon] = s.pi.num_vertices();
        }
    PairingReport rep;
    for (const auto& [c, v] : by) {
        bool fake = false, real = false;
        for (const auto& [m, cls] : v)
            (cls[0] == 'f' ? fake : real) = true;
        if (real && !fake) {
            for (const auto& [m, cls] : v)
                rep.real.push_back({m, cls, c});
            continue;
        }
        std::string why;
        if (real)
            why = "stratum is both a breaking and a fake boundary";
        else if (v.size() != 2)
            why = "fake stratum appears " + std::to_string(v.size()) + " times";
        else if (v[0].first == v[1].first)
            why = "fake stratum appears twice on one member";
        else {
            int a = v[0].second[1] - '0', b = v[1].second[1] - '0';
            if (std::min(a, b) % 2 != 1 || std::max(a, b) != std::min(a, b) + 1)
                why = "fake stratum classes " + v[0].second + " and " + v[1].second + " do not match";
        }
        if (!why.empty() && !real && v.size() == 1 && max_vertices >= 0 && size[c] > max_vertices) {
            rep.truncated.push_back({v[0].first, v[0].second, c});
            continue;
        }
        if (!why.empty())
            throw UnmatchedFakeStratum(why + ": " + c);
        auto a = v[0], b = v[1];
        if (a.second > b.second)
            std::swap(a, b);
        rep.pairs.push_back({a.first, b.first, a.second, b.second, c});
    }
    return rep;
}

}
