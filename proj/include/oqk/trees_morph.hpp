#pragma once

#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "oqk/trees.hpp"

namespace oqk {

// ---------------------------------------------------------------- local surgery

namespace detail {

inline int slot_position(const Vertex& p, int child)
{
    for (size_t i = 0; i < p.slots.size(); ++i)
        if (!p.slots[i].tail && p.slots[i].ref == child)
            return static_cast<int>(i);
    return -1;
}

}

// Merges vertex c into its parent; the parent keeps its color.
inline void contract_into_parent(ColoredTree& t, int c)
{
    Vertex& x = t.vertices[c];
    const int p = x.parent;
    Vertex& P = t.vertices[p];
    if (x.base) {
        int pos = detail::slot_position(P, c);
        std::vector<Slot> s(P.slots.begin(), P.slots.begin() + pos);
        s.insert(s.end(), x.slots.begin(), x.slots.end());
        s.insert(s.end(), P.slots.begin() + pos + 1, P.slots.end());
        P.slots = std::move(s);
        for (const auto& sl : x.slots)
            if (!sl.tail)
                t.vertices[sl.ref].parent = p;
    }
    for (auto& v : t.vertices)
        if (v.alive && v.parent == c && !v.base)
            v.parent = p;
    P.leaves.insert(P.leaves.end(), x.leaves.begin(), x.leaves.end());
    P.energy += x.energy;
    P.maslov += x.maslov;
    x.alive = false;
    x.slots.clear();
    x.leaves.clear();
    x.parent = -2;
}

// Removes levels from vertices that are no longer maximal downstairs base vertices.
inline void clean_levels(ColoredTree& t)
{
    Parts p = basic_parts(t);
    for (int v : t.alive())
        if (!maximal_down_base(t, p, v))
            t.vertices[v].level = Level::none;
}

// Assigns missing levels, preferring V^- and falling back to V^0 when allowed.
inline bool complete_levels(ColoredTree& t, bool allow_zero = true)
{
    clean_levels(t);
    Parts p = basic_parts(t);
    for (int v : t.alive()) {
        if (!maximal_down_base(t, p, v) || t.vertices[v].level != Level::none)
            continue;
        t.vertices[v].level = Level::minus;
        if (balanced_realizable(t, p, p.part_of[v]))
            continue;
        if (!allow_zero)
            return false;
        t.vertices[v].level = Level::zero;
        if (!balanced_realizable(t, p, p.part_of[v]))
            return false;
    }
    return true;
}

// All ways of assigning missing levels.
inline std::vector<ColoredTree> level_variants(ColoredTree t)
{
    clean_levels(t);
    Parts p = basic_parts(t);
    std::vector<int> missing;
    for (int v : t.alive())
        if (maximal_down_base(t, p, v) && t.vertices[v].level == Level::none)
            missing.push_back(v);
    std::vector<ColoredTree> out;
    for (unsigned m = 0; m < (1u << missing.size()); ++m) {
        ColoredTree u = t;
        for (size_t i = 0; i < missing.size(); ++i)
            u.vertices[missing[i]].level = (m >> i & 1u) ? Level::zero : Level::minus;
        out.push_back(std::move(u));
    }
    return out;
}

inline bool edge_up_class(const ColoredTree& t, int c)
{
    Color a = t.vertices[c].color, b = t.vertices[t.vertices[c].parent].color;
    return a != Color::down && b != Color::down;
}

inline bool edge_down_class(const ColoredTree& t, int c)
{
    return t.vertices[c].color == Color::down && t.vertices[t.vertices[c].parent].color == Color::down;
}

// ---------------------------------------------------------------- elementary morphisms

struct Elementary {
    int kind = 0;
    ColoredTree target;
    std::string canon;
};

inline std::string kind_name(int kind)
{
    static const char* names[] = {"",
                                  "collapse non-special edge outside the base",
                                  "collapse non-special length-zero base edge",
                                  "collapse special length-zero base edges",
                                  "collapse special edges outside the base",
                                  "extend non-special length-zero edge",
                                  "extend special length-zero edges",
                                  "glue one breaking",
                                  "glue several breakings"};
    return kind >= 1 && kind <= 8 ? names[kind] : "unknown";
}

// Every type reachable from t by one elementary morphism, tagged by kind. Kinds 1-6 act inside
// one basic part; kinds 7-8 glue breakings, possibly leaving other breakings in place.
inline std::vector<Elementary> enumerate_elementary(const ColoredTree& t0)
{
    ColoredTree t = t0;
    normalize(t);
    std::set<std::pair<int, std::string>> seen;
    std::vector<Elementary> out;
    auto emit = [&](int kind, ColoredTree u) {
        normalize(u);
        if (!valid(u))
            return;
        std::string c = canonical(u);
        if (seen.insert({kind, c}).second)
            out.push_back({kind, std::move(u), std::move(c)});
    };
    const Parts p = basic_parts(t);
    const int n = static_cast<int>(t.vertices.size());
    for (int v = 0; v < n; ++v) {
        const Vertex& x = t.vertices[v];
        if (x.parent < 0)
            continue;
        // (1) non-special edge outside the base
        if (!x.base && !special_edge(t, v)) {
            ColoredTree u = t;
            contract_into_parent(u, v);
            if (complete_levels(u))
                emit(1, u);
        }
        if (x.base && x.metric == Metric::zero && !special_edge(t, v)) {
            // (2) non-special length-zero base edge
            ColoredTree u = t;
            Level lv = x.level;
            contract_into_parent(u, v);
            if (lv != Level::none)
                u.vertices[x.parent].level = lv;
            if (complete_levels(u))
                emit(2, u);
            // (5) extend it
            ColoredTree w = t;
            w.vertices[v].metric = Metric::plus;
            emit(5, w);
        }
    }
    for (int v = 0; v < n; ++v) {
        const Vertex& x = t.vertices[v];
        // (3) maximal downstairs base vertex on level zero collapses with its neighbours above
        if (x.level == Level::zero) {
            auto ch = t.children(v);
            bool ok = true;
            for (int c : ch)
                ok &= t.vertices[c].color == Color::diamond && t.vertices[c].metric != Metric::broken &&
                      (!t.vertices[c].base || t.vertices[c].metric == Metric::zero);
            if (ok) {
                ColoredTree u = t;
                for (int c : ch)
                    contract_into_parent(u, c);
                u.vertices[v].color = Color::diamond;
                u.vertices[v].level = Level::none;
                if (complete_levels(u))
                    emit(3, u);
            }
            // (6) extend its special edges
            ColoredTree w = t;
            bool all_zero = true;
            for (int c : t.base_children(v))
                if (t.vertices[c].metric != Metric::broken) {
                    all_zero &= t.vertices[c].metric == Metric::zero;
                    w.vertices[c].metric = Metric::plus;
                }
            w.vertices[v].level = Level::minus;
            if (all_zero)
                emit(6, w);
        }
        // (4) maximal downstairs vertex outside the base
        if (maximal_down_nonbase(t, p, v)) {
            auto ch = t.children(v);
            bool ok = true;
            for (int c : ch)
                ok &= t.vertices[c].color == Color::diamond;
            if (ok) {
                ColoredTree u = t;
                for (int c : ch)
                    contract_into_parent(u, c);
                u.vertices[v].color = Color::diamond;
                if (complete_levels(u))
                    emit(4, u);
            }
        }
    }
    // (7) glue one breaking
    for (int v = 0; v < n; ++v) {
        const Vertex& x = t.vertices[v];
        if (x.metric != Metric::broken)
            continue;
        Color a = p.type[p.part_of[v]], b = p.type[p.part_of[x.parent]];
        bool upper = a != Color::down && b != Color::down && edge_up_class(t, v);
        bool lower = a == Color::down && b == Color::down;
        if (upper || lower) {
            ColoredTree u = t;
            u.vertices[v].metric = Metric::plus;
            if (complete_levels(u, false))
                emit(7, u);
        }
    }
    // (8) glue a downstairs part to a nonempty set of mixed parts above it
    for (size_t P = 0; P < p.type.size(); ++P) {
        if (p.type[P] != Color::down)
            continue;
        std::vector<int> edges;
        for (size_t Q = 0; Q < p.type.size(); ++Q)
            if (p.parent[Q] == static_cast<int>(P) && p.type[Q] == Color::diamond && edge_down_class(t, p.root[Q]))
                edges.push_back(p.root[Q]);
        if (edges.empty() || edges.size() > 12)
            continue;
        for (unsigned m = 1; m < (1u << edges.size()); ++m) {
            ColoredTree u = t;
            for (size_t i = 0; i < edges.size(); ++i)
                if (m >> i & 1u)
                    u.vertices[edges[i]].metric = Metric::plus;
            if (complete_levels(u, false))
                emit(8, u);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const Elementary& a, const Elementary& b) { return std::tie(a.kind, a.canon) < std::tie(b.kind, b.canon); });
    return out;
}

// p is below g: g is reachable from p by a chain of elementary morphisms.
inline bool leq(const ColoredTree& p, const ColoredTree& g)
{
    ColoredTree a = p, b = g;
    normalize(a);
    normalize(b);
    const std::string goal = canonical(b);
    const int gv = b.num_vertices(), gb = b.num_breakings();
    std::set<std::string> seen{canonical(a)};
    std::deque<ColoredTree> q{a};
    if (*seen.begin() == goal)
        return true;
    while (!q.empty()) {
        ColoredTree cur = std::move(q.front());
        q.pop_front();
        for (auto& e : enumerate_elementary(cur)) {
            if (e.canon == goal)
                return true;
            if (e.target.num_vertices() < gv || e.target.num_breakings() < gb)
                continue;
            if (seen.insert(e.canon).second)
                q.push_back(std::move(e.target));
        }
    }
    return false;
}

// ---------------------------------------------------------------- enumeration

enum class TypeFilter { any, up, down, mixed };

inline TypeFilter type_filter_from_string(const std::string& s)
{
    if (s == "any")
        return TypeFilter::any;
    if (s == "up")
        return TypeFilter::up;
    if (s == "down")
        return TypeFilter::down;
    if (s == "mixed")
        return TypeFilter::mixed;
    throw ParseError("unknown tree type '" + s + "' (expected up, down, mixed or any)");
}

struct EnumOptions {
    int max_vertices = 3;
    int inputs = 2;
    int leaves = 0;
    TypeFilter type = TypeFilter::any;
    bool nonbase = false;      // allow vertices outside the base
    bool zero_edges = true;    // allow length-zero base edges
    int max_breakings = 0;
    bool weighted = false;
};

namespace detail {

struct Skel {
    int leaves = 0;
    std::vector<Skel> nonbase;
    std::vector<Skel> kids;
    std::vector<int> slots;  // -1 tail, otherwise index into kids
};

struct SkelGen {
    bool allow_nonbase = false;
    std::map<std::tuple<int, int>, std::vector<Skel>> nb_memo;
    std::map<std::tuple<int, int>, std::vector<std::vector<Skel>>> nbl_memo;
    std::map<std::tuple<int, int, int, bool>, std::vector<Skel>> base_memo;
    std::map<std::tuple<int, int, int, bool>, std::vector<std::pair<std::vector<Skel>, std::vector<int>>>> seq_memo;

    const std::vector<Skel>& nb(int nv, int nl)
    {
        auto key = std::make_tuple(nv, nl);
        if (auto it = nb_memo.find(key); it != nb_memo.end())
            return it->second;
        std::vector<Skel> r;
        for (int l0 = 0; l0 <= nl; ++l0)
            for (const auto& ch : nb_list(nv - 1, nl - l0)) {
                if (l0 == 0 && ch.empty())
                    continue;
                Skel s;
                s.leaves = l0;
                s.nonbase = ch;
                r.push_back(std::move(s));
            }
        return nb_memo[key] = std::move(r);
    }

    const std::vector<std::vector<Skel>>& nb_list(int nv, int nl)
    {
        auto key = std::make_tuple(nv, nl);
        if (auto it = nbl_memo.find(key); it != nbl_memo.end())
            return it->second;
        std::vector<std::vector<Skel>> r;
        if (nv == 0) {
            if (nl == 0)
                r.push_back({});
        } else {
            for (int a = 1; a <= nv; ++a)
                for (int b = 0; b <= nl; ++b)
                    for (const auto& c : nb(a, b))
                        for (const auto& rest : nb_list(nv - a, nl - b)) {
                            std::vector<Skel> v{c};
                            v.insert(v.end(), rest.begin(), rest.end());
                            r.push_back(std::move(v));
                        }
        }
        return nbl_memo[key] = std::move(r);
    }

    // dia: an ancestor can only be stable as a diamond, so this subtree may not force another one
    const std::vector<Skel>& base(int nv, int ni, int nl, bool dia = false)
    {
        auto key = std::make_tuple(nv, ni, nl, dia);
        if (auto it = base_memo.find(key); it != base_memo.end())
            return it->second;
        std::vector<Skel> r;
        if (nv >= 1)
            for (int l0 = 0; l0 <= nl; ++l0)
                for (int vn = 0; vn <= (allow_nonbase ? nv - 1 : 0); ++vn)
                    for (int ln = 0; ln <= nl - l0; ++ln)
                        for (const auto& nbs : nb_list(vn, ln))
                            for (int forced = 0; forced < 2; ++forced) {
                                if (forced && dia)
                                    continue;
                                for (const auto& [kids, slots] : seq(nv - 1 - vn, ni, nl - l0 - ln, dia || forced)) {
                                    const int items = static_cast<int>(slots.size() + nbs.size()) + l0;
                                    // a lone base child or tail leaves only the diamond stability rule
                                    const bool needs = slots.size() == 1 && nbs.empty() && l0 == 0;
                                    if ((items == 0) || needs != static_cast<bool>(forced))
                                        continue;
                                    Skel s;
                                    s.leaves = l0;
                                    s.nonbase = nbs;
                                    s.kids = kids;
                                    s.slots = slots;
                                    r.push_back(std::move(s));
                                }
                            }
        return base_memo[key] = std::move(r);
    }

    const std::vector<std::pair<std::vector<Skel>, std::vector<int>>>& seq(int nv, int ni, int nl, bool dia)
    {
        auto key = std::make_tuple(nv, ni, nl, dia);
        if (auto it = seq_memo.find(key); it != seq_memo.end())
            return it->second;
        std::vector<std::pair<std::vector<Skel>, std::vector<int>>> r;
        if (nv == 0 && ni == 0 && nl == 0)
            r.push_back({});
        if (ni >= 1)
            for (const auto& [k, s] : seq(nv, ni - 1, nl, dia)) {
                std::vector<int> ns{-1};
                for (int x : s)
                    ns.push_back(x < 0 ? -1 : x + 0);
                r.push_back({k, ns});
            }
        for (int a = 1; a <= nv; ++a)
            for (int b = 0; b <= ni; ++b)
                for (int c = 0; c <= nl; ++c) {
                    const auto& firsts = base(a, b, c, dia);
                    if (firsts.empty())
                        continue;
                    const auto& rests = seq(nv - a, ni - b, nl - c, dia);
                    for (const auto& f : firsts)
                        for (const auto& [k, s] : rests) {
                            std::vector<Skel> nk{f};
                            nk.insert(nk.end(), k.begin(), k.end());
                            std::vector<int> ns{0};
                            for (int x : s)
                                ns.push_back(x < 0 ? -1 : x + 1);
                            r.push_back({nk, ns});
                        }
                }
        return seq_memo[key] = std::move(r);
    }
};

inline ColoredTree skel_tree(const Skel& s)
{
    TreeBuilder b;
    std::function<int(const Skel&, bool, int)> rec = [&](const Skel& k, bool base, int parent) {
        Vertex v;
        v.color = Color::up;
        v.base = base;
        v.parent = parent;
        v.metric = parent < 0 || !base ? Metric::none : Metric::plus;
        int id = static_cast<int>(b.t.vertices.size());
        b.t.vertices.push_back(v);
        for (int i = 0; i < k.leaves; ++i)
            b.leaf(id);
        if (base)
            for (int x : k.slots) {
                if (x < 0) {
                    b.tail(id);
                } else {
                    int c = rec(k.kids[x], true, id);
                    b.t.vertices[id].slots.push_back({false, c});
                }
            }
        for (const auto& c : k.nonbase)
            rec(c, false, id);
        return id;
    };
    rec(s, true, -1);
    return b.t;
}

inline Color coloring_type(const ColoredTree& t)
{
    bool all_up = true, base_down = true;
    for (int v : t.alive()) {
        all_up &= t.vertices[v].color == Color::up;
        if (t.vertices[v].base)
            base_down &= t.vertices[v].color == Color::down;
    }
    return all_up ? Color::up : base_down ? Color::down : Color::diamond;
}

inline bool type_matches(TypeFilter f, Color c)
{
    return f == TypeFilter::any || (f == TypeFilter::up && c == Color::up) ||
           (f == TypeFilter::down && c == Color::down) || (f == TypeFilter::mixed && c == Color::diamond);
}

}

// Stable valid types with the given numbers of inputs and leaves, up to isomorphism, sorted canonically.
inline std::vector<ColoredTree> enumerate_types(const EnumOptions& o)
{
    detail::SkelGen g;
    g.allow_nonbase = o.nonbase;
    std::set<std::string> skel_seen;
    std::map<std::string, ColoredTree> result;
    for (int nv = 1; nv <= o.max_vertices; ++nv)
        for (const auto& s : g.base(nv, o.inputs, o.leaves)) {
            ColoredTree sk = detail::skel_tree(s);
            normalize(sk);
            if (!skel_seen.insert(canonical(sk)).second)
                continue;
            const int n = static_cast<int>(sk.vertices.size());
            // colorings, depth first: vertices are numbered with parents first
            std::vector<Color> col(n);
            std::vector<char> dia_above(n, 0);
            std::function<void(int)> color_rec = [&](int v) {
                if (v == n) {
                    ColoredTree c = sk;
                    for (int i = 0; i < n; ++i)
                        c.vertices[i].color = col[i];
                    if (!detail::type_matches(o.type, detail::coloring_type(c)))
                        return;
                    // metrics on non-root base edges
                    std::vector<int> edges;
                    for (int i = 0; i < n; ++i)
                        if (c.vertices[i].base && c.vertices[i].parent >= 0)
                            edges.push_back(i);
                    std::vector<Metric> choices{Metric::plus};
                    if (o.zero_edges)
                        choices.push_back(Metric::zero);
                    if (o.max_breakings > 0)
                        choices.push_back(Metric::broken);
                    std::vector<int> pick(edges.size(), 0);
                    while (true) {
                        int breaks = 0;
                        for (size_t i = 0; i < edges.size(); ++i) {
                            c.vertices[edges[i]].metric = choices[pick[i]];
                            breaks += choices[pick[i]] == Metric::broken;
                        }
                        if (breaks <= o.max_breakings)
                            for (auto& lv : level_variants(c)) {
                                int nw = o.weighted ? static_cast<int>(lv.tails.size()) : 0;
                                int total = 1;
                                for (int i = 0; i < nw; ++i)
                                    total *= 3;
                                for (int wm = 0; wm < total; ++wm) {
                                    ColoredTree w = lv;
                                    if (o.weighted) {
                                        w.weighted = true;
                                        int x = wm;
                                        for (auto& tl : w.tails) {
                                            tl.weight = static_cast<Weight>(x % 3);
                                            x /= 3;
                                        }
                                        w.out_weight = product_weight(w);
                                    }
                                    if (valid(w)) {
                                        std::string key = canonical(w);
                                        result.emplace(key, std::move(w));
                                    }
                                }
                            }
                        size_t i = 0;
                        while (i < pick.size() && ++pick[i] == static_cast<int>(choices.size()))
                            pick[i++] = 0;
                        if (i == pick.size())
                            break;
                    }
                    return;
                }
                int par = sk.vertices[v].parent;
                for (Color cc : {Color::up, Color::diamond, Color::down}) {
                    if (par >= 0) {
                        Color pc = col[par];
                        if (static_cast<int>(cc) > static_cast<int>(pc))
                            continue;
                        if (pc == Color::down && cc == Color::up)
                            continue;
                        if (dia_above[par] && cc != Color::up)
                            continue;
                    }
                    col[v] = cc;
                    dia_above[v] = (par >= 0 && dia_above[par]) || cc == Color::diamond;
                    color_rec(v + 1);
                }
            };
            color_rec(0);
        }
    std::vector<ColoredTree> out;
    for (auto& [k, t] : result)
        out.push_back(std::move(t));
    return out;
}

}
