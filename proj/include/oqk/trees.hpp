#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oqk/novikov.hpp"
#include "oqk/rational.hpp"

namespace oqk {

// Vertex colors, ordered up <= diamond <= down.
enum class Color { up = 0, diamond = 1, down = 2 };
enum class Metric { none, plus, zero, broken };
enum class Level { none, zero, minus };
enum class Weight { unforgettable, forgettable, weighted };

inline char color_char(Color c)
{
    return c == Color::up ? 'u' : c == Color::diamond ? 'd' : 'w';
}

inline std::string to_string(Color c)
{
    return c == Color::up ? "up" : c == Color::diamond ? "diamond" : "down";
}

inline std::string to_string(Metric m)
{
    switch (m) {
    case Metric::plus: return "plus";
    case Metric::zero: return "zero";
    case Metric::broken: return "broken";
    default: return "none";
    }
}

inline std::string to_string(Level l)
{
    return l == Level::zero ? "zero" : l == Level::minus ? "minus" : "none";
}

inline std::string to_string(Weight w)
{
    return w == Weight::unforgettable ? "unforgettable" : w == Weight::forgettable ? "forgettable" : "weighted";
}

inline char weight_char(Weight w)
{
    return w == Weight::unforgettable ? 'o' : w == Weight::forgettable ? 'x' : 'g';
}

// Monoid with unforgettable as unit, forgettable as zero and weighted idempotent.
inline Weight operator*(Weight a, Weight b)
{
    if (a == Weight::forgettable || b == Weight::forgettable)
        return Weight::forgettable;
    if (a == Weight::weighted || b == Weight::weighted)
        return Weight::weighted;
    return Weight::unforgettable;
}

inline Color color_from_string(const std::string& s)
{
    if (s == "up")
        return Color::up;
    if (s == "diamond" || s == "mixed")
        return Color::diamond;
    if (s == "down")
        return Color::down;
    throw ParseError("unknown color '" + s + "'");
}

inline Metric metric_from_string(const std::string& s)
{
    if (s == "plus")
        return Metric::plus;
    if (s == "zero")
        return Metric::zero;
    if (s == "broken")
        return Metric::broken;
    if (s == "none")
        return Metric::none;
    throw ParseError("unknown edge metric '" + s + "'");
}

inline Level level_from_string(const std::string& s)
{
    if (s == "zero")
        return Level::zero;
    if (s == "minus")
        return Level::minus;
    if (s == "none")
        return Level::none;
    throw ParseError("unknown level '" + s + "'");
}

inline Weight weight_from_string(const std::string& s)
{
    if (s == "unforgettable")
        return Weight::unforgettable;
    if (s == "forgettable")
        return Weight::forgettable;
    if (s == "weighted")
        return Weight::weighted;
    throw ParseError("unknown weight '" + s + "'");
}

struct Slot {
    bool tail = true;
    int ref = 0;  // tail index or vertex index
    bool operator==(const Slot&) const = default;
};

struct Vertex {
    Color color = Color::up;
    bool base = true;
    int parent = -1;
    Metric metric = Metric::none;  // edge towards the parent
    Level level = Level::none;     // m'' on maximal downstairs base vertices
    std::vector<Slot> slots;       // planar order at base vertices
    std::vector<int> leaves;
    Rational energy = 0;
    int maslov = 0;
    bool alive = true;
};

struct Tail {
    int id = 0;
    Weight weight = Weight::unforgettable;
    int degree = 0;
};

struct Leaf {
    int id = 0;
    int contact = 1;
    int divisor = 0;  // index a of D_a^0, or -1 for other strata
    int codim = 2;
    int refined = 1;
};

// Rooted tree with base subtree and coloring; broken edges mark breakings between basic parts.
struct ColoredTree {
    std::vector<Vertex> vertices;
    std::vector<Tail> tails;
    std::vector<Leaf> leaves;
    bool weighted = false;
    Weight out_weight = Weight::unforgettable;
    int out_degree = 0;

    int root() const
    {
        for (int i = 0; i < static_cast<int>(vertices.size()); ++i)
            if (vertices[i].alive && vertices[i].parent < 0)
                return i;
        return -1;
    }

    std::vector<int> alive() const
    {
        std::vector<int> r;
        for (int i = 0; i < static_cast<int>(vertices.size()); ++i)
            if (vertices[i].alive)
                r.push_back(i);
        return r;
    }

    // Base children in planar order, then non-base children.
    std::vector<int> children(int v) const
    {
        std::vector<int> r;
        for (const auto& s : vertices[v].slots)
            if (!s.tail)
                r.push_back(s.ref);
        for (int i = 0; i < static_cast<int>(vertices.size()); ++i)
            if (vertices[i].alive && vertices[i].parent == v && !vertices[i].base)
                r.push_back(i);
        return r;
    }

    std::vector<int> base_children(int v) const
    {
        std::vector<int> r;
        for (const auto& s : vertices[v].slots)
            if (!s.tail)
                r.push_back(s.ref);
        return r;
    }

    std::vector<int> nonbase_children(int v) const
    {
        std::vector<int> r;
        for (int i = 0; i < static_cast<int>(vertices.size()); ++i)
            if (vertices[i].alive && vertices[i].parent == v && !vertices[i].base)
                r.push_back(i);
        return r;
    }

    int tail_count(int v) const
    {
        int n = 0;
        for (const auto& s : vertices[v].slots)
            n += s.tail;
        return n;
    }

    int num_vertices() const { return static_cast<int>(alive().size()); }
    int num_inputs() const { return static_cast<int>(tails.size()); }
    int num_leaves() const { return static_cast<int>(leaves.size()); }

    int num_breakings() const
    {
        int n = 0;
        for (int v : alive())
            n += vertices[v].metric == Metric::broken;
        return n;
    }

    bool broken() const { return num_breakings() > 0; }

    int find_tail(int id) const
    {
        for (int i = 0; i < static_cast<int>(tails.size()); ++i)
            if (tails[i].id == id)
                return i;
        return -1;
    }

    // Vertex owning the tail with the given index, or -1.
    int tail_owner(int index) const
    {
        for (int v : alive())
            for (const auto& s : vertices[v].slots)
                if (s.tail && s.ref == index)
                    return v;
        return -1;
    }
};

inline bool special_edge(const ColoredTree& t, int c)
{
    const auto& v = t.vertices[c];
    if (v.parent < 0)
        return false;
    Color a = v.color, b = t.vertices[v.parent].color;
    return (a == Color::diamond && b == Color::down) || (a == Color::down && b == Color::diamond);
}

inline bool ghost(const Vertex& v)
{
    return v.energy == 0 && v.maslov == 0;
}

// Drops dead vertices and renumbers in depth-first planar order.
inline void normalize(ColoredTree& t)
{
    int r = t.root();
    if (r < 0)
        throw InvalidStructure("tree has no root");
    std::vector<int> order, index(t.vertices.size(), -1);
    std::vector<int> stack{r};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        index[v] = static_cast<int>(order.size());
        order.push_back(v);
        auto ch = t.children(v);
        for (auto it = ch.rbegin(); it != ch.rend(); ++it)
            stack.push_back(*it);
    }
    std::vector<Vertex> nv;
    for (int v : order) {
        Vertex x = t.vertices[v];
        x.parent = x.parent < 0 ? -1 : index[x.parent];
        for (auto& s : x.slots)
            if (!s.tail)
                s.ref = index[s.ref];
        nv.push_back(std::move(x));
    }
    // Tails and leaves in order of appearance.
    std::vector<int> tmap(t.tails.size(), -1), lmap(t.leaves.size(), -1);
    std::vector<Tail> nt;
    std::vector<Leaf> nl;
    for (auto& x : nv) {
        for (auto& s : x.slots)
            if (s.tail) {
                if (tmap[s.ref] < 0) {
                    tmap[s.ref] = static_cast<int>(nt.size());
                    nt.push_back(t.tails[s.ref]);
                }
                s.ref = tmap[s.ref];
            }
        for (auto& l : x.leaves) {
            if (lmap[l] < 0) {
                lmap[l] = static_cast<int>(nl.size());
                nl.push_back(t.leaves[l]);
            }
            l = lmap[l];
        }
    }
    t.vertices = std::move(nv);
    t.tails = std::move(nt);
    t.leaves = std::move(nl);
}

namespace detail {

inline std::string leaf_code(const Leaf& l)
{
    return "l" + std::to_string(l.contact) + "," + std::to_string(l.divisor) + "," + std::to_string(l.codim) + "," +
           std::to_string(l.refined);
}

inline std::string encode(const ColoredTree& t, int v)
{
    const auto& x = t.vertices[v];
    static const char mc[] = {'_', '+', '0', '|'};
    static const char lc[] = {'_', '0', '-'};
    std::string s = "(";
    s += color_char(x.color);
    s += x.base ? 'b' : 'n';
    s += mc[static_cast<int>(x.metric)];
    s += lc[static_cast<int>(x.level)];
    if (!ghost(x))
        s += "E" + x.energy.get_str() + "M" + std::to_string(x.maslov);
    std::vector<std::string> ls;
    for (int l : x.leaves)
        ls.push_back(leaf_code(t.leaves[l]));
    std::sort(ls.begin(), ls.end());
    for (auto& l : ls)
        s += l;
    if (x.base) {
        s += "[";
        for (const auto& sl : x.slots) {
            if (sl.tail) {
                s += "t";
                if (t.weighted)
                    s += weight_char(t.tails[sl.ref].weight);
                if (t.tails[sl.ref].degree)
                    s += std::to_string(t.tails[sl.ref].degree);
            } else {
                s += encode(t, sl.ref);
            }
        }
        s += "]";
    }
    std::vector<std::string> nb;
    for (int c : t.nonbase_children(v))
        nb.push_back(encode(t, c));
    std::sort(nb.begin(), nb.end());
    if (!nb.empty()) {
        s += "{";
        for (auto& c : nb)
            s += c;
        s += "}";
    }
    return s + ")";
}

}

// Isomorphism-invariant encoding: planar order at base vertices, sorted non-base children and leaves.
inline std::string canonical(const ColoredTree& t)
{
    int r = t.root();
    if (r < 0)
        return "()";
    std::string s = detail::encode(t, r) + "o";
    if (t.weighted)
        s += weight_char(t.out_weight);
    if (t.out_degree)
        s += std::to_string(t.out_degree);
    return s;
}

// ---------------------------------------------------------------- basic parts

struct Parts {
    std::vector<int> part_of;             // per vertex index, -1 for dead
    std::vector<std::vector<int>> members;
    std::vector<int> root;                // root vertex of each part
    std::vector<int> parent;              // parent part, -1 for the root part
    std::vector<Color> type;
};

inline Parts basic_parts(const ColoredTree& t)
{
    Parts p;
    p.part_of.assign(t.vertices.size(), -1);
    int r = t.root();
    std::vector<int> stack{r};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        const auto& x = t.vertices[v];
        int id;
        if (x.parent < 0 || x.metric == Metric::broken) {
            id = static_cast<int>(p.members.size());
            p.members.emplace_back();
            p.root.push_back(v);
            p.parent.push_back(x.parent < 0 ? -1 : p.part_of[x.parent]);
        } else {
            id = p.part_of[x.parent];
        }
        p.part_of[v] = id;
        p.members[id].push_back(v);
        auto ch = t.children(v);
        for (auto it = ch.rbegin(); it != ch.rend(); ++it)
            stack.push_back(*it);
    }
    for (const auto& m : p.members) {
        bool all_up = true, base_down = true;
        for (int v : m) {
            all_up &= t.vertices[v].color == Color::up;
            if (t.vertices[v].base)
                base_down &= t.vertices[v].color == Color::down;
        }
        p.type.push_back(all_up ? Color::up : base_down ? Color::down : Color::diamond);
    }
    return p;
}

inline Color tree_type(const ColoredTree&, const Parts& p)
{
    bool all_up = true, any_diamond = false;
    for (Color c : p.type) {
        all_up &= c == Color::up;
        any_diamond |= c == Color::diamond;
    }
    return any_diamond ? Color::diamond : all_up ? Color::up : Color::down;
}

inline Color tree_type(const ColoredTree& t)
{
    return tree_type(t, basic_parts(t));
}

// Maximal downstairs base vertex of a mixed part: these carry the level m''.
inline bool maximal_down_base(const ColoredTree& t, const Parts& p, int v)
{
    const auto& x = t.vertices[v];
    if (!x.alive || !x.base || x.color != Color::down || p.type[p.part_of[v]] != Color::diamond)
        return false;
    for (int c : t.base_children(v))
        if (t.vertices[c].metric != Metric::broken && t.vertices[c].color == Color::down)
            return false;
    return true;
}

// Maximal downstairs vertex outside the base (in mixed or downstairs parts).
inline bool maximal_down_nonbase(const ColoredTree& t, const Parts& p, int v)
{
    const auto& x = t.vertices[v];
    if (!x.alive || x.base || x.color != Color::down || p.type[p.part_of[v]] == Color::up)
        return false;
    for (int c : t.children(v))
        if (t.vertices[c].color == Color::down)
            return false;
    return true;
}

// ---------------------------------------------------------------- metric realizability

// Difference constraints for the balanced condition on one mixed part; strict inequalities
// are scaled to gaps of 1 since the system is homogeneous.
inline bool balanced_realizable(const ColoredTree& t, const Parts& p, int part)
{
    if (p.type[part] != Color::diamond)
        return true;
    std::map<int, int> node;
    for (int v : p.members[part])
        if (t.vertices[v].base)
            node.emplace(v, static_cast<int>(node.size()));
    const int B = static_cast<int>(node.size());
    const int n = B + 1;
    struct E {
        int a, b;
        long w;  // x_b - x_a <= w
    };
    std::vector<E> es;
    auto le = [&](int a, int b, long w) { es.push_back({a, b, w}); };
    for (auto [v, i] : node) {
        const auto& x = t.vertices[v];
        if (v != p.root[part]) {
            int u = node.at(x.parent);
            if (x.metric == Metric::zero) {
                le(u, i, 0);
                le(i, u, 0);
            } else {
                le(i, u, -1);  // x_i - x_u >= 1
            }
        }
        if (x.color == Color::diamond) {
            le(i, B, 0);
            le(B, i, 0);
        }
        if (x.level == Level::zero) {
            le(i, B, 0);
            le(B, i, 0);
        } else if (x.level == Level::minus) {
            le(B, i, -1);  // x_i - x_B <= -1
        }
    }
    std::vector<long> d(n, 0);
    for (int it = 0; it < n; ++it) {
        bool changed = false;
        for (const auto& e : es)
            if (d[e.a] + e.w < d[e.b]) {
                d[e.b] = d[e.a] + e.w;
                changed = true;
            }
        if (!changed)
            return true;
    }
    for (const auto& e : es)
        if (d[e.a] + e.w < d[e.b])
            return false;
    return true;
}

// ---------------------------------------------------------------- stability

inline int stability_count(const ColoredTree& t, int v, bool& diamond_rule)
{
    const auto& x = t.vertices[v];
    diamond_rule = x.color == Color::diamond;
    int leaves = static_cast<int>(x.leaves.size());
    int nb = static_cast<int>(t.nonbase_children(v).size());
    int out = x.parent < 0 ? 1 : 0;
    if (diamond_rule) {
        int valence = (x.parent >= 0) + static_cast<int>(t.children(v).size());
        return valence + t.tail_count(v) + out + leaves;
    }
    if (!x.base)
        return (x.parent >= 0) + nb + leaves;
    int base_valence = (x.parent >= 0) + static_cast<int>(t.base_children(v).size());
    return base_valence + t.tail_count(v) + out + 2 * nb + 2 * leaves;
}

inline bool vertex_stable(const ColoredTree& t, int v)
{
    bool d;
    int c = stability_count(t, v, d);
    return c >= (d ? 2 : 3);
}

inline bool stable(const ColoredTree& t)
{
    for (int v : t.alive())
        if (!vertex_stable(t, v))
            return false;
    return true;
}

// ---------------------------------------------------------------- validation

struct ValidityReport {
    std::vector<std::string> problems;
    bool stable = true;
    bool ok() const { return problems.empty(); }
};

inline Weight product_weight(const ColoredTree& t)
{
    Weight w = Weight::unforgettable;
    for (const auto& x : t.tails)
        w = w * x.weight;
    return w;
}

inline ValidityReport validate(const ColoredTree& t)
{
    ValidityReport rep;
    auto bad = [&](const std::string& s) { rep.problems.push_back(s); };
    int roots = 0;
    for (int v : t.alive())
        roots += t.vertices[v].parent < 0;
    if (roots != 1) {
        bad("tree must have exactly one root");
        return rep;
    }
    const int r = t.root();
    std::vector<int> seen(t.vertices.size(), 0), tail_seen(t.tails.size(), 0), leaf_seen(t.leaves.size(), 0);
    for (int v : t.alive()) {
        const auto& x = t.vertices[v];
        std::string at = "vertex " + std::to_string(v);
        if (x.parent >= 0 && (x.parent >= static_cast<int>(t.vertices.size()) || !t.vertices[x.parent].alive)) {
            bad(at + ": dangling parent");
            return rep;
        }
        if (x.base && x.parent >= 0 && !t.vertices[x.parent].base)
            bad(at + ": base vertex above a non-base vertex");
        if (!x.base && !x.slots.empty())
            bad(at + ": boundary tails or base children on a non-base vertex");
        if (x.parent < 0 && x.metric != Metric::none)
            bad(at + ": root carries an edge metric");
        if (x.parent >= 0 && x.base && x.metric == Metric::none)
            bad(at + ": base edge without metric");
        if (!x.base && x.metric != Metric::none)
            bad(at + ": non-base edge with metric");
        for (const auto& s : x.slots) {
            if (s.tail) {
                if (s.ref < 0 || s.ref >= static_cast<int>(t.tails.size()) || tail_seen[s.ref]++)
                    bad(at + ": bad boundary tail reference");
            } else if (s.ref < 0 || s.ref >= static_cast<int>(t.vertices.size()) || !t.vertices[s.ref].alive ||
                       t.vertices[s.ref].parent != v || !t.vertices[s.ref].base || seen[s.ref]++) {
                bad(at + ": bad base child reference");
            }
        }
        for (int l : x.leaves)
            if (l < 0 || l >= static_cast<int>(t.leaves.size()) || leaf_seen[l]++)
                bad(at + ": bad leaf reference");
        if (x.energy < 0)
            bad(at + ": negative energy");
    }
    if (!rep.ok())
        return rep;
    if (!t.vertices[r].base)
        bad("root is not in the base");
    for (int v : t.alive())
        if (t.vertices[v].base && v != r && !seen[v])
            bad("vertex " + std::to_string(v) + ": base vertex missing from parent's planar order");
    for (size_t i = 0; i < t.tails.size(); ++i)
        if (!tail_seen[i])
            bad("boundary tail " + std::to_string(t.tails[i].id) + " not attached");
    for (size_t i = 0; i < t.leaves.size(); ++i) {
        if (!leaf_seen[i])
            bad("interior leaf " + std::to_string(t.leaves[i].id) + " not attached");
        if (t.leaves[i].contact < 1)
            bad("interior leaf " + std::to_string(t.leaves[i].id) + ": contact order must be positive");
    }
    // connectivity
    {
        std::vector<int> reach(t.vertices.size(), 0);
        std::vector<int> st{r};
        while (!st.empty()) {
            int v = st.back();
            st.pop_back();
            if (reach[v]++)
                continue;
            for (int c : t.children(v))
                st.push_back(c);
        }
        for (int v : t.alive())
            if (!reach[v]) {
                bad("tree is not connected");
                return rep;
            }
    }

    Parts p = basic_parts(t);
    // coloring: order reversing, no up next to down, diamonds form an antichain in each part
    for (int v : t.alive()) {
        const auto& x = t.vertices[v];
        if (x.parent < 0)
            continue;
        Color c = x.color, pc = t.vertices[x.parent].color;
        std::string at = "vertex " + std::to_string(v);
        if (static_cast<int>(c) > static_cast<int>(pc))
            bad(at + ": coloring is not order reversing");
        if (c == Color::up && pc == Color::down)
            bad(at + ": monotonicity fails (up vertex adjacent to down vertex)");
        if (c == Color::diamond && x.metric != Metric::broken)
            for (int a = x.parent; a >= 0; a = t.vertices[a].parent) {
                if (p.part_of[a] != p.part_of[v])
                    break;
                if (t.vertices[a].color == Color::diamond) {
                    bad(at + ": monotonicity fails (two diamond vertices on one path)");
                    break;
                }
            }
        if (x.metric == Metric::broken && (!t.vertices[x.parent].base || !x.base))
            bad(at + ": breaking outside the base");
    }
    // chains of basic parts
    for (size_t a = 0; a < p.type.size(); ++a) {
        if (p.type[a] == Color::down)
            continue;
        int diamonds = p.type[a] == Color::diamond;
        for (int b = p.parent[a]; b >= 0; b = p.parent[b]) {
            diamonds += p.type[b] == Color::diamond;
            if (p.type[b] != Color::up && diamonds != 1) {
                bad("basic parts violate monotonicity along a chain");
                break;
            }
        }
    }
    // metric type
    for (int v : t.alive()) {
        bool needs = maximal_down_base(t, p, v);
        if (needs && t.vertices[v].level == Level::none)
            bad("vertex " + std::to_string(v) + ": maximal downstairs base vertex without level");
        if (!needs && t.vertices[v].level != Level::none)
            bad("vertex " + std::to_string(v) + ": level on a vertex that is not maximal downstairs");
    }
    for (size_t a = 0; a < p.type.size(); ++a)
        if (!balanced_realizable(t, p, static_cast<int>(a)))
            bad("balanced condition not realizable in basic part " + std::to_string(a));
    // stability
    for (int v : t.alive())
        if (!vertex_stable(t, v)) {
            rep.stable = false;
            bad("vertex " + std::to_string(v) + ": unstable");
        }
    // weighting
    if (t.weighted && t.out_weight != product_weight(t))
        bad("weighting violates the product rule: output must be " + to_string(product_weight(t)));
    return rep;
}

inline bool valid(const ColoredTree& t)
{
    return validate(t).ok();
}

// ---------------------------------------------------------------- dimension

struct DimensionTerms {
    Color type = Color::up;
    int inputs = 0, leaves = 0;
    int top = 0;
    int zero_edges = 0;       // length-zero non-special base edges
    int sphere_edges = 0;     // non-special edges outside the base
    int zero_levels = 0;      // maximal downstairs base vertices on the level b
    int nonbase_maximal = 0;  // maximal downstairs vertices outside the base
    int breakings = 0;        // b
    int weighted = 0;
    int dimension() const
    {
        return top - zero_edges - 2 * sphere_edges - zero_levels - 2 * nonbase_maximal - breakings + weighted;
    }
};

inline DimensionTerms dimension_terms(const ColoredTree& t)
{
    DimensionTerms d;
    Parts p = basic_parts(t);
    d.type = tree_type(t, p);
    d.inputs = t.num_inputs();
    d.leaves = t.num_leaves();
    d.top = 2 * d.inputs + 2 * d.leaves - (d.type == Color::diamond ? 3 : 2);
    for (int v : t.alive()) {
        const auto& x = t.vertices[v];
        if (x.parent >= 0 && !special_edge(t, v)) {
            if (x.base && x.metric == Metric::zero)
                ++d.zero_edges;
            if (!x.base)
                ++d.sphere_edges;
        }
        d.zero_levels += x.level == Level::zero;
        d.nonbase_maximal += maximal_down_nonbase(t, p, v);
    }
    int nb = t.num_breakings();
    if (nb) {
        bool any_diamond = false;
        int ups = 0, downs = 0;
        for (Color c : p.type) {
            any_diamond |= c == Color::diamond;
            ups += c == Color::up;
            downs += c == Color::down;
        }
        d.breakings = any_diamond ? ups + downs : nb;
    }
    if (t.weighted) {
        for (const auto& x : t.tails)
            d.weighted += x.weight == Weight::weighted;
        d.weighted -= t.out_weight == Weight::weighted;
    }
    return d;
}

inline int dimension(const ColoredTree& t)
{
    if (!stable(t))
        throw UnstableType("dimension is only defined for stable types");
    return dimension_terms(t).dimension();
}

inline int top_dimension(Color type, int inputs, int leaves)
{
    return 2 * inputs + 2 * leaves - (type == Color::diamond ? 3 : 2);
}

// ---------------------------------------------------------------- builders

// Incremental construction helper used by fixtures, parsers and enumerators.
struct TreeBuilder {
    ColoredTree t;

    int vertex(Color c, bool base = true, int parent = -1, Metric m = Metric::plus)
    {
        Vertex v;
        v.color = c;
        v.base = base;
        v.parent = parent;
        v.metric = parent < 0 ? Metric::none : base ? m : Metric::none;
        int id = static_cast<int>(t.vertices.size());
        t.vertices.push_back(v);
        if (parent >= 0 && base)
            t.vertices[parent].slots.push_back({false, id});
        return id;
    }

    int tail(int v, Weight w = Weight::unforgettable, int degree = 0)
    {
        int idx = static_cast<int>(t.tails.size());
        t.tails.push_back({idx, w, degree});
        t.vertices[v].slots.push_back({true, idx});
        return idx;
    }

    int leaf(int v, int contact = 1)
    {
        int idx = static_cast<int>(t.leaves.size());
        Leaf l;
        l.id = idx;
        l.contact = contact;
        t.leaves.push_back(l);
        t.vertices[v].leaves.push_back(idx);
        return idx;
    }

    ColoredTree done()
    {
        if (t.weighted)
            t.out_weight = product_weight(t);
        return t;
    }
};

inline ColoredTree y_shape(Color c = Color::up)
{
    TreeBuilder b;
    int r = b.vertex(c);
    b.tail(r);
    b.tail(r);
    return b.done();
}

inline ColoredTree phi_shape()
{
    TreeBuilder b;
    int r = b.vertex(Color::diamond);
    b.tail(r);
    return b.done();
}

// ---------------------------------------------------------------- serialization

inline json tree_to_json(const ColoredTree& t0)
{
    ColoredTree t = t0;
    normalize(t);
    json vs = json::array();
    for (size_t i = 0; i < t.vertices.size(); ++i) {
        const auto& x = t.vertices[i];
        json slots = json::array();
        for (const auto& s : x.slots)
            slots.push_back(s.tail ? json{{"tail", t.tails[s.ref].id}} : json{{"child", s.ref}});
        json leaves = json::array();
        for (int l : x.leaves)
            leaves.push_back(t.leaves[l].id);
        json o = {{"id", i},           {"color", to_string(x.color)}, {"base", x.base},
                  {"parent", x.parent}, {"metric", to_string(x.metric)}, {"level", to_string(x.level)},
                  {"slots", slots},     {"leaves", leaves}};
        if (!ghost(x)) {
            o["energy"] = x.energy.get_str();
            o["maslov"] = x.maslov;
        }
        vs.push_back(o);
    }
    json tails = json::array();
    for (const auto& x : t.tails) {
        json o = {{"id", x.id}, {"degree", x.degree}};
        if (t.weighted)
            o["weight"] = to_string(x.weight);
        tails.push_back(o);
    }
    json leaves = json::array();
    for (const auto& l : t.leaves)
        leaves.push_back({{"id", l.id},
                          {"contact", l.contact},
                          {"divisor", l.divisor},
                          {"codim", l.codim},
                          {"refined_contact", l.refined}});
    json out = {{"degree", t.out_degree}};
    if (t.weighted)
        out["weight"] = to_string(t.out_weight);
    return {{"vertices", vs}, {"tails", tails}, {"leaves", leaves}, {"output", out}, {"weighted", t.weighted}};
}

inline ColoredTree tree_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("vertices") || !j.at("vertices").is_array())
        throw ParseError("tree needs a 'vertices' array");
    ColoredTree t;
    t.weighted = j.value("weighted", false);
    std::map<int, int> tail_index, leaf_index;
    if (j.contains("tails"))
        for (const auto& x : j.at("tails")) {
            Tail tl;
            tl.id = x.at("id").get<int>();
            tl.degree = x.value("degree", 0);
            if (x.contains("weight")) {
                tl.weight = weight_from_string(x.at("weight").get<std::string>());
                t.weighted = true;
            }
            if (!tail_index.emplace(tl.id, static_cast<int>(t.tails.size())).second)
                throw ParseError("duplicate tail id " + std::to_string(tl.id));
            t.tails.push_back(tl);
        }
    if (j.contains("leaves"))
        for (const auto& x : j.at("leaves")) {
            Leaf l;
            l.id = x.at("id").get<int>();
            l.contact = x.value("contact", 1);
            l.divisor = x.value("divisor", 0);
            l.codim = x.value("codim", 2);
            l.refined = x.value("refined_contact", 1);
            if (!leaf_index.emplace(l.id, static_cast<int>(t.leaves.size())).second)
                throw ParseError("duplicate leaf id " + std::to_string(l.id));
            t.leaves.push_back(l);
        }
    const auto& vs = j.at("vertices");
    std::map<int, int> vid;
    for (size_t i = 0; i < vs.size(); ++i)
        vid[vs[i].value("id", static_cast<int>(i))] = static_cast<int>(i);
    auto vref = [&](int id) {
        auto it = vid.find(id);
        if (it == vid.end())
            throw ParseError("unknown vertex id " + std::to_string(id));
        return it->second;
    };
    for (const auto& x : vs) {
        Vertex v;
        v.color = color_from_string(x.at("color").get<std::string>());
        v.base = x.value("base", true);
        int p = x.value("parent", -1);
        v.parent = p < 0 ? -1 : vref(p);
        v.metric = metric_from_string(x.value("metric", std::string(v.parent < 0 || !v.base ? "none" : "plus")));
        v.level = level_from_string(x.value("level", std::string("none")));
        if (x.contains("slots"))
            for (const auto& s : x.at("slots")) {
                if (s.contains("tail")) {
                    auto it = tail_index.find(s.at("tail").get<int>());
                    if (it == tail_index.end())
                        throw ParseError("unknown tail id in slot");
                    v.slots.push_back({true, it->second});
                } else if (s.contains("child")) {
                    v.slots.push_back({false, vref(s.at("child").get<int>())});
                } else {
                    throw ParseError("slot needs 'tail' or 'child'");
                }
            }
        if (x.contains("leaves"))
            for (const auto& l : x.at("leaves")) {
                auto it = leaf_index.find(l.get<int>());
                if (it == leaf_index.end())
                    throw ParseError("unknown leaf id");
                v.leaves.push_back(it->second);
            }
        if (x.contains("energy"))
            v.energy = Scalar::rational_of(x.at("energy"));
        v.maslov = x.value("maslov", 0);
        t.vertices.push_back(v);
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        t.out_degree = o.value("degree", 0);
        if (o.contains("weight")) {
            t.out_weight = weight_from_string(o.at("weight").get<std::string>());
            t.weighted = true;
        } else if (t.weighted) {
            t.out_weight = product_weight(t);
        }
    }
    if (t.root() < 0)
        throw ParseError("tree has no root");
    return t;
}

inline std::string tree_to_dot(const ColoredTree& t0, const std::string& name = "T")
{
    ColoredTree t = t0;
    normalize(t);
    std::ostringstream os;
    os << "digraph " << name << " {\n  rankdir=BT;\n";
    static const char* shape[] = {"triangle", "diamond", "invtriangle"};
    for (size_t i = 0; i < t.vertices.size(); ++i) {
        const auto& x = t.vertices[i];
        os << "  v" << i << " [shape=" << shape[static_cast<int>(x.color)] << (x.base ? "" : ", style=dashed")
           << ", label=\"" << i;
        if (x.level != Level::none)
            os << (x.level == Level::zero ? " V0" : " V-");
        if (!x.leaves.empty())
            os << " l" << x.leaves.size();
        os << "\"];\n";
        int k = 0;
        for (const auto& s : x.slots)
            if (s.tail) {
                os << "  t" << i << "_" << k << " [shape=point];\n";
                os << "  t" << i << "_" << k++ << " -> v" << i << ";\n";
            }
    }
    for (size_t i = 0; i < t.vertices.size(); ++i) {
        const auto& x = t.vertices[i];
        if (x.parent < 0)
            continue;
        os << "  v" << i << " -> v" << x.parent;
        if (x.metric == Metric::zero)
            os << " [style=dotted]";
        else if (x.metric == Metric::broken)
            os << " [style=bold, label=\"||\"]";
        else if (!x.base)
            os << " [style=dashed]";
        os << ";\n";
    }
    os << "  out [shape=point];\n  v0 -> out;\n}\n";
    return os.str();
}

}
