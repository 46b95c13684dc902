#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oqk/trees.hpp"
#include "oqk/trees_morph.hpp"

namespace oqk {

// All weightings of the single-vertex shapes: "Y" (two inputs) and "Phi" (one input, mixed).
inline std::vector<ColoredTree> enumerate_weighted_shapes(const std::string& shape, Color c = Color::up)
{
    ColoredTree base;
    if (shape == "Y")
        base = y_shape(c);
    else if (shape == "Phi")
        base = phi_shape();
    else
        throw ParseError("unknown shape '" + shape + "' (expected Y or Phi)");
    base.weighted = true;
    std::vector<ColoredTree> out;
    int total = 1;
    for (size_t i = 0; i < base.tails.size(); ++i)
        total *= 3;
    for (int m = 0; m < total; ++m) {
        ColoredTree t = base;
        int x = m;
        for (auto& tl : t.tails) {
            tl.weight = static_cast<Weight>(x % 3);
            x /= 3;
        }
        t.out_weight = product_weight(t);
        if (valid(t))
            out.push_back(std::move(t));
    }
    return out;
}

namespace detail {

inline void remove_slot(Vertex& v, Slot s)
{
    for (size_t i = 0; i < v.slots.size(); ++i)
        if (v.slots[i] == s) {
            v.slots.erase(v.slots.begin() + static_cast<long>(i));
            return;
        }
}

inline void replace_slot(Vertex& v, Slot from, Slot to)
{
    for (auto& s : v.slots)
        if (s == from)
            s = to;
}

inline Metric splice_metric(Metric a, Metric b)
{
    if (a == Metric::broken || b == Metric::broken)
        return Metric::broken;
    if (a == Metric::zero && b == Metric::zero)
        return Metric::zero;
    return Metric::plus;
}

}

// Forgets a forgettable input and stabilizes; nullopt when nothing stable remains.
inline std::optional<ColoredTree> forget_tail(const ColoredTree& t0, int tail_id)
{
    ColoredTree t = t0;
    const int ti = t.find_tail(tail_id);
    if (ti < 0)
        throw ParseError("no boundary tail with id " + std::to_string(tail_id));
    if (!t.weighted || t.tails[ti].weight != Weight::forgettable)
        throw TailNotForgettable("boundary tail " + std::to_string(tail_id) + " is not forgettable");
    detail::remove_slot(t.vertices[t.tail_owner(ti)], {true, ti});
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v : t.alive()) {
            if (vertex_stable(t, v))
                continue;
            Vertex& x = t.vertices[v];
            auto ch = t.children(v);
            const int tails = t.tail_count(v);
            const bool leaves = !x.leaves.empty();
            if (x.parent >= 0) {
                Vertex& P = t.vertices[x.parent];
                if (ch.size() == 1 && tails == 0 && !leaves && x.base && t.vertices[ch[0]].base) {
                    Vertex& c = t.vertices[ch[0]];
                    c.metric = detail::splice_metric(c.metric, x.metric);
                    c.parent = x.parent;
                    c.energy += x.energy;
                    c.maslov += x.maslov;
                    detail::replace_slot(P, {false, v}, {false, ch[0]});
                } else if (ch.empty() && tails == 1 && !leaves && x.base) {
                    detail::replace_slot(P, {false, v}, x.slots[0]);
                } else if (ch.empty() && tails == 0 && !leaves) {
                    if (x.base)
                        detail::remove_slot(P, {false, v});
                } else {
                    continue;
                }
            } else {
                if (ch.size() == 1 && tails == 0 && !leaves && t.vertices[ch[0]].base) {
                    Vertex& c = t.vertices[ch[0]];
                    c.parent = -1;
                    c.metric = Metric::none;
                    c.energy += x.energy;
                    c.maslov += x.maslov;
                } else if (ch.empty() && tails <= 1 && !leaves) {
                    return std::nullopt;
                } else {
                    continue;
                }
            }
            x.alive = false;
            x.slots.clear();
            changed = true;
            break;
        }
    }
    // drop the tail and reindex slots
    t.tails.erase(t.tails.begin() + ti);
    for (auto& v : t.vertices)
        for (auto& s : v.slots)
            if (s.tail && s.ref > ti)
                --s.ref;
    normalize(t);
    t.out_weight = product_weight(t);
    complete_levels(t);
    return t;
}

}
