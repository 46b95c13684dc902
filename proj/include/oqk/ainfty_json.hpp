#pragma once

#include <string>
#include <vector>

#include "oqk/ainfty.hpp"

namespace oqk {

inline GenTag gen_tag_from_string(const std::string& s)
{
    if (s == "unforgettable")
        return GenTag::unforgettable;
    if (s == "unit")
        return GenTag::unit;
    if (s == "weighted")
        return GenTag::weighted;
    throw ParseError("unknown generator tag '" + s + "'");
}

inline json basis_to_json(const GradedBasis& b)
{
    json a = json::array();
    for (const auto& g : b.generators())
        a.push_back({{"name", g.name}, {"degree", g.degree}, {"tag", to_string(g.tag)}});
    return a;
}

inline GradedBasis basis_from_json(const json& j)
{
    if (!j.is_array())
        throw ParseError("basis must be an array");
    GradedBasis b;
    for (const auto& g : j) {
        if (!g.is_object() || !g.contains("name") || !g.contains("degree"))
            throw ParseError("generator needs 'name' and 'degree'");
        b.add({g.at("name").get<std::string>(), g.at("degree").get<int>(),
               gen_tag_from_string(g.value("tag", std::string("unforgettable")))});
    }
    return b;
}

inline json table_to_json(const GradedBasis& b, const Table& t)
{
    json a = json::array();
    for (const auto& [in, outs] : t)
        for (const auto& [o, c] : outs) {
            json names = json::array();
            for (int i : in)
                names.push_back(b.name(i));
            a.push_back({{"in", names}, {"out", b.name(o)}, {"coef", c.to_text()}});
        }
    return a;
}

template <class Target>
void table_from_json(const json& j, Target& target, const Rational& cutoff)
{
    if (!j.is_array())
        throw ParseError("coefficient table must be an array");
    // entries are {in, out, coef} or {inputs, output, scalar[, arity]}
    for (const auto& e : j) {
        if (!e.is_object())
            throw ParseError("table entry must be an object");
        const char* in = e.contains("in") ? "in" : "inputs";
        const char* out = e.contains("out") ? "out" : "output";
        const char* coef = e.contains("coef") ? "coef" : "scalar";
        if (!e.contains(in) || !e.contains(out) || !e.contains(coef))
            throw ParseError("table entry needs 'in', 'out' and 'coef'");
        auto names = e.at(in).get<std::vector<std::string>>();
        if (e.contains("arity") && e.at("arity").get<std::size_t>() != names.size())
            throw ParseError("table entry arity does not match its inputs");
        target.add(names, e.at(out).get<std::string>(), Scalar::from_json(e.at(coef), cutoff));
    }
}

inline json structure_to_json(const AInfinityStructure& s)
{
    return {{"label", s.label()},
            {"cutoff", to_string(s.cutoff())},
            {"basis", basis_to_json(s.basis())},
            {"m", table_to_json(s.basis(), s.table())}};
}

inline AInfinityStructure structure_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("basis"))
        throw ParseError("structure needs a 'basis'");
    Rational cutoff = j.contains("cutoff") ? Scalar::rational_of(j.at("cutoff")) : kDefaultCutoff;
    AInfinityStructure s(basis_from_json(j.at("basis")), cutoff, j.value("label", std::string()));
    if (j.contains("m"))
        table_from_json(j.at("m"), s, cutoff);
    if (j.contains("coeffs"))
        table_from_json(j.at("coeffs"), s, cutoff);
    return s;
}

inline json cochain_to_json(const GradedBasis& b, const Cochain& x)
{
    json o = json::object();
    for (const auto& [i, c] : x.coeffs())
        o[b.name(i)] = c.to_text();
    return o;
}

inline Cochain cochain_from_json(const GradedBasis& b, const json& j, const Rational& cutoff)
{
    if (!j.is_object())
        throw ParseError("cochain must be an object from generator name to scalar");
    Cochain x(cutoff);
    for (const auto& [name, v] : j.items())
        x.add(b.index(name), Scalar::from_json(v, cutoff));
    return x;
}

inline json morphism_to_json(const Morphism& f)
{
    json j = {{"source", structure_to_json(f.source())}, {"phi", table_to_json(f.basis(), f.table())}};
    if (f.target_ptr() != f.source_ptr())
        j["target"] = structure_to_json(f.target());
    return j;
}

// A missing "target" means the morphism is an endomorphism of "source".
inline Morphism morphism_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("source") || !j.contains("phi"))
        throw ParseError("morphism needs 'source' and 'phi'");
    auto src = std::make_shared<const AInfinityStructure>(structure_from_json(j.at("source")));
    auto tgt = j.contains("target") ? std::make_shared<const AInfinityStructure>(structure_from_json(j.at("target")))
                                    : src;
    Morphism f(src, tgt);
    table_from_json(j.at("phi"), f, f.cutoff());
    return f;
}

inline json violations_to_json(const GradedBasis& b, const VerifyReport& r)
{
    json a = json::array();
    for (const auto& v : r.violations) {
        json names = json::array();
        for (int i : v.inputs)
            names.push_back(b.name(i));
        a.push_back({{"in", names}, {"out", b.name(v.output)}, {"residual", v.residual.to_text()}});
    }
    return a;
}

}
