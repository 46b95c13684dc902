#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "oqk/ainfty.hpp"
#include "oqk/ainfty_json.hpp"
#include "oqk/polygon.hpp"
#include "oqk/toric.hpp"
#include "oqk/trees.hpp"
#include "oqk/trees_morph.hpp"
#include "oqk/trees_vortex.hpp"
#include "oqk/trees_weighted.hpp"

using namespace oqk;

namespace {

struct RunConfig {
    std::string cutoff = "10";
    int max_arity = 4;
    int max_vertices = 3;
    double q = 1e-3;
    unsigned long seed = 0;
    std::string format = "text";
};

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw InputError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
    }
}

void apply_config_file(const std::string& path, RunConfig& c)
{
    json j = load_json(path);
    if (!j.is_object())
        throw InputError(path + ": config must be a JSON object");
    if (j.contains("cutoff"))
        c.cutoff = j["cutoff"].is_string() ? j["cutoff"].get<std::string>() : j["cutoff"].dump();
    c.max_arity = j.value("max_arity", c.max_arity);
    c.max_vertices = j.value("max_vertices", c.max_vertices);
    c.q = j.value("q", c.q);
    c.seed = j.value("seed", c.seed);
    c.format = j.value("format", c.format);
}

std::string fmt(double x)
{
    if (std::abs(x) < 5e-13)
        x = 0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string fmt(Complex z)
{
    return fmt(z.real()) + (z.imag() < 0 && std::abs(z.imag()) >= 5e-13 ? " - " : " + ") + fmt(std::abs(z.imag())) + "i";
}

json cjson(Complex z)
{
    return json::array({std::stod(fmt(z.real())), std::stod(fmt(z.imag()))});
}

struct Report {
    bool as_json = false;
    json j = json::object();
    std::ostringstream text;

    void print() const
    {
        if (as_json)
            std::cout << j.dump(2) << "\n";
        else
            std::cout << text.str();
    }
};

// ---------------------------------------------------------------- verify

int cmd_verify(const std::string& file, const RunConfig& c, Report& out)
{
    json j = load_json(file);
    bool ok = true;
    if (j.is_object() && j.contains("phi")) {
        Morphism f = morphism_from_json(j);
        auto r = verify_morphism(f, c.max_arity);
        ok = r.ok();
        out.j["kind"] = "morphism";
        out.j["ok"] = ok;
        out.j["tuples_checked"] = r.tuples_checked;
        out.j["violations"] = violations_to_json(f.basis(), r);
        out.text << "morphism " << (ok ? "PASS" : "FAIL") << " (" << r.tuples_checked << " tuples, arity <= "
                 << c.max_arity << ")\n";
        for (const auto& v : r.violations)
            out.text << "  " << tuple_str(f.basis(), v.inputs) << " -> " << f.basis().name(v.output) << ": "
                     << v.residual.to_text() << "\n";
        if (f.basis().unit()) {
            auto u = verify_unital_morphism(f);
            out.j["unital"] = u.ok;
            out.j["unital_messages"] = u.failures;
            out.text << "unital " << (u.ok ? "PASS" : "FAIL") << "\n";
            for (const auto& m : u.failures)
                out.text << "  " << m << "\n";
            ok &= u.ok;
        }
        out.j["ok"] = ok;
        return ok ? 0 : 1;
    }
    AInfinityStructure s = structure_from_json(j);
    auto r = verify_ainfty(s, c.max_arity);
    ok = r.ok();
    out.j["kind"] = "structure";
    out.j["label"] = s.label();
    out.j["tuples_checked"] = r.tuples_checked;
    out.j["violations"] = violations_to_json(s.basis(), r);
    out.text << "A-infinity relations " << (ok ? "PASS" : "FAIL") << " (" << r.tuples_checked
             << " tuples, arity <= " << c.max_arity << ")\n";
    for (const auto& v : r.violations)
        out.text << "  " << tuple_str(s.basis(), v.inputs) << " -> " << s.basis().name(v.output) << ": "
                 << v.residual.to_text() << "\n";
    if (auto e = s.basis().unit()) {
        auto u = verify_strict_unit(s, *e);
        out.j["strict_unit"] = u.ok;
        out.j["strict_unit_messages"] = u.failures;
        out.text << "strict unit " << (u.ok ? "PASS" : "FAIL") << "\n";
        for (const auto& m : u.failures)
            out.text << "  " << m << "\n";
        ok &= u.ok;
    }
    out.j["ok"] = ok;
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------- mc

Cochain load_cochain(const std::string& file, const GradedBasis& b, const Rational& cutoff)
{
    json j = load_json(file);
    if (j.is_object() && j.contains("b"))
        j = j["b"];
    return cochain_from_json(b, j, cutoff);
}

int cmd_mc(const std::string& sfile, const std::string& mfile, const std::string& bfile, const RunConfig& c,
           Report& out)
{
    const Rational cutoff = parse_rational(c.cutoff);
    if (!mfile.empty()) {
        Morphism f = morphism_from_json(load_json(mfile));
        Cochain b = bfile.empty() ? Cochain(cutoff) : load_cochain(bfile, f.basis(), cutoff);
        auto ir = check_intertwine(f, b);
        out.j["source_weakly_bounding"] = ir.source_weakly_bounding;
        out.j["target_weakly_bounding"] = ir.target_weakly_bounding;
        out.j["messages"] = ir.messages;
        out.text << "source weakly bounding: " << (ir.source_weakly_bounding ? "yes" : "no") << "\n";
        out.text << "target weakly bounding: " << (ir.target_weakly_bounding ? "yes" : "no") << "\n";
        if (ir.w1)
            out.text << "W1(b)       = " << ir.w1->to_text() << "\n";
        if (ir.target_weakly_bounding) {
            out.j["pushforward"] = cochain_to_json(f.basis(), ir.image);
            out.j["W1"] = ir.w1->to_text();
            out.j["W2"] = ir.w2->to_text();
            out.text << "phi_*(b)    = " << ir.image.str(f.basis()) << "\n";
            out.text << "W2(phi_*b)  = " << ir.w2->to_text() << "\n";
            bool round = false;
            try {
                round = invert_pushforward(f, ir.image) == b;
                out.j["round_trip"] = round;
                out.text << "round trip  : " << (round ? "PASS" : "FAIL") << "\n";
            } catch (const NotHigherOrderDeformation& e) {
                out.j["round_trip"] = nullptr;
                out.text << "round trip  : skipped (" << e.what() << ")\n";
                round = true;
            }
            ir.ok &= round;
        }
        for (const auto& m : ir.messages)
            out.text << "  " << m << "\n";
        out.j["ok"] = ir.ok;
        out.text << "intertwining " << (ir.ok ? "PASS" : "FAIL") << "\n";
        return ir.ok ? 0 : 1;
    }
    AInfinityStructure s = structure_from_json(load_json(sfile));
    Cochain b = bfile.empty() ? Cochain(s.cutoff()) : load_cochain(bfile, s.basis(), s.cutoff());
    Cochain curv = curvature(s, b);
    out.j["curvature"] = cochain_to_json(s.basis(), curv);
    out.text << "curvature   = " << curv.str(s.basis()) << "\n";
    bool wb = is_weakly_bounding(s, b);
    out.j["weakly_bounding"] = wb;
    out.text << "weakly bounding: " << (wb ? "yes" : "no") << "\n";
    if (!wb)
        throw NotWeaklyBounding("curvature has components other than the unit");
    Scalar w = potential(s, b);
    out.j["potential"] = w.to_text();
    out.text << "W(b)        = " << w.to_text() << "\n";
    AInfinityStructure d = deform(s, b);
    int rk = cohomology_rank(d, Cochain(d.cutoff()));
    out.j["cohomology_rank"] = rk;
    out.text << "rank H(m1^b) = " << rk << "\n";
    out.j["ok"] = true;
    return 0;
}

// ---------------------------------------------------------------- potential

int cmd_potential(const std::string& fan_file, const std::string& builtin, const RunConfig& c, Report& out)
{
    Fan f = !fan_file.empty() ? fan_from_json(load_json(fan_file)) : builtin_fan(builtin);
    validate_fan(f);
    const Rational cutoff = parse_rational(c.cutoff);
    auto q = quotient_data(f);
    auto W = ghv_potential(f, q, cutoff);
    auto h = check_hypotheses(f, q);
    out.j["fan"] = fan_to_json(f);
    out.j["potential"] = W.to_json();
    json rel = json::array();
    for (const auto& r : h.relations) {
        json cp = json::object();
        for (const auto& [i, a] : r.cone_part)
            cp[std::to_string(i)] = to_string(a);
        rel.push_back({{"collection", r.collection}, {"cone_part", cp}, {"degree", to_string(r.degree)}});
    }
    out.j["hypotheses"] = {{"disk_positivity", h.disk_positivity},
                           {"semi_fano", h.semi_fano},
                           {"fano", h.fano},
                           {"unstable_codim", h.unstable_codim},
                           {"codim_ok", h.codim_ok},
                           {"primitive_relations", rel}};
    out.text << "W = " << W.to_text() << "\n";
    out.text << "hypotheses: disk positivity " << (h.disk_positivity ? "yes" : "no") << ", semi-Fano "
             << (h.semi_fano ? "yes" : "no") << ", Fano " << (h.fano ? "yes" : "no") << ", unstable codim "
             << h.unstable_codim << "\n";
    for (const auto& r : h.relations) {
        out.text << "  primitive collection {";
        for (std::size_t i = 0; i < r.collection.size(); ++i)
            out.text << (i ? "," : "") << r.collection[i];
        out.text << "}: degree " << to_string(r.degree) << "\n";
    }
    if (!h.ok()) {
        out.j["verdict"] = "hypotheses fail; no critical point solve";
        out.text << "verdict: hypotheses fail; no critical point solve\n";
        return 1;
    }
    SolverSettings s;
    s.q = c.q;
    s.seed = c.seed;
    auto cr = critical_points(W, s);
    json pts = json::array();
    out.text << "critical points at q = " << fmt(c.q) << ": " << cr.points.size() << "\n";
    for (const auto& p : cr.points) {
        json y = json::array();
        out.text << "  y = (";
        for (std::size_t i = 0; i < p.y.size(); ++i) {
            y.push_back(cjson(p.y[i]));
            out.text << (i ? ", " : "") << fmt(p.y[i]);
        }
        out.text << ")  W = " << fmt(p.value) << "\n";
        pts.push_back({{"y", y}, {"value", cjson(p.value)}});
    }
    out.j["q"] = c.q;
    out.j["critical_points"] = pts;
    out.j["seeds"] = cr.seeds;
    bool nontrivial = !cr.points.empty();
    out.j["verdict"] = nontrivial ? "Floer cohomology nonvanishing at the critical points" : "no critical points found";
    out.text << "verdict: " << out.j["verdict"].get<std::string>() << "\n";
    return 0;
}

// ---------------------------------------------------------------- trees

void emit_types(const std::vector<ColoredTree>& ts, Report& out, const std::string& dir)
{
    json a = json::array();
    for (const auto& t : ts)
        a.push_back({{"canonical", canonical(t)}, {"dimension", dimension(t)}, {"tree", tree_to_json(t)}});
    out.j["count"] = ts.size();
    out.j["types"] = a;
    out.text << ts.size() << " types\n";
    for (const auto& t : ts)
        out.text << "  " << canonical(t) << "  dim " << dimension(t) << "\n";
    if (!dir.empty()) {
        std::filesystem::create_directories(dir);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            std::ostringstream name;
            name << "type_" << std::setw(4) << std::setfill('0') << i;
            std::ofstream(std::filesystem::path(dir) / (name.str() + ".json")) << tree_to_json(ts[i]).dump(2) << "\n";
            std::ofstream(std::filesystem::path(dir) / (name.str() + ".dot")) << tree_to_dot(ts[i], name.str());
        }
        std::ofstream(std::filesystem::path(dir) / "atlas.json") << a.dump(2) << "\n";
    }
}

struct TreesArgs {
    std::string type = "any";
    int inputs = 2;
    int leaves = 0;
    bool weighted = false;
    std::string shape;
    bool nonbase = false;
    int breakings = 0;
    std::string out_dir;
    std::string file;
    int divisor_degree = 1;
};

int cmd_trees_enumerate(const TreesArgs& a, const RunConfig& c, Report& out)
{
    if (!a.shape.empty()) {
        if (!a.weighted)
            throw CLI::ValidationError("--shape", "requires --weighted");
        Color col = a.type == "down" ? Color::down : Color::up;
        emit_types(enumerate_weighted_shapes(a.shape, col), out, a.out_dir);
        return 0;
    }
    EnumOptions o;
    o.max_vertices = c.max_vertices;
    o.inputs = a.inputs;
    o.leaves = a.leaves;
    o.type = type_filter_from_string(a.type);
    o.nonbase = a.nonbase;
    o.max_breakings = a.breakings;
    o.weighted = a.weighted;
    emit_types(enumerate_types(o), out, a.out_dir);
    return 0;
}

int cmd_trees_validate(const TreesArgs& a, Report& out)
{
    ColoredTree t = vortex_from_json(load_json(a.file)).tree;
    auto r = validate(t);
    out.j["valid"] = r.ok();
    out.j["stable"] = r.stable;
    out.j["problems"] = r.problems;
    out.text << (r.ok() ? "valid" : "invalid") << (r.stable ? ", stable" : ", unstable") << "\n";
    for (const auto& p : r.problems)
        out.text << "  " << p << "\n";
    if (r.stable) {
        auto d = dimension_terms(t);
        out.j["dimension"] = d.dimension();
        out.j["type"] = to_string(d.type);
        out.text << "type " << to_string(d.type) << ", dimension " << d.dimension() << "\n";
        if (r.ok()) {
            json el = json::array();
            for (const auto& e : enumerate_elementary(t)) {
                el.push_back({{"kind", e.kind}, {"name", kind_name(e.kind)}, {"target", e.canon}});
                out.text << "  elementary (" << e.kind << ") " << kind_name(e.kind) << ": " << e.canon << "\n";
            }
            out.j["elementary"] = el;
        }
    }
    return r.ok() ? 0 : 1;
}

int cmd_trees_boundary(const TreesArgs& a, Report& out)
{
    VortexType v = vortex_from_json(load_json(a.file));
    auto st = classify_codim1(v);
    json s = json::array();
    out.text << "index " << vortex_index(v) << ", " << st.size() << " codimension one strata\n";
    for (const auto& x : st) {
        s.push_back({{"class", x.cls}, {"kind", x.kind}, {"stratum", x.canon}, {"tree", tree_to_json(x.pi)}});
        out.text << "  " << x.cls << "  " << x.canon << "\n";
    }
    out.j["index"] = vortex_index(v);
    out.j["strata"] = s;
    return 0;
}

int cmd_trees_pair(const TreesArgs& a, const RunConfig& c, Report& out)
{
    Color type = a.type == "down" ? Color::down : a.type == "mixed" ? Color::diamond : Color::up;
    if (a.type == "any")
        throw CLI::ValidationError("--type", "pairing needs one of up, down, mixed");
    auto fam = vortex_family(type, a.inputs, a.leaves, c.max_vertices, a.divisor_degree);
    auto r = pair_fake_boundaries(fam, a.divisor_degree, c.max_vertices);
    out.j = r.to_json();
    out.j["family_size"] = fam.size();
    out.j["all_fake_matched"] = r.truncated.empty();
    out.text << "family of " << fam.size() << " essential index-one types\n";
    out.text << r.pairs.size() << " fake pairs, " << r.real.size() << " breaking strata\n";
    std::map<std::string, int> cls;
    for (const auto& p : r.pairs)
        ++cls[p.first_cls + "<->" + p.second_cls];
    for (const auto& x : r.real)
        ++cls[x.cls];
    for (const auto& [k, n] : cls)
        out.text << "  " << k << ": " << n << "\n";
    if (r.truncated.empty()) {
        out.text << "all fake strata matched\n";
    } else {
        out.text << r.truncated.size() << " fake strata have partners beyond " << c.max_vertices
                 << " vertices; raise --max-vertices\n";
    }
    return 0;
}

// ---------------------------------------------------------------- polygon

int cmd_polygon(int l, const RunConfig& c, Report& out)
{
    auto r = polygon_report(l);
    auto fx = polygon_fixture(l, parse_rational(c.cutoff));
    auto v = verify_ainfty(fx.structure, std::min(c.max_arity, 3));
    int rank = cohomology_rank(fx.structure, Cochain(fx.structure.cutoff()));
    out.j = r.to_json();
    out.j["fixture_ainfty"] = v.ok();
    out.j["cohomology_rank"] = rank;
    out.text << "l = " << l << ": ambient (S^2)^" << r.ambient_factors << ", quotient real dim " << r.quotient_real_dim
             << ", reduced Lagrangian (S^2)^" << l << "\n";
    out.text << "min Maslov " << r.min_maslov << " (anti-diagonal " << r.min_maslov_antidiagonal << ", triangle "
             << r.min_maslov_triangle << "), min Chern " << r.min_chern_number << "\n";
    out.text << "unstable locus: at least " << r.unstable_coincidences << " equal coordinates (real codim "
             << r.unstable_real_codim << ")\n";
    out.text << "Betti sum " << r.betti_sum << ", fixture relations " << (v.ok() ? "PASS" : "FAIL")
             << ", cohomology rank " << rank << " (expected " << r.expected_rank << ")\n";
    return v.ok() && rank == r.expected_rank ? 0 : 1;
}

}

int main(int argc, char** argv)
{
    CLI::App app{"oqk: Novikov arithmetic, A-infinity checks, treed-disk combinatorics and toric potentials"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    std::string config_file;
    if (const char* env = std::getenv("OQK_CONFIG"))
        config_file = env;
    app.add_option("--config", config_file, "JSON config file (default from OQK_CONFIG)");
    auto* o_cut = app.add_option("--cutoff", cfg.cutoff, "energy cutoff (rational)");
    auto* o_ar = app.add_option("--max-arity", cfg.max_arity, "largest arity checked")->check(CLI::PositiveNumber);
    auto* o_mv = app.add_option("--max-vertices", cfg.max_vertices, "enumeration bound")->check(CLI::PositiveNumber);
    auto* o_q = app.add_option("--q", cfg.q, "numeric value of q")->check(CLI::Range(0.0, 1.0));
    auto* o_seed = app.add_option("--seed", cfg.seed, "random seed");
    auto* o_fmt = app.add_option("--format", cfg.format, "text or json")->check(CLI::IsMember({"text", "json"}));

    std::string file, morphism_file, cochain_file, fan_file, builtin;
    auto* verify = app.add_subcommand("verify", "check A-infinity relations of a structure or morphism");
    verify->add_option("file", file, "structure or morphism JSON")->required();

    auto* mc = app.add_subcommand("mc", "curvature, potential and pushforward of a bounding cochain");
    mc->alias("mc-solve");
    mc->add_option("--structure", file, "structure JSON");
    mc->add_option("--morphism", morphism_file, "morphism JSON");
    mc->add_option("--cochain", cochain_file, "cochain JSON");

    auto* pot = app.add_subcommand("potential", "toric potential, hypotheses and critical points");
    pot->alias("potential-check");
    pot->add_option("--fan", fan_file, "fan JSON");
    pot->add_option("--builtin", builtin, "CP1, CP2, CP3, CP1xCP1 or Fa");

    TreesArgs ta;
    auto* trees = app.add_subcommand("trees", "colored tree combinatorics");
    trees->require_subcommand(1);
    trees->fallthrough();
    auto* t_en = trees->add_subcommand("enumerate", "enumerate stable types");
    t_en->add_option("--type", ta.type)->check(CLI::IsMember({"up", "down", "mixed", "any"}));
    t_en->add_option("--inputs", ta.inputs)->check(CLI::NonNegativeNumber);
    t_en->add_option("--leaves", ta.leaves)->check(CLI::NonNegativeNumber);
    t_en->add_flag("--weighted", ta.weighted);
    t_en->add_option("--shape", ta.shape)->check(CLI::IsMember({"Y", "Phi"}));
    t_en->add_flag("--nonbase", ta.nonbase, "allow vertices outside the base");
    t_en->add_option("--breakings", ta.breakings)->check(CLI::NonNegativeNumber);
    t_en->add_option("--out", ta.out_dir, "write JSON and GraphViz files to this directory");
    auto* t_val = trees->add_subcommand("validate", "validate a type and list its elementary morphisms");
    t_val->add_option("file", ta.file)->required();
    auto* t_bd = trees->add_subcommand("boundary", "codimension one strata of an essential vortex type");
    t_bd->add_option("file", ta.file)->required();
    auto* t_pair = trees->add_subcommand("pair", "pair fake boundaries of an essential family");
    t_pair->add_option("--type", ta.type)->check(CLI::IsMember({"up", "down", "mixed"}));
    t_pair->add_option("--inputs", ta.inputs)->check(CLI::NonNegativeNumber);
    t_pair->add_option("--leaves", ta.leaves)->check(CLI::NonNegativeNumber);
    t_pair->add_option("--divisor-degree", ta.divisor_degree)->check(CLI::PositiveNumber);
    ta.type = "any";

    int l = 1;
    auto* poly = app.add_subcommand("polygon", "polygon space report and fixture");
    poly->add_option("--l", l)->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
        if (!config_file.empty()) {
            RunConfig file_cfg;
            apply_config_file(config_file, file_cfg);
            if (!o_cut->count())
                cfg.cutoff = file_cfg.cutoff;
            if (!o_ar->count())
                cfg.max_arity = file_cfg.max_arity;
            if (!o_mv->count())
                cfg.max_vertices = file_cfg.max_vertices;
            if (!o_q->count())
                cfg.q = file_cfg.q;
            if (!o_seed->count())
                cfg.seed = file_cfg.seed;
            if (!o_fmt->count())
                cfg.format = file_cfg.format;
        }
        if (parse_rational(cfg.cutoff) <= 0)
            throw CLI::ValidationError("--cutoff", "must be positive");
        if (!(cfg.q > 0 && cfg.q < 1))
            throw CLI::ValidationError("--q", "must lie in (0, 1)");
        if (*t_pair && ta.type == "any")
            ta.type = "up";
        if (*t_en && !ta.shape.empty() && !ta.weighted)
            throw CLI::ValidationError("--shape", "requires --weighted");
        if (*mc && file.empty() && morphism_file.empty())
            throw CLI::ValidationError("mc", "needs --structure or --morphism");
        if (*pot && fan_file.empty() == builtin.empty())
            throw CLI::ValidationError("potential", "needs exactly one of --fan and --builtin");
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    Report out;
    out.as_json = cfg.format == "json";
    int code = 0;
    try {
        if (*verify)
            code = cmd_verify(file, cfg, out);
        else if (*mc)
            code = cmd_mc(file, morphism_file, cochain_file, cfg, out);
        else if (*pot)
            code = cmd_potential(fan_file, builtin, cfg, out);
        else if (*t_en)
            code = cmd_trees_enumerate(ta, cfg, out);
        else if (*t_val)
            code = cmd_trees_validate(ta, out);
        else if (*t_bd)
            code = cmd_trees_boundary(ta, out);
        else if (*t_pair)
            code = cmd_trees_pair(ta, cfg, out);
        else if (*poly)
            code = cmd_polygon(l, cfg, out);
    } catch (const NotWeaklyBounding& e) {
        out.j["ok"] = false;
        out.j["error"] = e.what();
        out.text << e.what() << "\n";
        code = 1;
    } catch (const UnmatchedFakeStratum& e) {
        out.j["ok"] = false;
        out.j["error"] = e.what();
        out.text << e.what() << "\n";
        code = 1;
    } catch (const HypothesesFailed& e) {
        out.j["ok"] = false;
        out.j["error"] = e.what();
        out.text << e.what() << "\n";
        code = 1;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    out.print();
    return code;
}
