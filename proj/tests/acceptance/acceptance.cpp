// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Plain main() so it can run without the unit-test framework.

#include "fbac/adoc.hpp"
#include "fbac/guarded.hpp"
#include "fbac/lattice.hpp"
#include "fbac/monitor.hpp"
#include "fbac/policy_file.hpp"
#include "fbac/regex.hpp"
#include "fbac/tensor.hpp"
#include "fbac/text.hpp"
#include "support/doc_gen.hpp"
#include "support/doc_oracle.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/projection_oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace fbac;
using testing::text_atom;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
    int failures = 0;

    // keeps the first few failure descriptions
    void fail(const std::string& why) {
        pass = false;
        if (++failures <= 3) detail += (detail.empty() ? "" : "; ") + why;
    }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ── arity law ───────────────────────────────────────────────────────────────

Verdict arity_law() {
    Verdict v;
    const auto t0 = Clock::now();
    std::mt19937 rng(1);
    AccessTensor t;
    const std::vector<std::string> subjects = {"s0", "s1", "s2"};
    const std::vector<FunctionSig> functions = {{"f0", 0}, {"f1", 1}, {"f2", 2}, {"f3", 1}};
    const std::vector<std::string> objects = {"o0", "o1", "o2"};
    for (const auto& s : subjects) t.create_subject(SubjectId{s});
    for (const auto& f : functions) t.create_function(f);
    for (const auto& o : objects) t.create_object(ObjectRef{o});
    const auto tuples = testing::all_tuples(objects, 3);
    for (const auto& s : subjects)
        for (const auto& f : functions)
            for (const auto& o : tuples)
                if (o.size() == f.arity && rng() % 2)
                    t.enter_entry(SubjectId{s}, f.name, o, rng() % 2 ? TensorEntry::true_entry() : TensorEntry::false_entry());

    std::size_t checked = 0, exceptions = 0;
    for (const auto& s : subjects)
        for (const auto& f : functions)
            for (const auto& o : tuples) {
                ++checked;
                try {
                    const bool na = tensor_lookup(t, SubjectId{s}, f.name, o).value() == TensorEntry::Value::NotApplicable;
                    if (na != (o.size() != f.arity)) v.fail(s + " " + f.name + " " + format_tuple(o));
                } catch (const std::exception& e) {
                    ++exceptions;
                    v.fail(std::string("exception: ") + e.what());
                }
            }
    const auto secs = seconds_since(t0);
    if (secs >= 1.0) v.fail("took " + std::to_string(secs) + " s");
    v.detail = std::to_string(checked) + " coordinates, " + std::to_string(exceptions) + " exceptions" +
               (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

// ── projections ─────────────────────────────────────────────────────────────

Verdict projection_equivalence() {
    Verdict v;
    const auto t0 = Clock::now();
    std::mt19937 rng(2);
    std::size_t mismatches = 0;
    for (int i = 0; i < 200; ++i) {
        const auto rt = testing::random_tensor(rng, 5);
        for (const auto& m : testing::check_all_projections(rt, rng)) {
            ++mismatches;
            v.fail("tensor " + std::to_string(i) + ": " + m);
        }
    }
    const auto secs = seconds_since(t0);
    if (secs >= 30.0) v.fail("took " + std::to_string(secs) + " s");
    v.detail = "200 tensors, " + std::to_string(mismatches) + " mismatches" + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

// ── regex predicates ────────────────────────────────────────────────────────

// std::regex's extended grammar has no `\n` escape; swap in a literal newline.
// libstdc++ backtracks exponentially on nested stars unless asked for its BFS executor.
bool oracle_match(std::string pattern, const std::string& subject) {
    for (auto at = pattern.find("\\n"); at != std::string::npos; at = pattern.find("\\n", at + 1))
        pattern.replace(at, 2, "\n");
    auto flags = std::regex::extended;
#ifdef __GLIBCXX__
    flags |= std::regex_constants::__polynomial;
#endif
    return std::regex_match(subject, std::regex(pattern, flags));
}

std::string random_pattern(std::mt19937& rng, int depth) {
    static const char* atoms[] = {"a", "b", ";", "=", ".", "[ab]", "[^a]", "[0-3]", "context", "quiet", "\\n"};
    std::string out;
    const int len = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < len; ++i) {
        const auto k = rng() % 10;
        if (k < 7 || depth == 0)
            out += atoms[rng() % std::size(atoms)];
        else if (k == 7)
            out += "(" + random_pattern(rng, depth - 1) + "|" + random_pattern(rng, depth - 1) + ")";
        else
            out += "(" + random_pattern(rng, depth - 1) + ")";
        switch (rng() % 7) {
        case 0: out += "*"; break;
        case 1: out += "+"; break;
        case 2: out += "?"; break;
        case 3: out += "{1,2}"; break;
        default: break;
        }
    }
    return out;
}

std::string random_predicate(std::mt19937& rng) {
    switch (rng() % 6) {
    case 0: return "context=[0-" + std::to_string(rng() % 10) + "](;.*)?\\nSTDIN:.*";
    case 1: return "context=(" + re::decimal_at_most(rng() % 12) + ")(;.*)?\\nSTDIN:.*";
    case 2: return "(context=[0-9]+;)?(quiet|n=[0-9]+)(;.*)?\\nSTDIN:" + random_pattern(rng, 1) + ".*";
    case 3: return "(" + random_pattern(rng, 1) + ")*.*\\nSTDIN:(" + random_pattern(rng, 1) + ")*";
    case 4: return random_pattern(rng, 2) + "\\nSTDIN:" + random_pattern(rng, 1);
    default: return random_pattern(rng, 3);
    }
}

Invocation random_invocation(std::mt19937& rng) {
    static const std::vector<std::string> keys = {"context", "quiet", "n", "a"};
    static const std::string stdin_alphabet = "ab;= 0";
    Invocation inv;
    if (rng() % 2) inv.options.push_back({"context", std::to_string(rng() % 12)});
    const auto n = rng() % 3;
    for (std::size_t i = 0; i < n; ++i) {
        Option o{keys[rng() % keys.size()], std::nullopt};
        if (o.key != "quiet") o.value = std::to_string(rng() % 12);
        inv.options.push_back(o);
    }
    const auto len = rng() % 4;
    for (std::size_t i = 0; i < len; ++i) inv.stdin_bytes += stdin_alphabet[rng() % stdin_alphabet.size()];
    return inv;
}

// Rendering for the escape-free alphabet above, built by hand.
std::string plain_serialize(const Invocation& inv) {
    std::string out;
    for (std::size_t i = 0; i < inv.options.size(); ++i) {
        if (i) out += ';';
        out += inv.options[i].key;
        if (inv.options[i].value) out += "=" + *inv.options[i].value;
    }
    return out + "\nSTDIN:" + inv.stdin_bytes;
}

Verdict regex_semantics() {
    Verdict v;
    std::mt19937 rng(3);
    auto t = parse_policy("SUBJECT s\nFUNCTION grep 1\nOBJECT o\n");
    const auto o = make_tuple({"o"});
    int allows = 0;
    for (int i = 0; i < 500; ++i) {
        const auto pattern = random_predicate(rng);
        const auto inv = random_invocation(rng);
        t.enter_entry(SubjectId{"s"}, "grep", o, TensorEntry::true_with(Predicate::regex(pattern)));
        const auto serialized = canonical_serialize(inv);
        if (serialized != plain_serialize(inv)) v.fail("serialization of pair " + std::to_string(i));
        const bool expected = oracle_match(pattern, serialized);
        const auto d = decide(t, SubjectId{"s"}, "grep", o, inv);
        if ((d.outcome == Outcome::Allow) != expected) v.fail("/" + pattern + "/ on \"" + serialized + "\"");
        allows += expected;
    }
    v.detail = "500 pairs, " + std::to_string(allows) + " allow" + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

// ── lattice ─────────────────────────────────────────────────────────────────

ClassLattice small_lattice() {
    ClassLattice l;
    l.add_level(0, "UNCLASSIFIED");
    l.add_level(1, "SECRET");
    l.add_level(2, "TOPSECRET");
    l.add_compartment("A");
    l.add_compartment("B");
    return l;
}

unsigned mask(const SecurityClass& c) {
    return (c.compartments.contains("A") ? 1u : 0u) | (c.compartments.contains("B") ? 2u : 0u);
}

bool oracle_leq(const SecurityClass& a, const SecurityClass& b) {
    return a.level <= b.level && (mask(a) & ~mask(b)) == 0;
}

Verdict lattice_laws() {
    Verdict v;
    const auto l = small_lattice();
    const auto all = l.all_classes();
    if (all.size() != 12) v.fail("expected 12 classes, got " + std::to_string(all.size()));
    std::size_t pairs = 0;
    for (const auto& a : all) {
        if (!l.leq(a, a) || l.join(a, a) != a || l.meet(a, a) != a) v.fail("idempotence at " + to_string(a));
        for (const auto& b : all) {
            ++pairs;
            const auto ab = to_string(a) + "," + to_string(b);
            if (l.leq(a, b) != oracle_leq(a, b)) v.fail("order " + ab);
            if (l.leq(a, b) && l.leq(b, a) && a != b) v.fail("antisymmetry " + ab);
            const auto j = l.join(a, b), m = l.meet(a, b);
            if (j != l.join(b, a) || m != l.meet(b, a)) v.fail("commutativity " + ab);
            if (l.join(a, l.meet(a, b)) != a || l.meet(a, l.join(a, b)) != a) v.fail("absorption " + ab);
            // least upper / greatest lower bound by brute force
            for (const auto& c : all) {
                if (l.leq(a, b) && l.leq(b, c) && !l.leq(a, c)) v.fail("transitivity " + ab + "," + to_string(c));
                if (oracle_leq(a, c) && oracle_leq(b, c) && !oracle_leq(j, c)) v.fail("join not least " + ab);
                if (oracle_leq(c, a) && oracle_leq(c, b) && !oracle_leq(c, m)) v.fail("meet not greatest " + ab);
            }
            if (!oracle_leq(a, j) || !oracle_leq(b, j) || !oracle_leq(m, a) || !oracle_leq(m, b)) v.fail("bounds " + ab);
        }
    }

    std::mt19937 rng(4);
    const auto base = parse_policy(
        "SUBJECT s0\nSUBJECT s1\nSUBJECT s2\nFUNCTION f 1\nFUNCTION g 2\nFUNCTION h 0\nOBJECT o0\nOBJECT o1\n");
    const std::vector<std::pair<std::string, ObjectTuple>> targets = {
        {"f", make_tuple({"o0"})}, {"f", make_tuple({"o1"})}, {"g", make_tuple({"o0", "o1"})}, {"h", {}}};
    std::size_t decisions = 0;
    for (int round = 0; round < 100; ++round) {
        ClassAssignment a;
        a.lattice = l;
        for (const auto* s : {"s0", "s1", "s2"})
            if (rng() % 4) a.subject_class[SubjectId{s}] = all[rng() % all.size()];
        for (const auto& p : targets)
            if (rng() % 4) a.pair_class[p] = all[rng() % all.size()];
        const auto t = compile_to_tensor(a, base);
        for (const auto& s : base.subjects())
            for (const auto& [f, o] : targets) {
                ++decisions;
                const bool allowed = decide(t, s, f, o, Invocation{}).outcome == Outcome::Allow;
                const auto sc = a.subject_class.find(s);
                const auto pc = a.pair_class.find({f, o});
                if (sc == a.subject_class.end() || pc == a.pair_class.end()) {
                    if (allowed) v.fail("unassigned coordinate allowed in round " + std::to_string(round));
                    continue;
                }
                const bool flow = flow_allowed(a, s, t.function(f), o);
                if (flow != oracle_leq(pc->second, sc->second)) v.fail("flow_allowed disagrees with order");
                if (allowed != flow) v.fail("compiled decide disagrees in round " + std::to_string(round));
            }
    }
    v.detail = std::to_string(pairs) + " ordered pairs, 100 assignments, " + std::to_string(decisions) + " decisions" +
               (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

// ── documents ───────────────────────────────────────────────────────────────

Verdict consistency_conditions() {
    Verdict v;
    std::mt19937 rng(5);
    int accepted = 0;
    for (int i = 0; i < 300; ++i) {
        const auto d = testing::random_document(rng, "d" + std::to_string(i));
        const bool got = validate_document(d).accepted();
        if (got != testing::oracle_accepts(d)) v.fail("document " + d.id);
        accepted += got;
    }
    v.detail = "300 documents, " + std::to_string(accepted) + " accepted" + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

Verdict round_trip() {
    Verdict v;
    std::mt19937 rng(10);
    const auto functions = testing::doc_function_set();
    for (int i = 0; i < 200; ++i) {
        const auto d = testing::random_document(rng, "doc" + std::to_string(i));
        const auto bytes = serialize_adoc(d);
        try {
            const auto back = parse_adoc(bytes, functions);
            if (!(back == d)) v.fail(d.id + " changed");
            if (serialize_adoc(back) != bytes) v.fail(d.id + " not byte-stable");
        } catch (const std::exception& e) {
            v.fail(d.id + ": " + e.what());
        }
    }
    v.detail = "200 documents" + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

// ── no leak ─────────────────────────────────────────────────────────────────

// Every line starts with its atom id, so lines are unique across atoms.
std::string tagged_text(std::mt19937& rng, const std::string& atom_id) {
    static const std::vector<std::string> words = {"alpha", "beta", "terrorist", "x", "42", "needle"};
    std::string out;
    const auto lines = 1 + rng() % 5;
    for (std::size_t l = 0; l < lines; ++l)
        out += atom_id + "-l" + std::to_string(l) + " " + words[rng() % words.size()] + " " +
               words[rng() % words.size()] + "\n";
    return out;
}

struct LeakCheck {
    const AtomicDocument& doc;
    Verdict& v;
    std::size_t& invocations;

    // lines from atoms in `denied` must not appear in `output`
    void operator()(const std::string& what, const std::string& output, const std::set<std::string>& denied) {
        ++invocations;
        std::set<std::string> forbidden;
        for (const auto& a : doc.atoms)
            if (denied.contains(a.id))
                for (const auto& line : text::split_lines(a.content))
                    if (!line.empty()) forbidden.insert(line);
        for (const auto& line : text::split_lines(output))
            if (forbidden.contains(line)) v.fail(doc.id + " " + what + " leaked \"" + line + "\"");
    }
};

Verdict no_leak() {
    Verdict v;
    std::mt19937 rng(6);
    std::size_t invocations = 0;
    const std::string composite_name = std::string(fn::kGrepStdin) + std::string(kComposeOperator) + std::string(fn::kRead);
    const std::string composite_search =
        std::string(fn::kGrepStdin) + std::string(kComposeOperator) + std::string(fn::kSearch);

    for (int trial = 0; trial < 100; ++trial) {
        testing::DocGenOptions gen;
        gen.cross_links = false;
        auto d = testing::random_document(rng, "doc" + std::to_string(trial), gen);
        for (auto& a : d.atoms)
            if (a.kind == AtomKind::Text) a.content = tagged_text(rng, a.id);
        for (auto& a : d.atoms) {
            for (const auto& c : {composite_name, composite_search})
                if (rng() % 3 == 0) a.policy[c][SubjectId{"u" + std::to_string(rng() % 3)}] = testing::random_atom_entry(rng);
        }

        testing::Bench b;
        compose(b.catalog, fn::kGrepStdin, fn::kRead, &b.tensor);
        compose(b.catalog, fn::kGrepStdin, fn::kSearch, &b.tensor);
        for (const auto* s : {"u0", "u1", "u2"}) b.subject(s);
        b.install(d);
        auto ctx = b.ctx();
        const SubjectId s{"u" + std::to_string(rng() % 4)};  // u3 is unknown to the policy
        const auto available = available_atoms(d);
        LeakCheck check{d, v, invocations};

        // atoms where any of `fs` is not allowed for `inv`, plus unavailable ones
        auto denied_for = [&](std::initializer_list<std::string_view> fs, const Invocation& inv) {
            std::set<std::string> out;
            for (const auto& a : d.atoms) {
                bool ok = available.contains(a.id);
                for (auto f : fs)
                    ok = ok && guarded_decide(ctx, s, f, {atom_object(d.id, a.id)}, inv).outcome == Outcome::Allow;
                if (!ok) out.insert(a.id);
            }
            return out;
        };

        const auto view = redacted_view(ctx, s, d);
        std::string view_text;
        for (const auto& line : render_lines(view)) view_text += line + "\n";
        check("read", view_text, denied_for({fn::kRead}, Invocation{}));
        check("read-json", to_json(view).dump(), denied_for({fn::kRead}, Invocation{}));

        for (const auto* pattern : {".", "needle", "l1"}) {
            SearchOptions opts;
            opts.context = rng() % 4;
            opts.quiet = rng() % 4 == 0;
            const auto r = search(ctx, s, d, pattern, opts);
            std::string out;
            for (const auto& h : r.hits) {
                for (const auto& l : h.before) out += l + "\n";
                out += h.line + "\n";
                for (const auto& l : h.after) out += l + "\n";
            }
            const auto inv = search_invocation(pattern, opts);
            check(std::string("search ") + pattern, out, denied_for({fn::kSearch}, inv));

            for (const auto& c : {composite_name, composite_search})
                for (const auto& a : d.atoms) {
                    const auto cr = run_composite(ctx, s, c, d, a.id, pattern, opts);
                    check(c + " " + a.id, cr.output, denied_for({c}, inv));
                }
        }

        const auto p = watermark_print(ctx, s, d, s.name);
        check("print", p.text, denied_for({fn::kPrint, fn::kRead}, Invocation{}));

        std::vector<std::string> ids;
        for (const auto& a : d.atoms) ids.push_back(a.id);
        const auto mail = force_cc_email(ctx, s, d, ids, {"x@example.org"}, {}, "boss@example.org");
        if (mail.record) check("email", mail.record->body, denied_for({fn::kEmail, fn::kRead}, Invocation{}));

        std::vector<std::string> in_order;
        for (const auto& a : d.atoms)
            if (available.contains(a.id)) in_order.push_back(a.id);
        if (in_order.empty()) continue;
        for (auto variant : {CopyVariant::ByteRestricted, CopyVariant::CharacterLimited,
                             CopyVariant::SensitiveWordExclusion, CopyVariant::WithCitation}) {
            CopyRequest req{variant, in_order.front(), in_order.back(), 4096, 4096, {"terrorist"}};
            AtomicDocument dest{"scratch", 1, {}, {}, {text_atom("z1", "scratch")}};
            const auto r = copy(ctx, s, d, req, dest);
            check(std::string(function_for(variant)), r.payload, denied_for({function_for(variant)}, Invocation{}));
        }
    }
    v.detail = "100 triples, " + std::to_string(invocations) + " invocations checked" +
               (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

// ── context bound ───────────────────────────────────────────────────────────

Verdict context_bound() {
    Verdict v;
    testing::Bench b;
    std::string body;
    for (int i = 1; i <= 40; ++i) body += (i == 2 || i == 20 || i == 39 ? "needle " : "hay ") + std::to_string(i) + "\n";
    AtomicDocument d{"long", 1, {}, {}, {text_atom("a1", body)}};
    b.install(d);
    b.grant("alice", fn::kSearch, {atom_object("long", "a1")},
            TensorEntry::true_with(Predicate::regex("context=[0-5](;.*)?\\nSTDIN:.*")));
    auto ctx = b.ctx();
    for (std::size_t c = 0; c <= 7; ++c) {
        SearchOptions opts;
        opts.context = c;
        const auto r = search(ctx, SubjectId{"alice"}, d, "needle", opts);
        const bool want_allow = c <= 5;
        if ((r.outcome == Outcome::Allow) != want_allow) {
            v.fail("context=" + std::to_string(c) + " outcome " + std::string(to_string(r.outcome)));
            continue;
        }
        if (!want_allow) {
            if (!r.hits.empty()) v.fail("denied search returned hits");
            continue;
        }
        if (r.hits.size() != 3) v.fail("context=" + std::to_string(c) + " hits " + std::to_string(r.hits.size()));
        for (const auto& h : r.hits) {
            if (h.before.size() > 5 || h.after.size() > 5) v.fail("more than 5 context lines");
            const auto room_before = std::min<std::size_t>(c, h.line_number - 1);
            const auto room_after = std::min<std::size_t>(c, 40 - h.line_number);
            if (h.before.size() != room_before || h.after.size() != room_after)
                v.fail("context=" + std::to_string(c) + " wrong window at line " + std::to_string(h.line_number));
        }
    }
    v.detail = "context 0..7 over 3 hits" + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

// ── citation cascade ────────────────────────────────────────────────────────

Verdict citation_cascade() {
    Verdict v;
    testing::Bench b;
    AtomicDocument src{"article", 1, {}, {}, {text_atom("p1", "a quotable sentence")}};
    AtomicDocument dest{"essay", 1, {}, {}, {text_atom("e1", "my own words")}};
    b.install(src);
    b.install(dest);
    b.grant("alice", fn::kCopyCite, {atom_object("article", "p1")});
    const SubjectId alice{"alice"};

    const auto r = copy(b.ctx(), alice, src, {CopyVariant::WithCitation, "p1", "p1", 0, 0, {}}, dest);
    if (r.outcome != Outcome::Allow || !r.citation) {
        v.fail("copy denied");
        return v;
    }
    b.install(dest);
    for (const auto& a : dest.atoms) b.grant("alice", fn::kRead, {atom_object("essay", a.id)});

    auto quote_shown = [&](const AtomicDocument& doc) {
        for (const auto& seg : redacted_view(b.ctx(), alice, doc).segments)
            if (seg.atom_id == r.citation->quote_atom)
                return seg.kind == SegmentKind::Content && seg.content == "a quotable sentence";
        return false;
    };
    if (!quote_shown(dest)) v.fail("quote missing after copy");
    const auto removed = remove_atom(dest, r.citation->citation_atom);
    if (quote_shown(removed)) v.fail("quote still shown after citation removal");
    if (!quote_shown(restore_atom(removed, r.citation->citation_atom))) v.fail("quote missing after restore");
    v.detail = "copy, remove, restore";
    return v;
}

// ── composition isolation ───────────────────────────────────────────────────

Verdict composition_isolation() {
    Verdict v;
    FunctionCatalog catalog;
    AccessTensor t;
    for (auto [name, arity] : {std::pair{"f", 0}, std::pair{"g", 1}, std::pair{"h", 2}}) {
        catalog.add({{name, static_cast<std::size_t>(arity)}, {}, "text", {}});
        t.create_function({name, static_cast<std::size_t>(arity)});
    }
    t.create_object(ObjectRef{"o1"});
    t.create_object(ObjectRef{"o2"});
    t.create_subject(SubjectId{"alice"});
    const auto tuples = testing::all_tuples({"o1", "o2"}, 2);
    // every component is fully granted
    for (const auto& [name, spec] : catalog.specs())
        for (const auto& o : tuples)
            if (o.size() == spec.sig.arity) t.enter_entry(SubjectId{"alice"}, name, o, TensorEntry::true_entry());
    std::size_t checked = 0;
    for (const auto* f : {"f", "g", "h"})
        for (const auto* g : {"f", "g", "h"}) {
            const auto c = compose(catalog, f, g, &t);
            for (const auto& o : tuples) {
                ++checked;
                const auto d = decide(t, SubjectId{"alice"}, c.name, o, Invocation{});
                if (d.outcome == Outcome::Allow) v.fail(c.name + " allowed on " + format_tuple(o));
            }
        }
    v.detail = "9 composites, " + std::to_string(checked) + " decisions" + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

// ── audit totality ──────────────────────────────────────────────────────────

const char* kIds =
    "tok-ann  ann  author\n"
    "tok-bob  bob  coauthor\n"
    "tok-vic  vic  viewer\n"
    "tok-root root admin\n";

AtomicDocument report() {
    AtomicDocument d{"report", 1, {}, {}, {text_atom("a1", "public intro\nsecond line"),
                                           text_atom("a2", "secret numbers 42"),
                                           testing::image_atom("a3", "media/map.png")}};
    for (auto& a : d.atoms)
        for (const auto& f : testing::doc_functions()) a.policy[f][SubjectId{"ann"}] = TensorEntry::true_entry();
    d.atoms[0].policy["read"][SubjectId{"vic"}] = TensorEntry::true_entry();
    d.atoms[0].policy["search"][SubjectId{"vic"}] = TensorEntry::true_with(context_limit_predicate(2));
    return d;
}

struct Desk {
    Monitor m;
    std::vector<Principal> who;

    Desk() {
        m.set_identities(IdentityStore::parse(kIds));
        m.put_document(report());
        m.put_document(AtomicDocument{"notes", 1, {}, {}, {text_atom("n1", "my notes")}});
        for (const auto* tok : {"tok-ann", "tok-bob", "tok-vic", "tok-root"}) who.push_back(m.authenticate(tok));
    }
};

InvokeRequest random_request(std::mt19937& rng) {
    static const std::vector<std::string> docs = {"report", "notes", "ghost"};
    static const std::vector<std::string> patterns = {"secret", "line", "n.t", "zzz", "("};
    const auto& doc = docs[rng() % docs.size()];
    auto opt = [](std::string k, std::string v) { return Option{std::move(k), std::move(v)}; };
    switch (rng() % 7) {
    case 0: return {"read", {doc}, {}, {}};
    case 1:
        return {"search", {doc}, {opt("context", std::to_string(rng() % 5)), opt("pattern", patterns[rng() % 5])}, {}};
    case 2: return {"print", {doc}, {}, {}};
    case 3: return {"grep_in_standard", {}, {opt("context", "0"), opt("pattern", patterns[rng() % 4])}, "a line\nb"};
    case 4: return {"email", {doc, "a1"}, {opt("to", rng() % 5 ? "x@example.org" : "bad address")}, {}};
    case 5: return {"copy_byte_restricted", {doc, "a1", "a2", "notes"}, {opt("max_bytes", "8")}, {}};
    default: return {"no_such_function", {doc}, {}, {}};
    }
}

Verdict audit_totality() {
    Verdict v;
    std::mt19937 rng(11);
    Desk live;
    std::vector<std::pair<std::size_t, InvokeRequest>> session;
    std::vector<std::string> outcomes;
    for (int i = 0; i < 1000; ++i) {
        session.emplace_back(rng() % live.who.size(), random_request(rng));
        try {
            outcomes.emplace_back(to_string(live.m.invoke(live.who[session.back().first], session.back().second).outcome));
        } catch (const Error& e) {
            outcomes.emplace_back(std::string("error:") + std::string(to_string(e.code())));
        }
    }
    const auto records = live.m.audit_query();
    if (records.size() != 1000) v.fail(std::to_string(records.size()) + " records");
    for (std::size_t i = 0; i < records.size() && i < session.size(); ++i) {
        if (records[i].sequence != i + 1) v.fail("sequence gap at " + std::to_string(i + 1));
        if (records[i].function != session[i].second.function) v.fail("record " + std::to_string(i + 1) + " function");
        if (records[i].subject != live.who[session[i].first].subject) v.fail("record " + std::to_string(i + 1) + " subject");
    }

    Desk replay;
    for (std::size_t i = 0; i < session.size(); ++i) {
        std::string got;
        try {
            got = to_string(replay.m.invoke(replay.who[session[i].first], session[i].second).outcome);
        } catch (const Error& e) {
            got = std::string("error:") + std::string(to_string(e.code()));
        }
        if (got != outcomes[i]) v.fail("replay diverged at call " + std::to_string(i + 1));
    }
    const auto again = replay.m.audit_query();
    if (again.size() != records.size()) v.fail("replay produced " + std::to_string(again.size()) + " records");
    for (std::size_t i = 0; i < std::min(again.size(), records.size()); ++i)
        if (again[i].outcome != records[i].outcome || again[i].options_digest != records[i].options_digest)
            v.fail("replay record " + std::to_string(i + 1) + " differs");
    const auto denies = live.m.audit_query({.outcome = Outcome::Deny}).size();
    v.detail = "1000 calls, " + std::to_string(records.size()) + " records, " + std::to_string(denies) + " deny" +
               (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

// ── performance ─────────────────────────────────────────────────────────────

Verdict decide_latency() {
    Verdict v;
    std::mt19937 rng(12);
    AccessTensor t;
    constexpr int kSubjects = 200, kFunctions = 10, kObjects = 50;
    for (int s = 0; s < kSubjects; ++s) t.create_subject(SubjectId{"s" + std::to_string(s)});
    for (int f = 0; f < kFunctions; ++f) t.create_function({"f" + std::to_string(f), 1});
    for (int o = 0; o < kObjects; ++o) t.create_object(ObjectRef{"dir/o" + std::to_string(o)});
    const auto context_limit = Predicate::regex("context=[0-5](;.*)?\\nSTDIN:.*");
    for (int s = 0; s < kSubjects; ++s)
        for (int f = 0; f < kFunctions; ++f)
            for (int o = 0; o < kObjects; ++o) {
                const auto roll = rng() % 10;
                auto e = roll < 4 ? TensorEntry::true_entry()
                                  : roll < 7 ? TensorEntry::false_entry() : TensorEntry::true_with(context_limit);
                t.enter_entry(SubjectId{"s" + std::to_string(s)}, "f" + std::to_string(f),
                              make_tuple({"dir/o" + std::to_string(o)}), std::move(e));
            }
    if (t.entries().size() != 100000) v.fail(std::to_string(t.entries().size()) + " entries");

    struct Query {
        SubjectId s;
        std::string f;
        ObjectTuple o;
        Invocation inv;
    };
    std::vector<Query> queries;
    for (int i = 0; i < 10000; ++i)
        queries.push_back({SubjectId{"s" + std::to_string(rng() % kSubjects)}, "f" + std::to_string(rng() % kFunctions),
                           make_tuple({"dir/o" + std::to_string(rng() % kObjects)}),
                           Invocation{{{"context", std::to_string(rng() % 8)}, {"pattern", "needle"}}, "some stdin"}});
    std::vector<double> micros;
    micros.reserve(queries.size());
    std::size_t allows = 0;
    for (const auto& q : queries) {
        const auto t0 = Clock::now();
        const auto d = decide(t, q.s, q.f, q.o, q.inv);
        micros.push_back(std::chrono::duration<double, std::micro>(Clock::now() - t0).count());
        allows += d.outcome == Outcome::Allow;
    }
    std::nth_element(micros.begin(), micros.begin() + micros.size() / 2, micros.end());
    const auto median = micros[micros.size() / 2];
    if (median >= 50.0) v.fail("median " + std::to_string(median) + " us");
    char buf[128];
    std::snprintf(buf, sizeof buf, "median %.2f us over 10000 decides, 100000 entries, %zu allow", median, allows);
    v.detail = buf + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"arity-law", arity_law},
        {"projection-oracle", projection_equivalence},
        {"regex-predicates", regex_semantics},
        {"lattice-laws-and-compile", lattice_laws},
        {"consistency-conditions", consistency_conditions},
        {"no-leak", no_leak},
        {"context-bound", context_bound},
        {"citation-cascade", citation_cascade},
        {"composition-isolation", composition_isolation},
        {"adoc-round-trip", round_trip},
        {"audit-totality", audit_totality},
        {"decide-latency", decide_latency},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto t0 = Clock::now();
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v.fail(std::string("uncaught: ") + e.what());
        }
        std::printf("%s %-26s (%.2f s) %s\n", v.pass ? "PASS" : "FAIL", name, seconds_since(t0), v.detail.c_str());
        std::fflush(stdout);
        failed += !v.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
