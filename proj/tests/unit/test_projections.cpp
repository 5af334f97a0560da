#include <doctest.h>

#include "fbac/policy_file.hpp"
#include "fbac/projections.hpp"
#include "support/oracles.hpp"
#include "support/projection_oracle.hpp"

#include <random>

using namespace fbac;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an fbac::Error");
    return ErrorCode::Forbidden;
}

}  // namespace

TEST_CASE("authorization matrix compresses away N/A functions") {
    auto t = parse_policy("SUBJECT alice\nFUNCTION grep 1\nFUNCTION join 2\nOBJECT fileA\n");
    auto m = authorization_matrix(t, make_tuple({"fileA"}), true);
    CHECK(m.cols == std::vector<std::string>{"grep"});
    REQUIRE(m.cell(SubjectId{"alice"}, "grep"));
    CHECK(*m.cell(SubjectId{"alice"}, "grep") == TensorEntry::false_entry());

    auto full = authorization_matrix(t, make_tuple({"fileA"}), false);
    CHECK(full.cols.size() == 2);
    CHECK(*full.cell(SubjectId{"alice"}, "join") == TensorEntry::not_applicable());
    CHECK(code_of([&] { authorization_matrix(t, make_tuple({"ghost"}), true); }) == ErrorCode::UnknownObject);
}

TEST_CASE("capability matrix examples") {
    auto t = parse_policy(
        "SUBJECT alice\nFUNCTION print 1\nFUNCTION join 2\nOBJECT docX\nOBJECT docY\n"
        "ENTRY alice print docX TRUE\n");
    auto m = capability_matrix(t, SubjectId{"alice"}, true);
    int non_false = 0;
    for (const auto& [key, e] : m.cells)
        if (e != TensorEntry::false_entry()) ++non_false;
    CHECK(non_false == 1);
    CHECK(m.cell("join", make_tuple({"docX"})) == nullptr);
    REQUIRE(m.cell("join", make_tuple({"docX", "docY"})));

    auto full = capability_matrix(t, SubjectId{"alice"}, false);
    CHECK(*full.cell("join", make_tuple({"docX"})) == TensorEntry::not_applicable());
    CHECK(code_of([&] { capability_matrix(t, SubjectId{"bob"}, true); }) == ErrorCode::UnknownSubject);
}

TEST_CASE("per-function ACM reduces to a Lampson matrix") {
    auto t = parse_policy(
        "SUBJECT alice\nSUBJECT bob\nFUNCTION read 1\nFUNCTION join 2\nOBJECT f1\nOBJECT f2\n"
        "ENTRY alice read f1 TRUE\nENTRY bob read f2 TRUE\nENTRY bob read f1 FALSE\n");
    auto m = per_function_acm(t, "read", true);
    CHECK(m.cols == std::vector<ObjectTuple>{make_tuple({"f1"}), make_tuple({"f2"})});
    CHECK(*m.cell(SubjectId{"alice"}, make_tuple({"f1"})) == TensorEntry::true_entry());
    CHECK(*m.cell(SubjectId{"alice"}, make_tuple({"f2"})) == TensorEntry::false_entry());
    CHECK(*m.cell(SubjectId{"bob"}, make_tuple({"f1"})) == TensorEntry::false_entry());
    CHECK(*m.cell(SubjectId{"bob"}, make_tuple({"f2"})) == TensorEntry::true_entry());
    for (const auto& [key, e] : m.cells) CHECK(key.second.size() == 1);
}

TEST_CASE("function lists and application restriction") {
    auto t = parse_policy(
        "SUBJECT alice\nFUNCTION search 1\nFUNCTION copy 1\nFUNCTION print 1\nFUNCTION join 2\nOBJECT d\n"
        "ENTRY alice search d TRUE\nENTRY alice print d TRUE\n");
    const SubjectId alice{"alice"};
    auto restricted = application_restricted_function_list(t, {"search", "copy"}, alice, make_tuple({"d"}));
    std::set<std::string> granted;
    for (const auto& [f, e] : restricted.entries)
        if (e.grants()) granted.insert(f);
    CHECK(granted == std::set<std::string>{"search"});

    auto all = function_list(t, alice, make_tuple({"d"}));
    CHECK(all.entries.size() == 3);  // join is N/A for a single object
    auto os = application_restricted_function_list(t, {"search", "copy", "print", "join"}, alice, make_tuple({"d"}));
    CHECK(os.entries == all.entries);
    CHECK(code_of([&] { application_restricted_function_list(t, {"nope"}, alice, make_tuple({"d"})); }) ==
          ErrorCode::UnknownFunction);
}

TEST_CASE("subject list for a leaked-document audit") {
    auto t = parse_policy(
        "SUBJECT s1\nSUBJECT s2\nSUBJECT s3\nSUBJECT s4\nSUBJECT s5\nFUNCTION read_context 1\nOBJECT docX\n"
        "ENTRY s2 read_context docX TRUE\nENTRY s4 read_context docX TRUE\nENTRY s5 read_context docX FALSE\n");
    auto l = subject_list(t, "read_context", make_tuple({"docX"}));
    std::set<std::string> who;
    for (const auto& [s, e] : l.entries)
        if (e.grants()) who.insert(s.name);
    CHECK(who == std::set<std::string>{"s2", "s4"});
    CHECK(l.entries.size() == 5);

    CHECK(subject_list(t, "read_context", make_tuple({"docX"}), std::set<SubjectId>{}).entries.empty());
    CHECK(code_of([&] { subject_list(t, "read_context", {}); }) == ErrorCode::MeaninglessPair);
}

TEST_CASE("object list restricted to a directory") {
    auto t = parse_policy(
        "SUBJECT a\nFUNCTION grep 1\nFUNCTION diff 2\nOBJECT cia/f1\nOBJECT cia/f2\nOBJECT fbi/f3\n"
        "ENTRY a grep cia/f1 TRUE_RE:context=[0-5]\\nSTDIN:\nENTRY a grep fbi/f3 TRUE\n");
    auto b = tuples_under_prefix(t, 1, "cia/");
    auto l = object_list(t, SubjectId{"a"}, "grep", b);
    CHECK(l.entries.size() == 2);
    for (const auto& [o, e] : l.entries) CHECK(o[0].uri.rfind("cia/", 0) == 0);
    // the predicate is visible so the caller sees "with what restrictions"
    CHECK(l.entries.at(make_tuple({"cia/f1"})).predicate()->body() == "context=[0-5]\\nSTDIN:");

    auto pairs = object_list(t, SubjectId{"a"}, "diff");
    CHECK(pairs.entries.size() == 9);
    for (const auto& [o, e] : pairs.entries) CHECK(o.size() == 2);
}

TEST_CASE("enumeration cap") {
    auto t = parse_policy("SUBJECT a\nFUNCTION f 3\nOBJECT o1\nOBJECT o2\nOBJECT o3\nOBJECT o4\nOBJECT o5\n");
    ProjectionLimits tight{100};
    CHECK(code_of([&] { object_list(t, SubjectId{"a"}, "f", std::nullopt, tight); }) == ErrorCode::EnumerationTooLarge);
    CHECK(object_list(t, SubjectId{"a"}, "f", std::nullopt, ProjectionLimits{125}).entries.size() == 125);
    CHECK(code_of([&] { capability_matrix(t, SubjectId{"a"}, false, tight); }) == ErrorCode::EnumerationTooLarge);
}

TEST_CASE("reports render every projection") {
    auto t = parse_policy("SUBJECT a\nFUNCTION f 1\nOBJECT o\nENTRY a f o TRUE\n");
    auto m = authorization_matrix(t, make_tuple({"o"}), true);
    auto j = to_json(m);
    CHECK(j["kind"] == "authz");
    CHECK(j["cells"][0]["entry"] == "TRUE");
    CHECK(to_text(m).find("TRUE") != std::string::npos);
    CHECK(to_json(capability_matrix(t, SubjectId{"a"}, true))["cells"].size() == 1);
    CHECK(to_json(per_function_acm(t, "f", true))["rows"][0] == "a");
    CHECK(to_json(function_list(t, SubjectId{"a"}, make_tuple({"o"})))["entries"].size() == 1);
    CHECK(to_json(subject_list(t, "f", make_tuple({"o"})))["entries"][0]["subject"] == "a");
    CHECK(to_text(object_list(t, SubjectId{"a"}, "f")).find("TRUE") != std::string::npos);
}

TEST_CASE("random tensors agree with dense enumeration") {
    std::mt19937 rng(2024);
    for (int i = 0; i < 40; ++i) {
        auto rt = testing::random_tensor(rng);
        CHECK(testing::check_all_projections(rt, rng).empty());
    }
}
