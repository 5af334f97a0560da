#include "fbac/adoc.hpp"
#include "fbac/lattice.hpp"
#include "fbac/monitor.hpp"
#include "fbac/policy_file.hpp"
#include "fbac/projections.hpp"
#include "fbac/regex.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fbac;
using nlohmann::json;

namespace {

py::object to_py(const json& j) {
    switch (j.type()) {
    case json::value_t::null: return py::none();
    case json::value_t::boolean: return py::bool_(j.get<bool>());
    case json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case json::value_t::number_float: return py::float_(j.get<double>());
    case json::value_t::string: return py::str(j.get_ref<const std::string&>());
    case json::value_t::array: {
        py::list out;
        for (const auto& x : j) out.append(to_py(x));
        return out;
    }
    case json::value_t::object: {
        py::dict out;
        for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
        return out;
    }
    default: return py::none();
    }
}

ObjectTuple tuple_of(const std::vector<std::string>& objects) {
    ObjectTuple out;
    for (const auto& o : objects) out.push_back(ObjectRef{o});
    return out;
}

// dict keeps insertion order; None values are bare flags.
std::vector<Option> options_of(const py::dict& options) {
    std::vector<Option> out;
    for (const auto& [k, v] : options) {
        Option o{py::str(k), std::nullopt};
        if (!v.is_none()) o.value = py::str(v);
        out.push_back(std::move(o));
    }
    return out;
}

py::dict decision_dict(const Decision& d) {
    py::dict out;
    out["outcome"] = std::string(to_string(d.outcome));
    out["reason"] = std::string(to_string(d.reason));
    out["entry"] = to_string(d.entry);
    if (!d.detail.empty()) out["detail"] = d.detail;
    return out;
}

}  // namespace

PYBIND11_MODULE(_fbac, m) {
    m.doc() = "Function-based access control engine";

    // Created once; the module attribute keeps it alive.
    static PyObject* error_type = PyErr_NewException("fbac._fbac.FbacError", PyExc_RuntimeError, nullptr);
    m.attr("FbacError") = py::reinterpret_borrow<py::object>(error_type);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error_type, exc.ptr());
        }
    });

    // ── tensor ──
    py::class_<AccessTensor>(m, "AccessTensor")
        .def(py::init<>())
        .def("create_subject", [](AccessTensor& t, const std::string& s) { t.create_subject(SubjectId{s}); })
        .def("create_object", [](AccessTensor& t, const std::string& o) { t.create_object(ObjectRef{o}); })
        .def("create_function",
             [](AccessTensor& t, const std::string& name, std::size_t arity) { t.create_function({name, arity}); })
        .def("destroy_subject", [](AccessTensor& t, const std::string& s) { t.destroy_subject(SubjectId{s}); })
        .def("destroy_object", [](AccessTensor& t, const std::string& o) { t.destroy_object(ObjectRef{o}); })
        .def("destroy_function", [](AccessTensor& t, const std::string& f) { t.destroy_function(f); })
        .def(
            "enter",
            [](AccessTensor& t, const std::string& s, const std::string& f, const std::vector<std::string>& o,
               const std::string& entry) { t.enter_entry(SubjectId{s}, f, tuple_of(o), parse_entry(entry)); },
            py::arg("subject"), py::arg("function"), py::arg("objects"), py::arg("entry"),
            "entry uses the policy spelling: FALSE, TRUE, TRUE_RE:<pattern>, TRUE_PROG:<name>")
        .def("delete", [](AccessTensor& t, const std::string& s, const std::string& f,
                          const std::vector<std::string>& o) { return t.delete_entry(SubjectId{s}, f, tuple_of(o)); })
        .def("lookup",
             [](const AccessTensor& t, const std::string& s, const std::string& f, const std::vector<std::string>& o) {
                 return to_string(t.lookup(SubjectId{s}, f, tuple_of(o)));
             })
        .def(
            "decide",
            [](const AccessTensor& t, const std::string& s, const std::string& f, const std::vector<std::string>& o,
               const py::dict& options, const std::string& stdin_bytes) {
                return decision_dict(decide(t, SubjectId{s}, f, tuple_of(o), Invocation{options_of(options), stdin_bytes}));
            },
            py::arg("subject"), py::arg("function"), py::arg("objects"), py::arg("options") = py::dict(),
            py::arg("stdin") = "")
        .def_property_readonly("subjects",
                               [](const AccessTensor& t) {
                                   std::vector<std::string> out;
                                   for (const auto& s : t.subjects()) out.push_back(s.name);
                                   return out;
                               })
        .def_property_readonly("objects",
                               [](const AccessTensor& t) {
                                   std::vector<std::string> out;
                                   for (const auto& o : t.objects()) out.push_back(o.uri);
                                   return out;
                               })
        .def_property_readonly("functions",
                               [](const AccessTensor& t) {
                                   std::map<std::string, std::size_t> out;
                                   for (const auto& [n, f] : t.functions()) out[n] = f.arity;
                                   return out;
                               })
        .def("__len__", [](const AccessTensor& t) { return t.entries().size(); })
        .def("fingerprint", &AccessTensor::fingerprint);

    m.def("parse_policy", [](const std::string& text) { return parse_policy(text); }, py::arg("text"));
    m.def("serialize_policy", &serialize_policy, py::arg("tensor"));
    m.def(
        "canonical_serialize",
        [](const py::dict& options, const std::string& stdin_bytes) {
            return canonical_serialize(Invocation{options_of(options), stdin_bytes});
        },
        py::arg("options") = py::dict(), py::arg("stdin") = "");
    m.def(
        "regex_full_match", [](const std::string& pattern, const std::string& subject) {
            return re::Regex(pattern).full_match(subject);
        },
        py::arg("pattern"), py::arg("subject"));
    m.def("decimal_at_most", &re::decimal_at_most);

    // ── projections ──
    m.def(
        "project",
        [](const AccessTensor& t, const std::string& kind, const std::map<std::string, std::string>& params,
           bool as_text) -> py::object {
            auto r = run_projection(t, kind, params);
            if (as_text) return py::str(r.text);
            return to_py(r.json);
        },
        py::arg("tensor"), py::arg("kind"), py::arg("params") = std::map<std::string, std::string>{},
        py::arg("text") = false);

    // ── lattice ──
    m.def(
        "compile_lattice",
        [](const std::string& policy, const AccessTensor* base) {
            const auto a = parse_lattice_policy(policy);
            if (base) return compile_to_tensor(a, *base);
            // no base: register exactly the names the assignment mentions
            AccessTensor t;
            for (const auto& [s, _] : a.subject_class) t.create_subject(s);
            for (const auto& [pair, _] : a.pair_class) {
                if (!t.has_function(pair.first)) t.create_function({pair.first, pair.second.size()});
                for (const auto& o : pair.second)
                    if (!t.has_object(o)) t.create_object(o);
            }
            return compile_to_tensor(a, t);
        },
        py::arg("policy"), py::arg("base") = nullptr);

    // ── documents ──
    m.def(
        "import_plain_text",
        [](const std::string& plain, const std::string& doc_id) { return serialize_adoc(import_plain_text(plain, doc_id)); },
        py::arg("text"), py::arg("doc_id"));
    m.def(
        "normalize_adoc",
        [](const std::string& adoc) { return serialize_adoc(parse_adoc(adoc, FunctionCatalog::standard().names())); },
        py::arg("adoc"));
    m.def(
        "validate_adoc",
        [](const std::string& adoc, bool strict) {
            py::list out;
            const auto report = validate_document(parse_adoc(adoc, FunctionCatalog::standard().names()), strict);
            for (const auto& v : report.violations) {
                py::dict d;
                d["atom"] = v.atom_id;
                d["condition"] = v.condition == Condition::ForbiddenFunctionGranted ? "forbidden_function_granted"
                                                                                    : "classification_exceeds";
                d["detail"] = v.detail;
                out.append(d);
            }
            return out;
        },
        py::arg("adoc"), py::arg("strict") = false);
    m.def(
        "questionnaire_defaults",
        [](const std::string& adoc, const std::string& author, bool printable, bool copyable, bool emailable,
           std::size_t search_context) {
            const auto d = parse_adoc(adoc, FunctionCatalog::standard().names());
            QuestionnaireAnswers q{printable, copyable, emailable, search_context, {}};
            return serialize_adoc(apply_batch(d, defaults_from_questionnaire(q, d, SubjectId{author})));
        },
        py::arg("adoc"), py::arg("author"), py::arg("printable") = true, py::arg("copyable") = true,
        py::arg("emailable") = true, py::arg("search_context") = 5);

    // ── monitor ──
    py::class_<Principal>(m, "Principal")
        .def_property_readonly("subject", [](const Principal& p) { return p.subject.name; })
        .def_property_readonly("role", [](const Principal& p) { return std::string(to_string(p.role)); })
        .def("__repr__", [](const Principal& p) {
            return "<Principal " + p.subject.name + " " + std::string(to_string(p.role)) + ">";
        });

    py::class_<Monitor>(m, "Monitor")
        .def(py::init([](const std::string& outbox, const std::string& policy_cc, std::size_t page_lines) {
                 return std::make_unique<Monitor>(MonitorConfig{policy_cc, outbox, page_lines});
             }),
             py::arg("outbox") = "", py::arg("policy_cc") = "supervisor@localhost",
             py::arg("page_lines") = kDefaultPageLines)
        .def("set_identities", [](Monitor& m, const std::string& text) { m.set_identities(IdentityStore::parse(text)); })
        .def("authenticate", &Monitor::authenticate, py::arg("token"))
        .def("load_policy", [](Monitor& m, const std::string& text) { m.load_policy(text); })
        .def("load_lattice", [](Monitor& m, const std::string& text) { m.load_lattice(text); })
        .def("load_directory", [](Monitor& m, const std::string& dir) { m.load_directory(dir); })
        .def("put_document",
             [](Monitor& m, const std::string& adoc) { m.put_document(parse_adoc(adoc, m.catalog()->names())); })
        .def("document",
             [](const Monitor& m, const std::string& id) -> py::object {
                 auto d = m.document(id);
                 if (!d) return py::none();
                 return py::str(serialize_adoc(*d));
             })
        .def_property_readonly("documents", &Monitor::document_ids)
        .def("snapshot", [](const Monitor& m) { return AccessTensor(*m.snapshot()); })
        .def("compose", [](Monitor& m, const std::string& f, const std::string& g) { return m.compose(f, g).name; })
        .def(
            "invoke",
            [](Monitor& m, const Principal& p, const std::string& function, const std::vector<std::string>& args,
               const py::dict& options, const std::string& stdin_bytes) {
                InvokeRequest req{function, args, options_of(options), stdin_bytes};
                InvokeResponse r;
                {
                    py::gil_scoped_release release;
                    r = m.invoke(p, req);
                }
                return py::make_tuple(std::string(to_string(r.outcome)), to_py(r.result));
            },
            py::arg("principal"), py::arg("function"), py::arg("args") = std::vector<std::string>{},
            py::arg("options") = py::dict(), py::arg("stdin") = "")
        .def(
            "audit",
            [](const Monitor& m, std::optional<std::string> subject, std::optional<std::string> function,
               std::optional<std::string> object, std::optional<std::string> outcome) {
                AuditFilter f;
                if (subject) f.subject = SubjectId{*subject};
                f.function = function;
                if (object) f.object = ObjectRef{*object};
                if (outcome) f.outcome = *outcome == "Allow" ? Outcome::Allow : Outcome::Deny;
                py::list out;
                for (const auto& r : m.audit_query(f)) out.append(to_py(to_json(r)));
                return out;
            },
            py::arg("subject") = py::none(), py::arg("function") = py::none(), py::arg("object") = py::none(),
            py::arg("outcome") = py::none())
        .def("atom_functions",
             [](const Monitor& m, const Principal& p, const std::string& doc, const std::string& atom) {
                 return to_py(to_json(m.atom_functions(p, doc, atom)));
             })
        .def(
            "projection",
            [](const Monitor& m, const Principal& p, const std::string& kind,
               const std::map<std::string, std::string>& params) { return to_py(m.projection(p, kind, params)); },
            py::arg("principal"), py::arg("kind"), py::arg("params") = std::map<std::string, std::string>{});
}
