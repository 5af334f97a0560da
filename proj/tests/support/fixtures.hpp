#pragma once

// Shared setup: a tensor with the guarded catalog registered and a document's
// policy installed.

#include "fbac/adoc.hpp"
#include "fbac/guarded.hpp"

#include <memory>

namespace fbac::testing {

struct Bench {
    FunctionCatalog catalog = FunctionCatalog::standard();
    AccessTensor tensor;
    AuditLog audit;
    PredicateRegistry programs = builtin_predicates();

    Bench() { catalog.register_in(tensor); }

    void install(const AtomicDocument& d) { install_document_policy(tensor, d); }

    void subject(const std::string& name) {
        if (!tensor.has_subject(SubjectId{name})) tensor.create_subject(SubjectId{name});
    }

    void grant(const std::string& s, std::string_view f, const ObjectTuple& o, TensorEntry e = TensorEntry::true_entry()) {
        subject(s);
        tensor.enter_entry(SubjectId{s}, f, o, std::move(e));
    }

    GuardContext ctx() { return GuardContext{tensor, catalog, audit, programs}; }
};

inline Atom text_atom(std::string id, std::string content) {
    Atom a;
    a.id = std::move(id);
    a.content = std::move(content);
    return a;
}

inline Atom image_atom(std::string id, std::string uri) {
    Atom a;
    a.id = std::move(id);
    a.kind = AtomKind::ImageRef;
    a.content = std::move(uri);
    return a;
}

}  // namespace fbac::testing
