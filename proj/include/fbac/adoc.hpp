#pragma once

#include "fbac/lattice.hpp"
#include "fbac/tensor.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fbac {

enum class AtomKind { Text, ImageRef };
enum class Cascade { UnavailableOnRemove, None };

std::string_view to_string(AtomKind k);
std::string_view to_string(Cascade c);

struct AtomLink {
    std::string target;  // atom id, or "<doc>/<atom>" for another document
    std::string relation;
    Cascade cascade = Cascade::None;

    bool operator==(const AtomLink&) const = default;
};

/// Per-atom function list: function name -> subject -> entry.
using AtomPolicy = std::map<std::string, std::map<SubjectId, TensorEntry>>;

struct Atom {
    std::string id;
    AtomKind kind = AtomKind::Text;
    std::string content;
    AtomPolicy policy;
    std::optional<SecurityClass> classification;
    std::vector<AtomLink> links;
    bool removed = false;

    bool operator==(const Atom&) const = default;
};

struct AtomicDocument {
    std::string id;
    unsigned version = 1;
    std::set<std::string> forbidden_functions;
    std::optional<SecurityClass> classification;
    std::vector<Atom> atoms;

    bool operator==(const AtomicDocument&) const = default;

    const Atom* find(std::string_view atom_id) const;
    Atom* find(std::string_view atom_id);
    /// Throws UnknownAtom.
    const Atom& at(std::string_view atom_id) const;
};

/// Tensor object naming an atom: "<doc>/<atom>".
ObjectRef atom_object(std::string_view doc_id, std::string_view atom_id);

/// `functions` is the registry of valid function names for policies and the forbidden set.
AtomicDocument parse_adoc(std::string_view bytes, const std::set<std::string>& functions);
std::string serialize_adoc(const AtomicDocument& d);

/// One atom per blank-line-delimited paragraph, ids a1..aN, empty policies.
AtomicDocument import_plain_text(std::string_view plain, std::string doc_id);

// ── Consistency ─────────────────────────────────────────────────────────────

/// Functions on which any subject holds True or TrueWith.
std::set<std::string> granted_functions(const Atom& atom);

/// Granted functions disjoint from the document's forbidden set.
bool check_atom_consistency(const Atom& atom, const AtomicDocument& d);

/// Also requires the atom class to be dominated by the document class (strictly, when `strict`).
/// Throws MissingClassification when either class is absent.
bool check_atom_consistency_classified(const Atom& atom, const AtomicDocument& d, bool strict = false);

enum class Condition { ForbiddenFunctionGranted, ClassificationExceeds };

struct Violation {
    std::string atom_id;
    Condition condition;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool accepted() const { return violations.empty(); }
};

ValidationReport validate_document(const AtomicDocument& d, bool strict_classification = false);

/// Plain componentwise dominance, no lattice universe involved.
bool class_dominated(const SecurityClass& lower, const SecurityClass& upper);

// ── Links and availability ──────────────────────────────────────────────────

/// `atom_id` plus every atom that reaches it over cascade links. Throws UnknownAtom.
std::set<std::string> link_closure(const AtomicDocument& d, std::string_view atom_id);

/// Atoms that are neither removed nor cascade-dependent on a removed atom.
std::set<std::string> available_atoms(const AtomicDocument& d);

AtomicDocument remove_atom(const AtomicDocument& d, std::string_view atom_id);
AtomicDocument restore_atom(const AtomicDocument& d, std::string_view atom_id);

/// Registers atom objects and policy subjects in `t` and enters each atom's policy.
/// Functions must already be registered with arity 1.
void install_document_policy(AccessTensor& t, const AtomicDocument& d);

}  // namespace fbac
