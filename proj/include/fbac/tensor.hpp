#pragma once

#include "fbac/error.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fbac {

namespace re {
class Regex;
}

// ── Identifiers ─────────────────────────────────────────────────────────────

/// Tokens matching [A-Za-z0-9._/-]+.
bool is_identifier(std::string_view token);

/// Identifiers, optionally chained with U+2218 RING OPERATOR for composites ("f∘g").
bool is_function_name(std::string_view token);

inline constexpr std::string_view kComposeOperator = "\xE2\x88\x98";

struct SubjectId {
    std::string name;
    auto operator<=>(const SubjectId&) const = default;
};

struct ObjectRef {
    std::string uri;
    auto operator<=>(const ObjectRef&) const = default;
};

/// Ordered: (a,b) and (b,a) are distinct coordinates. Length 0 is the empty tuple.
using ObjectTuple = std::vector<ObjectRef>;

ObjectTuple make_tuple(std::initializer_list<std::string_view> uris);

/// "a,b" for a tuple, "-" for the empty tuple (the policy-file spelling).
std::string format_tuple(const ObjectTuple& objects);
ObjectTuple parse_tuple(std::string_view text);

struct FunctionSig {
    std::string name;
    std::size_t arity = 0;
    auto operator<=>(const FunctionSig&) const = default;
};

struct Option {
    std::string key;
    std::optional<std::string> value;
    bool operator==(const Option&) const = default;
};

/// Non-object inputs of a call: options in caller order plus standard input.
struct Invocation {
    std::vector<Option> options;
    std::string stdin_bytes;
    bool operator==(const Invocation&) const = default;
};

/// Deterministic rendering matched by regular-expression predicates:
/// `k1=v1;k2;k3=v3` + "\nSTDIN:" + stdin. Control bytes and bytes that are not
/// valid UTF-8 become `\xHH`; inside option keys and values `;`, `=` (keys only)
/// and every control byte including newline are escaped the same way so a value
/// can never forge another option or the stdin separator.
std::string canonical_serialize(const Invocation& inv);

// ── Entries ─────────────────────────────────────────────────────────────────

class Predicate {
public:
    enum class Kind { RegularExpression, ProgramRef };

    /// Never throws; an invalid pattern surfaces as PredicateError when evaluated.
    static Predicate regex(std::string pattern);
    static Predicate program(std::string name);

    Kind kind() const noexcept { return kind_; }
    const std::string& body() const noexcept { return body_; }
    const re::Regex* compiled() const noexcept { return compiled_.get(); }
    const std::string& compile_error() const noexcept { return compile_error_; }

    bool operator==(const Predicate& other) const { return kind_ == other.kind_ && body_ == other.body_; }

private:
    Predicate(Kind kind, std::string body) : kind_(kind), body_(std::move(body)) {}

    Kind kind_;
    std::string body_;
    std::shared_ptr<const re::Regex> compiled_;
    std::string compile_error_;
};

class TensorEntry {
public:
    enum class Value { NotApplicable, False, True, TrueWith };

    /// Default is the deny-by-default reading of an absent entry.
    TensorEntry() : value_(Value::False) {}

    static TensorEntry not_applicable() { return TensorEntry(Value::NotApplicable); }
    static TensorEntry false_entry() { return TensorEntry(Value::False); }
    static TensorEntry true_entry() { return TensorEntry(Value::True); }
    static TensorEntry true_with(Predicate predicate);

    Value value() const noexcept { return value_; }
    const Predicate* predicate() const noexcept { return predicate_ ? &*predicate_ : nullptr; }

    /// True or TrueWith.
    bool grants() const noexcept { return value_ == Value::True || value_ == Value::TrueWith; }

    bool operator==(const TensorEntry&) const = default;

private:
    explicit TensorEntry(Value v) : value_(v) {}

    Value value_;
    std::optional<Predicate> predicate_;
};

/// Policy-file spelling: N/A, FALSE, TRUE, TRUE_RE:<pattern>, TRUE_PROG:<name>.
std::string to_string(const TensorEntry& entry);

/// Inverse of to_string for stored values; throws PolicySyntax.
TensorEntry parse_entry(std::string_view text);

// ── Predicate programs ──────────────────────────────────────────────────────

using PredicateProgram = std::function<bool(const Invocation&)>;

/// Named pure evaluators that ProgramRef predicates resolve against.
class PredicateRegistry {
public:
    void add(std::string name, PredicateProgram program);
    const PredicateProgram* find(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, PredicateProgram, std::less<>> programs_;
};

/// always, never, stdin_empty, no_options.
const PredicateRegistry& builtin_predicates();

/// Throws PredicateError for an invalid pattern or unresolved program.
bool match_predicate(const Predicate& predicate, const Invocation& inv,
                     const PredicateRegistry& programs = builtin_predicates());

// ── Tensor ──────────────────────────────────────────────────────────────────

struct EntryKey {
    SubjectId subject;
    std::string function;
    ObjectTuple objects;
    auto operator<=>(const EntryKey&) const = default;
};

/// Sparse Access Control Tensor over (subject, function, object tuple).
///
/// Only False/True/TrueWith are stored. A coordinate whose tuple length differs
/// from the function's arity is NotApplicable; an arity-correct coordinate with
/// no stored entry reads as False.
///
/// Copying a tensor yields an independent snapshot; readers may share a const
/// snapshot across threads.
class AccessTensor {
public:
    using EntryMap = std::map<EntryKey, TensorEntry>;

    void create_subject(const SubjectId& subject);
    void destroy_subject(const SubjectId& subject);
    void create_object(const ObjectRef& object);
    void destroy_object(const ObjectRef& object);
    void create_function(const FunctionSig& function);
    void destroy_function(std::string_view name);

    /// Overwrites any previous entry at the coordinate.
    void enter_entry(const SubjectId& subject, std::string_view function, const ObjectTuple& objects,
                     TensorEntry entry);
    /// Returns false when no entry was stored.
    bool delete_entry(const SubjectId& subject, std::string_view function, const ObjectTuple& objects);

    /// Throws UnknownSubject / UnknownFunction / UnknownObject.
    TensorEntry lookup(const SubjectId& subject, std::string_view function, const ObjectTuple& objects) const;

    bool has_subject(const SubjectId& subject) const { return subjects_.contains(subject); }
    bool has_object(const ObjectRef& object) const { return objects_.contains(object); }
    bool has_function(std::string_view name) const { return functions_.find(name) != functions_.end(); }
    const FunctionSig& function(std::string_view name) const;

    const std::set<SubjectId>& subjects() const noexcept { return subjects_; }
    const std::set<ObjectRef>& objects() const noexcept { return objects_; }
    const std::map<std::string, FunctionSig, std::less<>>& functions() const noexcept { return functions_; }
    const EntryMap& entries() const noexcept { return entries_; }

    /// Order-independent digest of registrations and entries.
    std::uint64_t fingerprint() const;

private:
    void require_registered(const SubjectId& subject, std::string_view function, const ObjectTuple& objects,
                            bool mutation) const;

    std::set<SubjectId> subjects_;
    std::set<ObjectRef> objects_;
    std::map<std::string, FunctionSig, std::less<>> functions_;
    EntryMap entries_;
};

/// Free-function spelling of AccessTensor::lookup.
inline TensorEntry tensor_lookup(const AccessTensor& t, const SubjectId& s, std::string_view f,
                                 const ObjectTuple& o) {
    return t.lookup(s, f, o);
}

// ── Decisions ───────────────────────────────────────────────────────────────

enum class Outcome { Allow, Deny, NotApplicable };

enum class DecisionReason {
    ArityMismatch,
    NoEntry,
    StoredFalse,
    StoredTrue,
    PredicateMatched,
    PredicateFailed,
    PredicateError,
};

std::string_view to_string(Outcome outcome);
std::string_view to_string(DecisionReason reason);

struct Decision {
    Outcome outcome = Outcome::Deny;
    DecisionReason reason = DecisionReason::NoEntry;
    TensorEntry entry = TensorEntry::false_entry();
    std::string detail;  // predicate error text when reason == PredicateError

    bool operator==(const Decision&) const = default;
};

/// Arity mismatch gives NotApplicable; False/absent gives Deny; True gives Allow;
/// TrueWith allows only when the predicate accepts `inv`. A predicate that cannot
/// be evaluated denies with reason PredicateError.
Decision decide(const AccessTensor& t, const SubjectId& subject, std::string_view function,
                const ObjectTuple& objects, const Invocation& inv,
                const PredicateRegistry& programs = builtin_predicates());

}  // namespace fbac
