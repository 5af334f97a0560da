#include "fbac/tensor.hpp"

#include "fbac/regex.hpp"
#include "fbac/text.hpp"

#include <algorithm>

namespace fbac {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::UnknownSubject: return "UnknownSubject";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::UnknownObject: return "UnknownObject";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::DuplicateIdentifier: return "DuplicateIdentifier";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::InvalidIdentifier: return "InvalidIdentifier";
    case ErrorCode::PredicateError: return "PredicateError";
    case ErrorCode::InvalidPattern: return "InvalidPattern";
    case ErrorCode::PolicySyntax: return "PolicySyntax";
    case ErrorCode::MeaninglessPair: return "MeaninglessPair";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::ForeignClass: return "ForeignClass";
    case ErrorCode::UnassignedPair: return "UnassignedPair";
    case ErrorCode::UnassignedSubject: return "UnassignedSubject";
    case ErrorCode::UnassignedObject: return "UnassignedObject";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::DuplicateAtomId: return "DuplicateAtomId";
    case ErrorCode::DanglingLink: return "DanglingLink";
    case ErrorCode::UnknownFunctionName: return "UnknownFunctionName";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::InvalidDocument: return "InvalidDocument";
    case ErrorCode::MissingClassification: return "MissingClassification";
    case ErrorCode::UnknownAtom: return "UnknownAtom";
    case ErrorCode::DuplicateComposite: return "DuplicateComposite";
    case ErrorCode::NotComposable: return "NotComposable";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidAddress: return "InvalidAddress";
    case ErrorCode::InvalidOption: return "InvalidOption";
    case ErrorCode::AccessDenied: return "AccessDenied";
    case ErrorCode::InconsistentDefaults: return "InconsistentDefaults";
    case ErrorCode::NotASubset: return "NotASubset";
    case ErrorCode::Unauthenticated: return "Unauthenticated";
    case ErrorCode::UnknownDocument: return "UnknownDocument";
    case ErrorCode::Forbidden: return "Forbidden";
    }
    return "Unknown";
}

// ── Identifiers ─────────────────────────────────────────────────────────────

bool is_identifier(std::string_view token) {
    if (token.empty()) return false;
    return std::all_of(token.begin(), token.end(), [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' ||
               c == '_' || c == '/' || c == '-';
    });
}

bool is_function_name(std::string_view token) {
    for (;;) {
        const auto at = token.find(kComposeOperator);
        if (at == std::string_view::npos) return is_identifier(token);
        if (!is_identifier(token.substr(0, at))) return false;
        token.remove_prefix(at + kComposeOperator.size());
    }
}

ObjectTuple make_tuple(std::initializer_list<std::string_view> uris) {
    ObjectTuple out;
    for (auto uri : uris) out.push_back(ObjectRef{std::string(uri)});
    return out;
}

std::string format_tuple(const ObjectTuple& objects) {
    if (objects.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        if (i) out += ',';
        out += objects[i].uri;
    }
    return out;
}

ObjectTuple parse_tuple(std::string_view spelling) {
    if (spelling == "-") return {};
    ObjectTuple out;
    for (auto& part : text::split(spelling, ',')) {
        if (!is_identifier(part)) throw Error(ErrorCode::InvalidIdentifier, "bad object '" + part + "'");
        out.push_back(ObjectRef{std::move(part)});
    }
    return out;
}

// ── Canonical serialization ─────────────────────────────────────────────────

namespace {

void append_escaped_byte(std::string& out, unsigned char b) {
    static constexpr char kHex[] = "0123456789abcdef";
    out += "\\x";
    out += kHex[b >> 4];
    out += kHex[b & 0xf];
}

// `extra` lists additional ASCII bytes to escape; `keep_whitespace` retains \t \n \r.
void append_text(std::string& out, std::string_view s, std::string_view extra, bool keep_whitespace) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto b = static_cast<unsigned char>(s[pos]);
        const auto len = text::utf8_sequence_length(s, pos);
        if (len == 0) {
            append_escaped_byte(out, b);
            ++pos;
            continue;
        }
        if (len == 1) {
            const bool whitespace = b == '\t' || b == '\n' || b == '\r';
            const bool control = b < 0x20 || b == 0x7f;
            if ((control && !(keep_whitespace && whitespace)) || extra.find(static_cast<char>(b)) != extra.npos) {
                append_escaped_byte(out, b);
                ++pos;
                continue;
            }
        }
        out.append(s.substr(pos, len));
        pos += len;
    }
}

}  // namespace

std::string canonical_serialize(const Invocation& inv) {
    std::string out;
    for (std::size_t i = 0; i < inv.options.size(); ++i) {
        if (i) out += ';';
        const auto& opt = inv.options[i];
        append_text(out, opt.key, ";=", false);
        if (opt.value) {
            out += '=';
            append_text(out, *opt.value, ";", false);
        }
    }
    out += "\nSTDIN:";
    append_text(out, inv.stdin_bytes, "", true);
    return out;
}

// ── Entries and predicates ──────────────────────────────────────────────────

Predicate Predicate::regex(std::string pattern) {
    Predicate p(Kind::RegularExpression, std::move(pattern));
    try {
        p.compiled_ = std::make_shared<const re::Regex>(p.body_);
    } catch (const Error& e) {
        p.compile_error_ = e.what();
    }
    return p;
}

Predicate Predicate::program(std::string name) { return Predicate(Kind::ProgramRef, std::move(name)); }

TensorEntry TensorEntry::true_with(Predicate predicate) {
    TensorEntry e(Value::TrueWith);
    e.predicate_ = std::move(predicate);
    return e;
}

std::string to_string(const TensorEntry& entry) {
    switch (entry.value()) {
    case TensorEntry::Value::NotApplicable: return "N/A";
    case TensorEntry::Value::False: return "FALSE";
    case TensorEntry::Value::True: return "TRUE";
    case TensorEntry::Value::TrueWith: {
        const auto* p = entry.predicate();
        return (p->kind() == Predicate::Kind::RegularExpression ? "TRUE_RE:" : "TRUE_PROG:") + p->body();
    }
    }
    return "?";
}

TensorEntry parse_entry(std::string_view spelling) {
    if (spelling == "FALSE") return TensorEntry::false_entry();
    if (spelling == "TRUE") return TensorEntry::true_entry();
    if (text::starts_with(spelling, "TRUE_RE:")) {
        auto p = Predicate::regex(std::string(spelling.substr(8)));
        if (!p.compiled()) throw Error(ErrorCode::PolicySyntax, p.compile_error());
        return TensorEntry::true_with(std::move(p));
    }
    if (text::starts_with(spelling, "TRUE_PROG:")) {
        const auto name = spelling.substr(10);
        if (!is_identifier(name)) throw Error(ErrorCode::PolicySyntax, "bad program name '" + std::string(name) + "'");
        return TensorEntry::true_with(Predicate::program(std::string(name)));
    }
    throw Error(ErrorCode::PolicySyntax, "unknown entry value '" + std::string(spelling) + "'");
}

void PredicateRegistry::add(std::string name, PredicateProgram program) {
    if (!is_identifier(name)) throw Error(ErrorCode::InvalidIdentifier, "bad program name '" + name + "'");
    programs_[std::move(name)] = std::move(program);
}

const PredicateProgram* PredicateRegistry::find(std::string_view name) const {
    auto it = programs_.find(name);
    return it == programs_.end() ? nullptr : &it->second;
}

std::vector<std::string> PredicateRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : programs_) out.push_back(name);
    return out;
}

const PredicateRegistry& builtin_predicates() {
    static const PredicateRegistry registry = [] {
        PredicateRegistry r;
        r.add("always", [](const Invocation&) { return true; });
        r.add("never", [](const Invocation&) { return false; });
        r.add("stdin_empty", [](const Invocation& inv) { return inv.stdin_bytes.empty(); });
        r.add("no_options", [](const Invocation& inv) { return inv.options.empty(); });
        return r;
    }();
    return registry;
}

bool match_predicate(const Predicate& predicate, const Invocation& inv, const PredicateRegistry& programs) {
    if (predicate.kind() == Predicate::Kind::RegularExpression) {
        const auto* compiled = predicate.compiled();
        if (!compiled) throw Error(ErrorCode::PredicateError, predicate.compile_error());
        return compiled->full_match(canonical_serialize(inv));
    }
    const auto* program = programs.find(predicate.body());
    if (!program) throw Error(ErrorCode::PredicateError, "unresolved program '" + predicate.body() + "'");
    return (*program)(inv);
}

// ── Tensor ──────────────────────────────────────────────────────────────────

void AccessTensor::create_subject(const SubjectId& subject) {
    if (!is_identifier(subject.name)) throw Error(ErrorCode::InvalidIdentifier, "subject '" + subject.name + "'");
    if (!subjects_.insert(subject).second)
        throw Error(ErrorCode::DuplicateIdentifier, "subject '" + subject.name + "'");
}

void AccessTensor::destroy_subject(const SubjectId& subject) {
    if (subjects_.erase(subject) == 0) throw Error(ErrorCode::UnknownIdentifier, "subject '" + subject.name + "'");
    std::erase_if(entries_, [&](const auto& kv) { return kv.first.subject == subject; });
}

void AccessTensor::create_object(const ObjectRef& object) {
    if (!is_identifier(object.uri)) throw Error(ErrorCode::InvalidIdentifier, "object '" + object.uri + "'");
    if (!objects_.insert(object).second) throw Error(ErrorCode::DuplicateIdentifier, "object '" + object.uri + "'");
}

void AccessTensor::destroy_object(const ObjectRef& object) {
    if (objects_.erase(object) == 0) throw Error(ErrorCode::UnknownIdentifier, "object '" + object.uri + "'");
    std::erase_if(entries_, [&](const auto& kv) {
        const auto& objs = kv.first.objects;
        return std::find(objs.begin(), objs.end(), object) != objs.end();
    });
}

void AccessTensor::create_function(const FunctionSig& function) {
    if (!is_function_name(function.name))
        throw Error(ErrorCode::InvalidIdentifier, "function '" + function.name + "'");
    if (!functions_.emplace(function.name, function).second)
        throw Error(ErrorCode::DuplicateIdentifier, "function '" + function.name + "'");
}

void AccessTensor::destroy_function(std::string_view name) {
    auto it = functions_.find(name);
    if (it == functions_.end()) throw Error(ErrorCode::UnknownIdentifier, "function '" + std::string(name) + "'");
    functions_.erase(it);
    std::erase_if(entries_, [&](const auto& kv) { return kv.first.function == name; });
}

const FunctionSig& AccessTensor::function(std::string_view name) const {
    auto it = functions_.find(name);
    if (it == functions_.end()) throw Error(ErrorCode::UnknownFunction, "function '" + std::string(name) + "'");
    return it->second;
}

void AccessTensor::require_registered(const SubjectId& subject, std::string_view function,
                                      const ObjectTuple& objects, bool mutation) const {
    auto code = [mutation](ErrorCode specific) { return mutation ? ErrorCode::UnknownIdentifier : specific; };
    if (!subjects_.contains(subject))
        throw Error(code(ErrorCode::UnknownSubject), "subject '" + subject.name + "'");
    if (!has_function(function))
        throw Error(code(ErrorCode::UnknownFunction), "function '" + std::string(function) + "'");
    for (const auto& o : objects)
        if (!objects_.contains(o)) throw Error(code(ErrorCode::UnknownObject), "object '" + o.uri + "'");
}

void AccessTensor::enter_entry(const SubjectId& subject, std::string_view function, const ObjectTuple& objects,
                               TensorEntry entry) {
    require_registered(subject, function, objects, true);
    const auto& sig = this->function(function);
    if (objects.size() != sig.arity)
        throw Error(ErrorCode::ArityMismatch, "function '" + sig.name + "' has arity " + std::to_string(sig.arity) +
                                                  ", got " + std::to_string(objects.size()) + " objects");
    if (entry.value() == TensorEntry::Value::NotApplicable)
        throw Error(ErrorCode::ArityMismatch, "N/A is derived from arity and cannot be stored");
    entries_.insert_or_assign(EntryKey{subject, std::string(function), objects}, std::move(entry));
}

bool AccessTensor::delete_entry(const SubjectId& subject, std::string_view function, const ObjectTuple& objects) {
    require_registered(subject, function, objects, true);
    return entries_.erase(EntryKey{subject, std::string(function), objects}) > 0;
}

TensorEntry AccessTensor::lookup(const SubjectId& subject, std::string_view function,
                                 const ObjectTuple& objects) const {
    require_registered(subject, function, objects, false);
    if (objects.size() != this->function(function).arity) return TensorEntry::not_applicable();
    auto it = entries_.find(EntryKey{subject, std::string(function), objects});
    return it == entries_.end() ? TensorEntry::false_entry() : it->second;
}

std::uint64_t AccessTensor::fingerprint() const {
    // Containers are ordered, so the digest does not depend on insertion order.
    std::uint64_t h = text::fnv1a("fbac-tensor");
    for (const auto& s : subjects_) h = text::fnv1a("S" + s.name + '\0', h);
    for (const auto& o : objects_) h = text::fnv1a("O" + o.uri + '\0', h);
    for (const auto& [name, sig] : functions_) h = text::fnv1a("F" + name + ':' + std::to_string(sig.arity) + '\0', h);
    for (const auto& [key, entry] : entries_)
        h = text::fnv1a("E" + key.subject.name + ' ' + key.function + ' ' + format_tuple(key.objects) + ' ' +
                            to_string(entry) + '\0',
                        h);
    return h;
}

// ── Decisions ───────────────────────────────────────────────────────────────

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
    case Outcome::Allow: return "Allow";
    case Outcome::Deny: return "Deny";
    case Outcome::NotApplicable: return "NotApplicable";
    }
    return "?";
}

std::string_view to_string(DecisionReason reason) {
    switch (reason) {
    case DecisionReason::ArityMismatch: return "arity-mismatch";
    case DecisionReason::NoEntry: return "no-entry";
    case DecisionReason::StoredFalse: return "stored-false";
    case DecisionReason::StoredTrue: return "stored-true";
    case DecisionReason::PredicateMatched: return "predicate-matched";
    case DecisionReason::PredicateFailed: return "predicate-failed";
    case DecisionReason::PredicateError: return "predicate-error";
    }
    return "?";
}

Decision decide(const AccessTensor& t, const SubjectId& subject, std::string_view function,
                const ObjectTuple& objects, const Invocation& inv, const PredicateRegistry& programs) {
    Decision d;
    d.entry = t.lookup(subject, function, objects);
    switch (d.entry.value()) {
    case TensorEntry::Value::NotApplicable:
        d.outcome = Outcome::NotApplicable;
        d.reason = DecisionReason::ArityMismatch;
        return d;
    case TensorEntry::Value::False: {
        const bool stored = t.entries().contains(EntryKey{subject, std::string(function), objects});
        d.outcome = Outcome::Deny;
        d.reason = stored ? DecisionReason::StoredFalse : DecisionReason::NoEntry;
        return d;
    }
    case TensorEntry::Value::True:
        d.outcome = Outcome::Allow;
        d.reason = DecisionReason::StoredTrue;
        return d;
    case TensorEntry::Value::TrueWith:
        try {
            const bool ok = match_predicate(*d.entry.predicate(), inv, programs);
            d.outcome = ok ? Outcome::Allow : Outcome::Deny;
            d.reason = ok ? DecisionReason::PredicateMatched : DecisionReason::PredicateFailed;
        } catch (const Error& e) {
            d.outcome = Outcome::Deny;
            d.reason = DecisionReason::PredicateError;
            d.detail = e.what();
        }
        return d;
    }
    return d;
}

}  // namespace fbac
