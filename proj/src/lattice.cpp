#include "fbac/lattice.hpp"

#include "fbac/text.hpp"

#include <algorithm>
#include <charconv>

namespace fbac {

std::string to_string(const SecurityClass& c) {
    std::string out = "(" + std::to_string(c.level) + ",{";
    bool first = true;
    for (const auto& x : c.compartments) {
        if (!first) out += ",";
        out += x;
        first = false;
    }
    return out + "})";
}

void ClassLattice::add_level(unsigned rank, std::string name) {
    for (const auto& [r, n] : levels_)
        if (n == name && r != rank) throw Error(ErrorCode::DuplicateIdentifier, "level name '" + name + "' already used");
    if (levels_.contains(rank) && levels_.at(rank) != name)
        throw Error(ErrorCode::DuplicateIdentifier, "rank " + std::to_string(rank) + " already named " + levels_.at(rank));
    levels_[rank] = std::move(name);
}

void ClassLattice::add_compartment(std::string token) {
    if (!is_identifier(token)) throw Error(ErrorCode::InvalidIdentifier, "bad compartment '" + token + "'");
    compartments_.insert(std::move(token));
}

unsigned ClassLattice::rank_of(std::string_view name_or_rank) const {
    for (const auto& [r, n] : levels_)
        if (n == name_or_rank) return r;
    unsigned rank = 0;
    auto [ptr, ec] = std::from_chars(name_or_rank.data(), name_or_rank.data() + name_or_rank.size(), rank);
    if (ec == std::errc{} && ptr == name_or_rank.data() + name_or_rank.size() && levels_.contains(rank)) return rank;
    throw Error(ErrorCode::ForeignClass, "unknown level '" + std::string(name_or_rank) + "'");
}

void ClassLattice::require_member(const SecurityClass& c) const {
    if (!levels_.contains(c.level)) throw Error(ErrorCode::ForeignClass, "rank " + std::to_string(c.level) + " not in lattice");
    for (const auto& x : c.compartments)
        if (!compartments_.contains(x)) throw Error(ErrorCode::ForeignClass, "compartment '" + x + "' not in lattice");
}

bool ClassLattice::leq(const SecurityClass& a, const SecurityClass& b) const {
    require_member(a);
    require_member(b);
    return a.level <= b.level && std::includes(b.compartments.begin(), b.compartments.end(), a.compartments.begin(),
                                               a.compartments.end());
}

SecurityClass ClassLattice::join(const SecurityClass& a, const SecurityClass& b) const {
    require_member(a);
    require_member(b);
    SecurityClass c{std::max(a.level, b.level), a.compartments};
    c.compartments.insert(b.compartments.begin(), b.compartments.end());
    return c;
}

SecurityClass ClassLattice::meet(const SecurityClass& a, const SecurityClass& b) const {
    require_member(a);
    require_member(b);
    SecurityClass c{std::min(a.level, b.level), {}};
    std::set_intersection(a.compartments.begin(), a.compartments.end(), b.compartments.begin(), b.compartments.end(),
                          std::inserter(c.compartments, c.compartments.end()));
    return c;
}

std::vector<SecurityClass> ClassLattice::all_classes() const {
    const std::vector<std::string> comps(compartments_.begin(), compartments_.end());
    if (comps.size() > 20) throw Error(ErrorCode::EnumerationTooLarge, "too many compartments to enumerate");
    std::vector<SecurityClass> out;
    for (const auto& [rank, _] : levels_)
        for (std::size_t mask = 0; mask < (std::size_t{1} << comps.size()); ++mask) {
            SecurityClass c{rank, {}};
            for (std::size_t i = 0; i < comps.size(); ++i)
                if (mask & (std::size_t{1} << i)) c.compartments.insert(comps[i]);
            out.push_back(std::move(c));
        }
    std::sort(out.begin(), out.end());
    return out;
}

bool flow_allowed(const ClassAssignment& a, const SubjectId& s, const FunctionSig& f, const ObjectTuple& o) {
    auto pair = a.pair_class.find({f.name, o});
    if (pair == a.pair_class.end())
        throw Error(ErrorCode::UnassignedPair, "no class for (" + f.name + ", " + format_tuple(o) + ")");
    auto subj = a.subject_class.find(s);
    if (subj == a.subject_class.end()) throw Error(ErrorCode::UnassignedSubject, "no class for subject " + s.name);
    return a.lattice.leq(pair->second, subj->second);
}

bool biba_write_allowed(const ClassAssignment& a, const SubjectId& s, const ObjectTuple& o) {
    auto subj = a.subject_class.find(s);
    if (subj == a.subject_class.end()) throw Error(ErrorCode::UnassignedSubject, "no class for subject " + s.name);
    auto obj = a.object_class.find(o);
    if (obj == a.object_class.end()) throw Error(ErrorCode::UnassignedObject, "no class for object " + format_tuple(o));
    return a.lattice.leq(obj->second, subj->second);
}

void validate_assignment(const ClassAssignment& a, const AccessTensor& t) {
    for (const auto& [s, c] : a.subject_class) {
        if (!t.has_subject(s)) throw Error(ErrorCode::UnknownSubject, s.name);
        a.lattice.require_member(c);
    }
    for (const auto& [key, c] : a.pair_class) {
        const auto& sig = t.function(key.first);
        for (const auto& o : key.second)
            if (!t.has_object(o)) throw Error(ErrorCode::UnknownObject, o.uri);
        if (key.second.size() != sig.arity)
            throw Error(ErrorCode::ArityMismatch, key.first + " takes " + std::to_string(sig.arity) + " object(s), got " +
                                                      format_tuple(key.second));
        a.lattice.require_member(c);
    }
    for (const auto& [o, c] : a.object_class) {
        for (const auto& r : o)
            if (!t.has_object(r)) throw Error(ErrorCode::UnknownObject, r.uri);
        a.lattice.require_member(c);
    }
}

AccessTensor compile_to_tensor(const ClassAssignment& a, const AccessTensor& base) {
    validate_assignment(a, base);
    AccessTensor out = base;
    for (const auto& [s, sc] : a.subject_class)
        for (const auto& [key, pc] : a.pair_class)
            out.enter_entry(s, key.first, key.second,
                            a.lattice.leq(pc, sc) ? TensorEntry::true_entry() : TensorEntry::false_entry());
    return out;
}

namespace {

[[noreturn]] void fail(ErrorCode code, std::string_view source, std::size_t line, const std::string& what) {
    throw Error(code, std::string(source) + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> tokens_of(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\r')) ++pos;
        if (pos >= line.size() || line[pos] == '#') break;
        const auto start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\r') ++pos;
        out.push_back(line.substr(start, pos - start));
    }
    return out;
}

}  // namespace

ClassAssignment parse_lattice_policy(std::string_view policy_text, std::string_view source) {
    ClassAssignment a;
    std::string normalized(policy_text);
    std::replace(normalized.begin(), normalized.end(), '\t', ' ');
    const auto lines = text::split(normalized, '\n');

    // Declarations first so classes may reference levels declared later in the file.
    for (int pass = 0; pass < 2; ++pass) {
        std::size_t number = 0;
        for (const auto& raw : lines) {
            ++number;
            const auto tokens = tokens_of(raw);
            if (tokens.empty()) continue;
            const auto kw = tokens[0];
            const bool decl = kw == "LEVEL" || kw == "COMPARTMENT" || kw == "MODE";
            if ((pass == 0) != decl) {
                if (pass == 0 && kw != "SUBJECTCLASS" && kw != "PAIRCLASS" && kw != "OBJECTCLASS")
                    fail(ErrorCode::PolicySyntax, source, number, "unknown keyword '" + std::string(kw) + "'");
                continue;
            }
            try {
                auto klass = [&](std::size_t from) {
                    SecurityClass c{a.lattice.rank_of(tokens[from]), {}};
                    for (std::size_t i = from + 1; i < tokens.size(); ++i) c.compartments.insert(std::string(tokens[i]));
                    a.lattice.require_member(c);
                    return c;
                };
                if (kw == "LEVEL") {
                    if (tokens.size() != 3) fail(ErrorCode::PolicySyntax, source, number, "LEVEL <rank> <name>");
                    unsigned rank = 0;
                    auto [ptr, ec] = std::from_chars(tokens[1].data(), tokens[1].data() + tokens[1].size(), rank);
                    if (ec != std::errc{} || ptr != tokens[1].data() + tokens[1].size())
                        fail(ErrorCode::PolicySyntax, source, number, "bad rank '" + std::string(tokens[1]) + "'");
                    a.lattice.add_level(rank, std::string(tokens[2]));
                } else if (kw == "COMPARTMENT") {
                    if (tokens.size() != 2) fail(ErrorCode::PolicySyntax, source, number, "COMPARTMENT <token>");
                    a.lattice.add_compartment(std::string(tokens[1]));
                } else if (kw == "MODE") {
                    if (tokens.size() != 2) fail(ErrorCode::PolicySyntax, source, number, "MODE <mode>");
                    if (tokens[1] == "confidentiality") a.mode = LatticeMode::Confidentiality;
                    else if (tokens[1] == "integrity") a.mode = LatticeMode::Integrity;
                    else fail(ErrorCode::PolicySyntax, source, number, "unknown mode '" + std::string(tokens[1]) + "'");
                } else if (kw == "SUBJECTCLASS") {
                    if (tokens.size() < 3) fail(ErrorCode::PolicySyntax, source, number, "SUBJECTCLASS <subject> <level> ...");
                    if (!is_identifier(tokens[1])) fail(ErrorCode::InvalidIdentifier, source, number, std::string(tokens[1]));
                    a.subject_class[SubjectId{std::string(tokens[1])}] = klass(2);
                } else if (kw == "PAIRCLASS") {
                    if (tokens.size() < 4)
                        fail(ErrorCode::PolicySyntax, source, number, "PAIRCLASS <function> <objects> <level> ...");
                    if (!is_function_name(tokens[1])) fail(ErrorCode::InvalidIdentifier, source, number, std::string(tokens[1]));
                    a.pair_class[{std::string(tokens[1]), parse_tuple(tokens[2])}] = klass(3);
                } else {
                    if (tokens.size() < 3) fail(ErrorCode::PolicySyntax, source, number, "OBJECTCLASS <objects> <level> ...");
                    a.object_class[parse_tuple(tokens[1])] = klass(2);
                }
            } catch (const Error& e) {
                const std::string msg = e.what();
                if (msg.rfind(std::string(source) + ":", 0) == 0) throw;
                const auto colon = msg.find(": ");
                fail(e.code(), source, number, colon == std::string::npos ? msg : msg.substr(colon + 2));
            }
        }
    }
    return a;
}

}  // namespace fbac
