#include "fbac/projections.hpp"
#include "fbac/text.hpp"

#include <algorithm>

namespace fbac {

namespace {

std::size_t checked_tuple_count(std::size_t objects, std::size_t length, const ProjectionLimits& limits) {
    std::size_t count = 1;
    for (std::size_t i = 0; i < length; ++i) {
        if (objects != 0 && count > limits.max_tuples / objects)
            throw Error(ErrorCode::EnumerationTooLarge, "|O|^" + std::to_string(length) + " exceeds the enumeration cap of " +
                                                            std::to_string(limits.max_tuples));
        count *= objects;
    }
    if (count > limits.max_tuples)
        throw Error(ErrorCode::EnumerationTooLarge, "tuple enumeration exceeds " + std::to_string(limits.max_tuples));
    return count;
}

std::size_t max_arity(const AccessTensor& t) {
    std::size_t m = 0;
    for (const auto& [_, sig] : t.functions()) m = std::max(m, sig.arity);
    return m;
}

// Tuples of lengths 0..max_len, shortest first; the whole set obeys the cap.
std::vector<ObjectTuple> enumerate_up_to(const AccessTensor& t, std::size_t max_len, const ProjectionLimits& limits) {
    std::size_t total = 0;
    for (std::size_t len = 0; len <= max_len; ++len) {
        total += checked_tuple_count(t.objects().size(), len, limits);
        if (total > limits.max_tuples)
            throw Error(ErrorCode::EnumerationTooLarge, "tuple enumeration exceeds " + std::to_string(limits.max_tuples));
    }
    std::vector<ObjectTuple> out;
    out.reserve(total);
    for (std::size_t len = 0; len <= max_len; ++len) {
        auto layer = enumerate_tuples(t, len, limits);
        out.insert(out.end(), std::make_move_iterator(layer.begin()), std::make_move_iterator(layer.end()));
    }
    return out;
}

void require_objects(const AccessTensor& t, const ObjectTuple& o) {
    for (const auto& ref : o)
        if (!t.has_object(ref)) throw Error(ErrorCode::UnknownObject, "object '" + ref.uri + "'");
}

void require_subject(const AccessTensor& t, const SubjectId& s) {
    if (!t.has_subject(s)) throw Error(ErrorCode::UnknownSubject, "subject '" + s.name + "'");
}

template <typename Map, typename Key>
const TensorEntry* find_cell(const Map& cells, const Key& key) {
    auto it = cells.find(key);
    return it == cells.end() ? nullptr : &it->second;
}

nlohmann::json tuple_json(const ObjectTuple& o) {
    auto arr = nlohmann::json::array();
    for (const auto& ref : o) arr.push_back(ref.uri);
    return arr;
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (width.size() <= c) width.push_back(0);
            width[c] = std::max(width[c], row[c].size());
        }
    std::string out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::string line;
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            if (c) line += " | ";
            line += rows[r][c];
            if (c + 1 < rows[r].size()) line.append(width[c] - rows[r][c].size(), ' ');
        }
        out += line + "\n";
        if (r == 0) {
            std::string rule;
            for (std::size_t c = 0; c < width.size(); ++c) {
                if (c) rule += "-+-";
                rule.append(width[c], '-');
            }
            out += rule + "\n";
        }
    }
    return out;
}

std::string cell_text(const TensorEntry* e) { return e ? to_string(*e) : ""; }

}  // namespace

const TensorEntry* AuthorizationMatrix::cell(const SubjectId& s, const std::string& f) const {
    return find_cell(cells, std::make_pair(s, f));
}
const TensorEntry* CapabilityMatrix::cell(const std::string& f, const ObjectTuple& o) const {
    return find_cell(cells, std::make_pair(f, o));
}
const TensorEntry* PerFunctionACM::cell(const SubjectId& s, const ObjectTuple& o) const {
    return find_cell(cells, std::make_pair(s, o));
}

std::vector<ObjectTuple> enumerate_tuples(const AccessTensor& t, std::size_t length, const ProjectionLimits& limits) {
    const auto count = checked_tuple_count(t.objects().size(), length, limits);
    const std::vector<ObjectRef> objects(t.objects().begin(), t.objects().end());
    std::vector<ObjectTuple> out;
    out.reserve(count);
    if (length > 0 && objects.empty()) return out;
    std::vector<std::size_t> idx(length, 0);
    for (;;) {
        ObjectTuple tuple;
        tuple.reserve(length);
        for (auto i : idx) tuple.push_back(objects[i]);
        out.push_back(std::move(tuple));
        std::size_t pos = length;
        while (pos > 0) {
            --pos;
            if (++idx[pos] < objects.size()) break;
            idx[pos] = 0;
            if (pos == 0) return out;
        }
        if (length == 0) return out;
    }
}

AuthorizationMatrix authorization_matrix(const AccessTensor& t, const ObjectTuple& object, bool compress) {
    require_objects(t, object);
    AuthorizationMatrix m;
    m.object = object;
    m.compressed = compress;
    m.rows.assign(t.subjects().begin(), t.subjects().end());
    for (const auto& [name, sig] : t.functions())
        if (!compress || sig.arity == object.size()) m.cols.push_back(name);
    for (const auto& s : m.rows)
        for (const auto& f : m.cols) m.cells.emplace(std::make_pair(s, f), t.lookup(s, f, object));
    return m;
}

CapabilityMatrix capability_matrix(const AccessTensor& t, const SubjectId& subject, bool compress,
                                   const ProjectionLimits& limits) {
    require_subject(t, subject);
    CapabilityMatrix m;
    m.subject = subject;
    m.compressed = compress;
    for (const auto& [name, _] : t.functions()) m.rows.push_back(name);
    if (compress) {
        std::set<std::size_t> arities;
        for (const auto& [_, sig] : t.functions()) arities.insert(sig.arity);
        std::size_t total = 0;
        for (auto a : arities) total += checked_tuple_count(t.objects().size(), a, limits);
        if (total > limits.max_tuples)
            throw Error(ErrorCode::EnumerationTooLarge, "tuple enumeration exceeds " + std::to_string(limits.max_tuples));
        for (auto a : arities) {
            auto layer = enumerate_tuples(t, a, limits);
            m.cols.insert(m.cols.end(), layer.begin(), layer.end());
        }
    } else {
        m.cols = enumerate_up_to(t, max_arity(t), limits);
    }
    for (const auto& f : m.rows)
        for (const auto& o : m.cols) {
            auto e = t.lookup(subject, f, o);
            if (compress && e.value() == TensorEntry::Value::NotApplicable) continue;
            m.cells.emplace(std::make_pair(f, o), std::move(e));
        }
    return m;
}

PerFunctionACM per_function_acm(const AccessTensor& t, std::string_view function, bool compress,
                                const ProjectionLimits& limits) {
    PerFunctionACM m;
    m.function = t.function(function);
    m.compressed = compress;
    m.rows.assign(t.subjects().begin(), t.subjects().end());
    m.cols = compress ? enumerate_tuples(t, m.function.arity, limits) : enumerate_up_to(t, max_arity(t), limits);
    for (const auto& s : m.rows)
        for (const auto& o : m.cols) m.cells.emplace(std::make_pair(s, o), t.lookup(s, m.function.name, o));
    return m;
}

FunctionList function_list(const AccessTensor& t, const SubjectId& subject, const ObjectTuple& object) {
    std::set<std::string> all;
    for (const auto& [name, _] : t.functions()) all.insert(name);
    return application_restricted_function_list(t, all, subject, object);
}

FunctionList application_restricted_function_list(const AccessTensor& t, const std::set<std::string>& app,
                                                  const SubjectId& subject, const ObjectTuple& object) {
    require_subject(t, subject);
    require_objects(t, object);
    FunctionList l{subject, object, {}};
    for (const auto& f : app) {
        auto e = t.lookup(subject, f, object);
        if (e.value() != TensorEntry::Value::NotApplicable) l.entries.emplace(f, std::move(e));
    }
    return l;
}

SubjectList subject_list(const AccessTensor& t, std::string_view function, const ObjectTuple& object,
                         const std::optional<std::set<SubjectId>>& restriction) {
    const auto& sig = t.function(function);
    require_objects(t, object);
    if (sig.arity != object.size())
        throw Error(ErrorCode::MeaninglessPair, "(" + sig.name + ", " + format_tuple(object) + ") is not an arity-correct pair");
    SubjectList l{sig.name, object, restriction, {}};
    if (restriction)
        for (const auto& s : *restriction) require_subject(t, s);
    for (const auto& s : t.subjects()) {
        if (restriction && !restriction->contains(s)) continue;
        l.entries.emplace(s, t.lookup(s, sig.name, object));
    }
    return l;
}

ObjectList object_list(const AccessTensor& t, const SubjectId& subject, std::string_view function,
                       const std::optional<std::set<ObjectTuple>>& restriction, const ProjectionLimits& limits) {
    require_subject(t, subject);
    const auto& sig = t.function(function);
    ObjectList l{subject, sig.name, restriction, {}};
    if (restriction) {
        for (const auto& o : *restriction) {
            require_objects(t, o);
            if (o.size() == sig.arity) l.entries.emplace(o, t.lookup(subject, sig.name, o));
        }
    } else {
        for (auto& o : enumerate_tuples(t, sig.arity, limits)) {
            auto e = t.lookup(subject, sig.name, o);
            l.entries.emplace(std::move(o), std::move(e));
        }
    }
    return l;
}

std::set<ObjectTuple> tuples_under_prefix(const AccessTensor& t, std::size_t arity, std::string_view prefix,
                                          const ProjectionLimits& limits) {
    AccessTensor scratch;
    for (const auto& o : t.objects())
        if (o.uri.compare(0, prefix.size(), prefix) == 0) scratch.create_object(o);
    std::set<ObjectTuple> out;
    for (auto& tuple : enumerate_tuples(scratch, arity, limits)) out.insert(std::move(tuple));
    return out;
}

// ── Reports ─────────────────────────────────────────────────────────────────

nlohmann::json to_json(const AuthorizationMatrix& m) {
    nlohmann::json j{{"kind", "authz"}, {"object", tuple_json(m.object)}, {"compressed", m.compressed}};
    j["rows"] = nlohmann::json::array();
    for (const auto& s : m.rows) j["rows"].push_back(s.name);
    j["cols"] = m.cols;
    j["cells"] = nlohmann::json::array();
    for (const auto& [key, e] : m.cells)
        j["cells"].push_back({{"subject", key.first.name}, {"function", key.second}, {"entry", to_string(e)}});
    return j;
}

nlohmann::json to_json(const CapabilityMatrix& m) {
    nlohmann::json j{{"kind", "cap"}, {"subject", m.subject.name}, {"compressed", m.compressed}};
    j["rows"] = m.rows;
    j["cols"] = nlohmann::json::array();
    for (const auto& o : m.cols) j["cols"].push_back(tuple_json(o));
    j["cells"] = nlohmann::json::array();
    for (const auto& [key, e] : m.cells)
        j["cells"].push_back({{"function", key.first}, {"object", tuple_json(key.second)}, {"entry", to_string(e)}});
    return j;
}

nlohmann::json to_json(const PerFunctionACM& m) {
    nlohmann::json j{{"kind", "acm"}, {"function", m.function.name}, {"arity", m.function.arity}, {"compressed", m.compressed}};
    j["rows"] = nlohmann::json::array();
    for (const auto& s : m.rows) j["rows"].push_back(s.name);
    j["cols"] = nlohmann::json::array();
    for (const auto& o : m.cols) j["cols"].push_back(tuple_json(o));
    j["cells"] = nlohmann::json::array();
    for (const auto& [key, e] : m.cells)
        j["cells"].push_back({{"subject", key.first.name}, {"object", tuple_json(key.second)}, {"entry", to_string(e)}});
    return j;
}

nlohmann::json to_json(const FunctionList& l) {
    nlohmann::json j{{"kind", "flist"}, {"subject", l.subject.name}, {"object", tuple_json(l.object)}};
    j["entries"] = nlohmann::json::array();
    for (const auto& [f, e] : l.entries) j["entries"].push_back({{"function", f}, {"entry", to_string(e)}});
    return j;
}

nlohmann::json to_json(const SubjectList& l) {
    nlohmann::json j{{"kind", "slist"}, {"function", l.function}, {"object", tuple_json(l.object)}};
    if (l.restriction) {
        j["restriction"] = nlohmann::json::array();
        for (const auto& s : *l.restriction) j["restriction"].push_back(s.name);
    }
    j["entries"] = nlohmann::json::array();
    for (const auto& [s, e] : l.entries) j["entries"].push_back({{"subject", s.name}, {"entry", to_string(e)}});
    return j;
}

nlohmann::json to_json(const ObjectList& l) {
    nlohmann::json j{{"kind", "olist"}, {"subject", l.subject.name}, {"function", l.function}};
    if (l.restriction) {
        j["restriction"] = nlohmann::json::array();
        for (const auto& o : *l.restriction) j["restriction"].push_back(tuple_json(o));
    }
    j["entries"] = nlohmann::json::array();
    for (const auto& [o, e] : l.entries) j["entries"].push_back({{"object", tuple_json(o)}, {"entry", to_string(e)}});
    return j;
}

std::string to_text(const AuthorizationMatrix& m) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"subject \\ function"};
    header.insert(header.end(), m.cols.begin(), m.cols.end());
    rows.push_back(header);
    for (const auto& s : m.rows) {
        std::vector<std::string> row{s.name};
        for (const auto& f : m.cols) row.push_back(cell_text(m.cell(s, f)));
        rows.push_back(std::move(row));
    }
    return "Authorization matrix for " + format_tuple(m.object) + (m.compressed ? " (compressed)" : "") + "\n" +
           render_table(rows);
}

std::string to_text(const CapabilityMatrix& m) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"function \\ objects"};
    for (const auto& o : m.cols) header.push_back(format_tuple(o));
    rows.push_back(header);
    for (const auto& f : m.rows) {
        std::vector<std::string> row{f};
        for (const auto& o : m.cols) row.push_back(cell_text(m.cell(f, o)));
        rows.push_back(std::move(row));
    }
    return "Capability matrix for " + m.subject.name + (m.compressed ? " (compressed)" : "") + "\n" + render_table(rows);
}

std::string to_text(const PerFunctionACM& m) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"subject \\ objects"};
    for (const auto& o : m.cols) header.push_back(format_tuple(o));
    rows.push_back(header);
    for (const auto& s : m.rows) {
        std::vector<std::string> row{s.name};
        for (const auto& o : m.cols) row.push_back(cell_text(m.cell(s, o)));
        rows.push_back(std::move(row));
    }
    return "Access control matrix for " + m.function.name + (m.compressed ? " (compressed)" : "") + "\n" +
           render_table(rows);
}

std::string to_text(const FunctionList& l) {
    std::vector<std::vector<std::string>> rows{{"function", "entry"}};
    for (const auto& [f, e] : l.entries) rows.push_back({f, to_string(e)});
    return "Function list for (" + l.subject.name + ", " + format_tuple(l.object) + ")\n" + render_table(rows);
}

std::string to_text(const SubjectList& l) {
    std::vector<std::vector<std::string>> rows{{"subject", "entry"}};
    for (const auto& [s, e] : l.entries) rows.push_back({s.name, to_string(e)});
    return "Subject list for (" + l.function + ", " + format_tuple(l.object) + ")\n" + render_table(rows);
}

std::string to_text(const ObjectList& l) {
    std::vector<std::vector<std::string>> rows{{"objects", "entry"}};
    for (const auto& [o, e] : l.entries) rows.push_back({format_tuple(o), to_string(e)});
    return "Object list for (" + l.subject.name + ", " + l.function + ")\n" + render_table(rows);
}

ProjectionReport run_projection(const AccessTensor& t, std::string_view kind,
                                const std::map<std::string, std::string>& params) {
    auto param = [&](const std::string& key) -> const std::string* {
        auto it = params.find(key);
        return it == params.end() ? nullptr : &it->second;
    };
    auto required = [&](const std::string& key) -> const std::string& {
        if (const auto* v = param(key)) return *v;
        throw Error(ErrorCode::InvalidOption, "missing parameter '" + key + "'");
    };
    const bool compress = !param("compress") || *param("compress") != "false";
    auto report = [](const auto& p) { return ProjectionReport{to_json(p), to_text(p)}; };

    if (kind == "authz") return report(authorization_matrix(t, parse_tuple(required("object")), compress));
    if (kind == "cap") return report(capability_matrix(t, SubjectId{required("subject")}, compress));
    if (kind == "acm") return report(per_function_acm(t, required("function"), compress));
    if (kind == "flist") {
        const SubjectId s{required("subject")};
        const auto o = parse_tuple(required("object"));
        if (const auto* app = param("app")) {
            std::set<std::string> fs;
            for (const auto& x : text::split(*app, ','))
                if (!x.empty()) fs.insert(x);
            return report(application_restricted_function_list(t, fs, s, o));
        }
        return report(function_list(t, s, o));
    }
    if (kind == "slist") return report(subject_list(t, required("function"), parse_tuple(required("object"))));
    if (kind == "olist") {
        const SubjectId s{required("subject")};
        const auto& f = required("function");
        if (const auto* prefix = param("prefix"))
            return report(object_list(t, s, f, tuples_under_prefix(t, t.function(f).arity, *prefix)));
        return report(object_list(t, s, f));
    }
    throw Error(ErrorCode::InvalidOption, "unknown projection kind '" + std::string(kind) + "'");
}

}  // namespace fbac
