#include "fbac/adoc.hpp"

#include "fbac/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>

namespace fbac {

std::string_view to_string(AtomKind k) { return k == AtomKind::Text ? "text" : "image-ref"; }
std::string_view to_string(Cascade c) { return c == Cascade::UnavailableOnRemove ? "unavailable-on-remove" : "none"; }

const Atom* AtomicDocument::find(std::string_view atom_id) const {
    for (const auto& a : atoms)
        if (a.id == atom_id) return &a;
    return nullptr;
}

Atom* AtomicDocument::find(std::string_view atom_id) {
    for (auto& a : atoms)
        if (a.id == atom_id) return &a;
    return nullptr;
}

const Atom& AtomicDocument::at(std::string_view atom_id) const {
    if (const auto* a = find(atom_id)) return *a;
    throw Error(ErrorCode::UnknownAtom, "no atom '" + std::string(atom_id) + "' in " + id);
}

ObjectRef atom_object(std::string_view doc_id, std::string_view atom_id) {
    return ObjectRef{std::string(doc_id) + "/" + std::string(atom_id)};
}

namespace {

// ── Tiny XML-ish reader ─────────────────────────────────────────────────────

struct Node {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<Node> children;
    std::string text;
    std::size_t line = 1, column = 1;
    std::size_t text_line = 0;  // line where character data starts
};

class Reader {
public:
    explicit Reader(std::string_view in) : in_(in) {}

    Node document() {
        skip_misc();
        if (!peek_is("<")) fail("expected root element");
        Node root = element();
        skip_misc();
        if (pos_ != in_.size()) fail("content after root element");
        return root;
    }

    [[noreturn]] void fail(const std::string& what) const { fail_at(line_, col_, what); }

    [[noreturn]] static void fail_at(std::size_t line, std::size_t col, const std::string& what) {
        throw Error(ErrorCode::MalformedDocument,
                    "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
    }

private:
    bool peek_is(std::string_view s) const { return in_.substr(pos_, s.size()) == s; }

    void advance(std::size_t n = 1) {
        for (std::size_t i = 0; i < n && pos_ < in_.size(); ++i, ++pos_) {
            if (in_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else if ((static_cast<unsigned char>(in_[pos_]) & 0xC0) != 0x80) {
                ++col_;
            }
        }
    }

    void skip_space() {
        while (pos_ < in_.size() && (in_[pos_] == ' ' || in_[pos_] == '\t' || in_[pos_] == '\n' || in_[pos_] == '\r'))
            advance();
    }

    void skip_until(std::string_view end) {
        auto at = in_.find(end, pos_);
        if (at == std::string_view::npos) fail("unterminated construct, expected '" + std::string(end) + "'");
        advance(at + end.size() - pos_);
    }

    void skip_misc() {
        for (;;) {
            skip_space();
            if (peek_is("<?")) skip_until("?>");
            else if (peek_is("<!--")) skip_until("-->");
            else return;
        }
    }

    std::string name() {
        const auto start = pos_;
        while (pos_ < in_.size() && (std::isalnum(static_cast<unsigned char>(in_[pos_])) || in_[pos_] == '-' ||
                                     in_[pos_] == '_' || in_[pos_] == ':'))
            advance();
        if (start == pos_) fail("expected a name");
        return std::string(in_.substr(start, pos_ - start));
    }

    void entity(std::string& out) {
        const auto semi = in_.find(';', pos_);
        if (semi == std::string_view::npos || semi - pos_ > 10) fail("bad entity reference");
        const auto ent = in_.substr(pos_ + 1, semi - pos_ - 1);
        if (ent == "amp") out += '&';
        else if (ent == "lt") out += '<';
        else if (ent == "gt") out += '>';
        else if (ent == "quot") out += '"';
        else if (ent == "apos") out += '\'';
        else if (!ent.empty() && ent[0] == '#') {
            unsigned cp = 0;
            const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
            const auto digits = ent.substr(hex ? 2 : 1);
            auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
            if (digits.empty() || ec != std::errc{} || p != digits.data() + digits.size() || cp > 0x10FFFF ||
                (cp >= 0xD800 && cp <= 0xDFFF))
                fail("bad character reference");
            if (cp < 0x80) {
                out += static_cast<char>(cp);
            } else if (cp < 0x800) {
                out += static_cast<char>(0xC0 | (cp >> 6));
                out += static_cast<char>(0x80 | (cp & 0x3F));
            } else if (cp < 0x10000) {
                out += static_cast<char>(0xE0 | (cp >> 12));
                out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
                out += static_cast<char>(0x80 | (cp & 0x3F));
            } else {
                out += static_cast<char>(0xF0 | (cp >> 18));
                out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
                out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
                out += static_cast<char>(0x80 | (cp & 0x3F));
            }
        } else {
            fail("unknown entity '&" + std::string(ent) + ";'");
        }
        advance(semi + 1 - pos_);
    }

    Node element() {
        Node n;
        n.line = line_;
        n.column = col_;
        advance();  // '<'
        n.name = name();
        for (;;) {
            skip_space();
            if (peek_is("/>")) {
                advance(2);
                return n;
            }
            if (peek_is(">")) {
                advance();
                break;
            }
            if (pos_ >= in_.size()) fail("unterminated start tag <" + n.name + ">");
            const auto attr_line = line_, attr_col = col_;
            auto key = name();
            skip_space();
            if (!peek_is("=")) fail("expected '=' after attribute " + key);
            advance();
            skip_space();
            if (pos_ >= in_.size() || (in_[pos_] != '"' && in_[pos_] != '\'')) fail("expected quoted attribute value");
            const char quote = in_[pos_];
            advance();
            std::string value;
            while (pos_ < in_.size() && in_[pos_] != quote) {
                if (in_[pos_] == '<') fail("'<' in attribute value");
                if (in_[pos_] == '&') {
                    entity(value);
                } else {
                    value += in_[pos_];
                    advance();
                }
            }
            if (pos_ >= in_.size()) fail("unterminated attribute value");
            advance();
            for (const auto& [k, v] : n.attrs)
                if (k == key) fail_at(attr_line, attr_col, "duplicate attribute " + key);
            n.attrs.emplace_back(std::move(key), std::move(value));
        }
        n.text_line = line_;
        for (;;) {
            if (pos_ >= in_.size()) fail("unterminated element <" + n.name + ">");
            if (peek_is("</")) {
                advance(2);
                const auto close = name();
                if (close != n.name) fail("mismatched </" + close + ">, expected </" + n.name + ">");
                skip_space();
                if (!peek_is(">")) fail("expected '>'");
                advance();
                return n;
            }
            if (peek_is("<![CDATA[")) {
                advance(9);
                const auto end = in_.find("]]>", pos_);
                if (end == std::string_view::npos) fail("unterminated CDATA section");
                n.text.append(in_.substr(pos_, end - pos_));
                advance(end + 3 - pos_);
            } else if (peek_is("<!--")) {
                skip_until("-->");
            } else if (peek_is("<")) {
                n.children.push_back(element());
            } else if (in_[pos_] == '&') {
                entity(n.text);
            } else {
                n.text += in_[pos_];
                advance();
            }
        }
    }

    std::string_view in_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1, col_ = 1;
};

[[noreturn]] void malformed(const Node& n, const std::string& what) { Reader::fail_at(n.line, n.column, what); }

void only_attrs(const Node& n, std::initializer_list<std::string_view> allowed) {
    for (const auto& [k, v] : n.attrs)
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            malformed(n, "unexpected attribute '" + k + "' on <" + n.name + ">");
}

const std::string* attr(const Node& n, std::string_view key) {
    for (const auto& [k, v] : n.attrs)
        if (k == key) return &v;
    return nullptr;
}

const std::string& required(const Node& n, std::string_view key) {
    if (const auto* v = attr(n, key)) return *v;
    malformed(n, "<" + n.name + "> needs attribute '" + std::string(key) + "'");
}

void no_text(const Node& n) {
    if (!text::trim(n.text).empty()) malformed(n, "unexpected text inside <" + n.name + ">");
}

void no_children(const Node& n) {
    if (!n.children.empty()) malformed(n.children.front(), "unexpected element inside <" + n.name + ">");
}

std::set<std::string> comma_list(const Node& n, const std::string& value) {
    std::set<std::string> out;
    if (text::trim(value).empty()) return out;
    for (const auto& part : text::split(value, ',')) {
        const auto token = std::string(text::trim(part));
        if (token.empty()) malformed(n, "empty list element");
        out.insert(token);
    }
    return out;
}

SecurityClass read_class(const Node& n) {
    only_attrs(n, {"level", "compartments"});
    no_children(n);
    no_text(n);
    const auto& level = required(n, "level");
    SecurityClass c;
    auto [p, ec] = std::from_chars(level.data(), level.data() + level.size(), c.level);
    if (level.empty() || ec != std::errc{} || p != level.data() + level.size()) malformed(n, "bad level '" + level + "'");
    if (const auto* comps = attr(n, "compartments")) {
        c.compartments = comma_list(n, *comps);
        for (const auto& x : c.compartments)
            if (!is_identifier(x)) malformed(n, "bad compartment '" + x + "'");
    }
    return c;
}

void read_policy(const Node& n, Atom& atom, const std::set<std::string>& functions) {
    only_attrs(n, {});
    no_children(n);
    const auto lines = text::split(n.text, '\n');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = n.text_line + i;
        auto where = [&](const std::string& what) {
            return "line " + std::to_string(line_no) + ": " + what;
        };
        auto line = text::trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string_view> head;
        std::size_t pos = 0;
        while (head.size() < 4) {
            while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
            const auto start = pos;
            while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
            if (start == pos) break;
            head.push_back(line.substr(start, pos - start));
        }
        auto value = text::trim(line.substr(pos));
        if (head.size() < 4 || value.empty() || head[0] != "ENTRY" || head[3] != ".")
            throw Error(ErrorCode::MalformedDocument, where("expected 'ENTRY <subject> <function> . <value>'"));
        if (!text::starts_with(value, "TRUE_RE:")) {
            // anything after the value must be a comment
            const auto gap = value.find_first_of(" \t");
            if (gap != std::string_view::npos) {
                auto rest = text::trim(value.substr(gap));
                if (!rest.empty() && rest.front() != '#')
                    throw Error(ErrorCode::MalformedDocument, where("trailing text after entry value"));
                value = value.substr(0, gap);
            }
        }
        if (!is_identifier(head[1])) throw Error(ErrorCode::MalformedDocument, where("bad subject '" + std::string(head[1]) + "'"));
        const std::string function(head[2]);
        if (!functions.contains(function))
            throw Error(ErrorCode::UnknownFunctionName, where("unknown function '" + function + "' in atom " + atom.id));
        auto entry = TensorEntry::false_entry();
        try {
            entry = parse_entry(value);
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedDocument, where(e.what()));
        }
        auto& row = atom.policy[function];
        if (!row.emplace(SubjectId{std::string(head[1])}, std::move(entry)).second)
            throw Error(ErrorCode::MalformedDocument, where("duplicate entry for " + std::string(head[1]) + " " + function));
    }
}

Atom read_atom(const Node& n, const std::set<std::string>& functions) {
    only_attrs(n, {"id", "kind", "removed"});
    no_text(n);
    Atom a;
    a.id = required(n, "id");
    if (!is_identifier(a.id) || a.id.find('/') != std::string::npos) malformed(n, "bad atom id '" + a.id + "'");
    const auto& kind = required(n, "kind");
    if (kind == "text") a.kind = AtomKind::Text;
    else if (kind == "image-ref") a.kind = AtomKind::ImageRef;
    else malformed(n, "unknown atom kind '" + kind + "'");
    if (const auto* removed = attr(n, "removed")) {
        if (*removed == "true") a.removed = true;
        else if (*removed != "false") malformed(n, "removed must be true or false");
    }
    std::set<std::string> seen;
    for (const auto& c : n.children) {
        if (!seen.insert(c.name).second) malformed(c, "repeated <" + c.name + "> in atom " + a.id);
        if (c.name == "classification") {
            a.classification = read_class(c);
        } else if (c.name == "policy") {
            read_policy(c, a, functions);
        } else if (c.name == "links") {
            only_attrs(c, {});
            no_text(c);
            for (const auto& l : c.children) {
                if (l.name != "link") malformed(l, "expected <link>");
                only_attrs(l, {"target", "relation", "cascade"});
                no_children(l);
                no_text(l);
                AtomLink link{required(l, "target"), required(l, "relation"), Cascade::None};
                if (!is_identifier(link.target)) malformed(l, "bad link target '" + link.target + "'");
                if (!is_identifier(link.relation)) malformed(l, "bad relation '" + link.relation + "'");
                if (const auto* cascade = attr(l, "cascade")) {
                    if (*cascade == "unavailable-on-remove") link.cascade = Cascade::UnavailableOnRemove;
                    else if (*cascade != "none") malformed(l, "unknown cascade '" + *cascade + "'");
                }
                a.links.push_back(std::move(link));
            }
        } else if (c.name == "content") {
            only_attrs(c, {});
            no_children(c);
            a.content = c.text;
        } else {
            malformed(c, "unexpected <" + c.name + "> in atom");
        }
    }
    if (a.kind == AtomKind::ImageRef && a.content.find_first_of("\r\n") != std::string::npos)
        malformed(n, "image-ref content must be a single URI");
    return a;
}

void check_links(const AtomicDocument& d) {
    for (const auto& a : d.atoms)
        for (const auto& l : a.links) {
            if (l.target == a.id) throw Error(ErrorCode::DanglingLink, "atom " + a.id + " links to itself");
            if (l.target.find('/') != std::string::npos) continue;  // other document, checked when loaded
            if (!d.find(l.target)) throw Error(ErrorCode::DanglingLink, "atom " + a.id + " links to missing " + l.target);
        }
}

std::string escape_attr(std::string_view v) {
    std::string out;
    for (char c : v) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string cdata(std::string_view v) {
    std::string out = "<![CDATA[";
    std::size_t pos = 0;
    for (auto at = v.find("]]>"); at != std::string_view::npos; at = v.find("]]>", pos)) {
        out.append(v.substr(pos, at - pos));
        out += "]]]]><![CDATA[>";
        pos = at + 3;
    }
    out.append(v.substr(pos));
    return out + "]]>";
}

std::string class_tag(const SecurityClass& c) {
    std::string out = "<classification level=\"" + std::to_string(c.level) + "\"";
    if (!c.compartments.empty())
        out += " compartments=\"" + escape_attr(text::join({c.compartments.begin(), c.compartments.end()}, ",")) + "\"";
    return out + "/>";
}

}  // namespace

AtomicDocument parse_adoc(std::string_view bytes, const std::set<std::string>& functions) {
    if (!text::is_valid_utf8(bytes)) throw Error(ErrorCode::MalformedDocument, "line 1, column 1: input is not UTF-8");
    Reader reader(bytes);
    const Node root = reader.document();
    if (root.name != "adoc") malformed(root, "root element must be <adoc>");
    only_attrs(root, {"id", "version"});
    no_text(root);

    AtomicDocument d;
    d.id = required(root, "id");
    if (!is_identifier(d.id)) malformed(root, "bad document id '" + d.id + "'");
    const auto& version = required(root, "version");
    auto [p, ec] = std::from_chars(version.data(), version.data() + version.size(), d.version);
    if (version.empty() || ec != std::errc{} || p != version.data() + version.size())
        malformed(root, "bad version '" + version + "'");
    if (d.version != 1) throw Error(ErrorCode::UnsupportedVersion, "version " + version + " is not supported");

    bool seen_forbidden = false, seen_class = false;
    for (const auto& c : root.children) {
        if (c.name == "forbidden") {
            if (seen_forbidden) malformed(c, "repeated <forbidden>");
            seen_forbidden = true;
            only_attrs(c, {"functions"});
            no_children(c);
            no_text(c);
            d.forbidden_functions = comma_list(c, required(c, "functions"));
            for (const auto& f : d.forbidden_functions)
                if (!functions.contains(f)) throw Error(ErrorCode::UnknownFunctionName, "forbidden function '" + f + "'");
        } else if (c.name == "classification") {
            if (seen_class) malformed(c, "repeated <classification>");
            seen_class = true;
            d.classification = read_class(c);
        } else if (c.name == "atom") {
            auto atom = read_atom(c, functions);
            if (d.find(atom.id)) throw Error(ErrorCode::DuplicateAtomId, "atom id '" + atom.id + "' appears twice");
            d.atoms.push_back(std::move(atom));
        } else {
            malformed(c, "unexpected <" + c.name + ">");
        }
    }
    if (d.atoms.empty()) throw Error(ErrorCode::InvalidDocument, "a document needs at least one atom");
    check_links(d);
    return d;
}

std::string serialize_adoc(const AtomicDocument& d) {
    if (d.atoms.empty()) throw Error(ErrorCode::InvalidDocument, "a document needs at least one atom");
    std::string out = "<adoc id=\"" + escape_attr(d.id) + "\" version=\"" + std::to_string(d.version) + "\">\n";
    if (!d.forbidden_functions.empty())
        out += "  <forbidden functions=\"" +
               escape_attr(text::join({d.forbidden_functions.begin(), d.forbidden_functions.end()}, ",")) + "\"/>\n";
    if (d.classification) out += "  " + class_tag(*d.classification) + "\n";
    for (const auto& a : d.atoms) {
        out += "  <atom id=\"" + escape_attr(a.id) + "\" kind=\"" + std::string(to_string(a.kind)) + "\"";
        if (a.removed) out += " removed=\"true\"";
        out += ">\n";
        if (a.classification) out += "    " + class_tag(*a.classification) + "\n";
        if (!a.policy.empty()) {
            std::string lines = "\n";
            for (const auto& [f, row] : a.policy)
                for (const auto& [s, e] : row) {
                    if (e.value() == TensorEntry::Value::NotApplicable)
                        throw Error(ErrorCode::InvalidDocument, "atom policy cannot store N/A");
                    const auto spelling = to_string(e);
                    if (spelling.find_first_of("\r\n") != std::string::npos || text::trim(spelling) != spelling)
                        throw Error(ErrorCode::InvalidDocument, "entry for " + s.name + " " + f + " cannot be written on one line");
                    lines += "ENTRY " + s.name + " " + f + " . " + spelling + "\n";
                }
            out += "    <policy>" + cdata(lines) + "</policy>\n";
        }
        if (!a.links.empty()) {
            out += "    <links>\n";
            for (const auto& l : a.links)
                out += "      <link target=\"" + escape_attr(l.target) + "\" relation=\"" + escape_attr(l.relation) +
                       "\" cascade=\"" + std::string(to_string(l.cascade)) + "\"/>\n";
            out += "    </links>\n";
        }
        out += "    <content>" + cdata(a.content) + "</content>\n";
        out += "  </atom>\n";
    }
    return out + "</adoc>\n";
}

AtomicDocument import_plain_text(std::string_view plain, std::string doc_id) {
    if (!is_identifier(doc_id)) throw Error(ErrorCode::InvalidIdentifier, "bad document id '" + doc_id + "'");
    AtomicDocument d;
    d.id = std::move(doc_id);
    std::vector<std::string> paragraph;
    auto flush = [&] {
        if (paragraph.empty()) return;
        Atom a;
        a.id = "a" + std::to_string(d.atoms.size() + 1);
        a.content = text::join(paragraph, "\n");
        d.atoms.push_back(std::move(a));
        paragraph.clear();
    };
    for (auto& line : text::split_lines(plain)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) flush();
        else paragraph.push_back(std::move(line));
    }
    flush();
    if (d.atoms.empty()) throw Error(ErrorCode::InvalidDocument, "no paragraphs in input");
    return d;
}

// ── Consistency ─────────────────────────────────────────────────────────────

std::set<std::string> granted_functions(const Atom& atom) {
    std::set<std::string> out;
    for (const auto& [f, row] : atom.policy)
        for (const auto& [s, e] : row)
            if (e.grants()) out.insert(f);
    return out;
}

bool class_dominated(const SecurityClass& lower, const SecurityClass& upper) {
    return lower.level <= upper.level && std::includes(upper.compartments.begin(), upper.compartments.end(),
                                                       lower.compartments.begin(), lower.compartments.end());
}

bool check_atom_consistency(const Atom& atom, const AtomicDocument& d) {
    for (const auto& f : granted_functions(atom))
        if (d.forbidden_functions.contains(f)) return false;
    return true;
}

bool check_atom_consistency_classified(const Atom& atom, const AtomicDocument& d, bool strict) {
    if (!atom.classification || !d.classification)
        throw Error(ErrorCode::MissingClassification, "atom " + atom.id + " or document " + d.id + " is unclassified");
    if (!check_atom_consistency(atom, d)) return false;
    if (!class_dominated(*atom.classification, *d.classification)) return false;
    return !strict || *atom.classification != *d.classification;
}

ValidationReport validate_document(const AtomicDocument& d, bool strict_classification) {
    ValidationReport r;
    for (const auto& a : d.atoms) {
        std::vector<std::string> clash;
        for (const auto& f : granted_functions(a))
            if (d.forbidden_functions.contains(f)) clash.push_back(f);
        if (!clash.empty())
            r.violations.push_back({a.id, Condition::ForbiddenFunctionGranted, "grants forbidden " + text::join(clash, ",")});
        if (a.classification && d.classification) {
            const bool ok = class_dominated(*a.classification, *d.classification) &&
                            (!strict_classification || *a.classification != *d.classification);
            if (!ok)
                r.violations.push_back({a.id, Condition::ClassificationExceeds,
                                        to_string(*a.classification) + " not below " + to_string(*d.classification)});
        }
    }
    return r;
}

// ── Links and availability ──────────────────────────────────────────────────

std::set<std::string> link_closure(const AtomicDocument& d, std::string_view atom_id) {
    d.at(atom_id);
    // reverse cascade edges: target -> atoms depending on it
    std::map<std::string, std::vector<std::string>, std::less<>> dependents;
    for (const auto& a : d.atoms)
        for (const auto& l : a.links)
            if (l.cascade == Cascade::UnavailableOnRemove) dependents[l.target].push_back(a.id);
    std::set<std::string> seen{std::string(atom_id)};
    std::deque<std::string> queue{std::string(atom_id)};
    while (!queue.empty()) {
        auto cur = std::move(queue.front());
        queue.pop_front();
        auto it = dependents.find(cur);
        if (it == dependents.end()) continue;
        for (const auto& dep : it->second)
            if (seen.insert(dep).second) queue.push_back(dep);
    }
    return seen;
}

std::set<std::string> available_atoms(const AtomicDocument& d) {
    std::set<std::string> gone;
    for (const auto& a : d.atoms)
        if (a.removed && !gone.contains(a.id)) gone.merge(link_closure(d, a.id));
    std::set<std::string> out;
    for (const auto& a : d.atoms)
        if (!gone.contains(a.id)) out.insert(a.id);
    return out;
}

AtomicDocument remove_atom(const AtomicDocument& d, std::string_view atom_id) {
    d.at(atom_id);
    auto copy = d;
    copy.find(atom_id)->removed = true;
    return copy;
}

AtomicDocument restore_atom(const AtomicDocument& d, std::string_view atom_id) {
    d.at(atom_id);
    auto copy = d;
    copy.find(atom_id)->removed = false;
    return copy;
}

void install_document_policy(AccessTensor& t, const AtomicDocument& d) {
    auto staged = t;
    for (const auto& a : d.atoms) {
        const auto obj = atom_object(d.id, a.id);
        if (!staged.has_object(obj)) staged.create_object(obj);
        for (const auto& [f, row] : a.policy)
            for (const auto& [s, e] : row) {
                if (!staged.has_subject(s)) staged.create_subject(s);
                staged.enter_entry(s, f, {obj}, e);
            }
    }
    t = std::move(staged);
}

}  // namespace fbac
