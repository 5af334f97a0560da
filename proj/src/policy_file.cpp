#include "fbac/policy_file.hpp"

#include "fbac/text.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace fbac {

namespace {

struct Token {
    std::string_view value;
    std::size_t offset;
};

struct Line {
    std::size_t number;
    std::string_view raw;
    std::vector<Token> tokens;
};

// Splits on blanks, stopping at a token that starts with '#'.
std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
        if (pos >= line.size() || line[pos] == '#') break;
        const auto start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r') ++pos;
        out.push_back({line.substr(start, pos - start), start});
    }
    return out;
}

[[noreturn]] void fail(ErrorCode code, std::string_view source, std::size_t line, const std::string& what) {
    throw Error(code, std::string(source) + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

void load_policy(AccessTensor& t, std::string_view policy_text, std::string_view source) {
    const auto lines = text::split(policy_text, '\n');
    std::vector<Line> entries;
    AccessTensor staged = t;

    std::size_t number = 0;
    for (const auto& raw_line : lines) {
        ++number;
        const std::string_view raw = raw_line;
        auto tokens = tokenize(raw);
        if (tokens.empty()) continue;
        const auto keyword = tokens[0].value;

        auto expect = [&](std::size_t n) {
            if (tokens.size() != n)
                fail(ErrorCode::PolicySyntax, source, number,
                     std::string(keyword) + " expects " + std::to_string(n - 1) + " argument(s)");
        };
        auto ident = [&](std::string_view v) {
            if (!is_identifier(v)) fail(ErrorCode::InvalidIdentifier, source, number, "bad identifier '" + std::string(v) + "'");
            return std::string(v);
        };

        if (keyword == "SUBJECT") {
            expect(2);
            SubjectId s{ident(tokens[1].value)};
            if (!staged.has_subject(s)) staged.create_subject(s);
        } else if (keyword == "OBJECT") {
            expect(2);
            ObjectRef o{ident(tokens[1].value)};
            if (!staged.has_object(o)) staged.create_object(o);
        } else if (keyword == "FUNCTION") {
            expect(3);
            const auto name = tokens[1].value;
            if (!is_function_name(name))
                fail(ErrorCode::InvalidIdentifier, source, number, "bad function name '" + std::string(name) + "'");
            std::size_t arity = 0;
            const auto a = tokens[2].value;
            auto [ptr, ec] = std::from_chars(a.data(), a.data() + a.size(), arity);
            if (ec != std::errc() || ptr != a.data() + a.size())
                fail(ErrorCode::PolicySyntax, source, number, "bad arity '" + std::string(a) + "'");
            if (staged.has_function(name)) {
                if (staged.function(name).arity != arity)
                    fail(ErrorCode::DuplicateIdentifier, source, number,
                         "function '" + std::string(name) + "' redeclared with a different arity");
            } else {
                staged.create_function(FunctionSig{std::string(name), arity});
            }
        } else if (keyword == "ENTRY") {
            if (tokens.size() < 5) fail(ErrorCode::PolicySyntax, source, number, "ENTRY expects 4 arguments");
            entries.push_back({number, raw, std::move(tokens)});
        } else {
            fail(ErrorCode::PolicySyntax, source, number, "unknown keyword '" + std::string(keyword) + "'");
        }
    }

    for (const auto& line : entries) {
        const auto& tk = line.tokens;
        const auto value_start = tk[4].offset;
        auto value = line.raw.substr(value_start);
        const bool is_pattern = text::starts_with(value, "TRUE_RE:");
        if (is_pattern) {
            while (!value.empty() && (value.back() == ' ' || value.back() == '\t' || value.back() == '\r'))
                value.remove_suffix(1);
        } else {
            if (tk.size() != 5) fail(ErrorCode::PolicySyntax, source, line.number, "trailing tokens after entry value");
            value = tk[4].value;
        }
        SubjectId subject{std::string(tk[1].value)};
        const auto function = tk[2].value;
        if (!staged.has_subject(subject))
            fail(ErrorCode::UnknownSubject, source, line.number, "undeclared subject '" + subject.name + "'");
        if (!staged.has_function(function))
            fail(ErrorCode::UnknownFunction, source, line.number, "undeclared function '" + std::string(function) + "'");
        try {
            const auto objects = parse_tuple(tk[3].value);
            for (const auto& o : objects)
                if (!staged.has_object(o)) throw Error(ErrorCode::UnknownObject, "undeclared object '" + o.uri + "'");
            staged.enter_entry(subject, function, objects, parse_entry(value));
        } catch (const Error& e) {
            fail(e.code(), source, line.number, e.what());
        }
    }
    t = std::move(staged);
}

AccessTensor parse_policy(std::string_view policy_text, std::string_view source) {
    AccessTensor t;
    load_policy(t, policy_text, source);
    return t;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::UnknownIdentifier, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

AccessTensor load_policy_file(const std::filesystem::path& path) {
    return parse_policy(read_file(path), path.string());
}

void load_policy_file(AccessTensor& t, const std::filesystem::path& path) {
    load_policy(t, read_file(path), path.string());
}

std::string serialize_policy(const AccessTensor& t) {
    std::string out;
    for (const auto& s : t.subjects()) out += "SUBJECT " + s.name + "\n";
    for (const auto& [name, sig] : t.functions()) out += "FUNCTION " + name + " " + std::to_string(sig.arity) + "\n";
    for (const auto& o : t.objects()) out += "OBJECT " + o.uri + "\n";
    for (const auto& [key, entry] : t.entries())
        out += "ENTRY " + key.subject.name + " " + key.function + " " + format_tuple(key.objects) + " " +
               to_string(entry) + "\n";
    return out;
}

}  // namespace fbac
