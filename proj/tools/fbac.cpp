#include "fbac/adoc.hpp"
#include "fbac/http_api.hpp"
#include "fbac/monitor.hpp"
#include "fbac/policy_file.hpp"
#include "fbac/projections.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

using namespace fbac;
using nlohmann::json;

namespace {

constexpr int kDenied = 3;
constexpr int kFailed = 2;

// Where policies and documents come from, and who is asking.
struct Workspace {
    std::string dir;
    std::vector<std::string> policies;
    std::vector<std::string> docs;
    std::vector<std::string> lattices;
    std::string identities;
    std::string as;
    std::string outbox;
    bool json = false;

    void add_options(CLI::App& app, bool with_subject) {
        app.add_option("--dir", dir, "Policy directory (identities.txt, *.adoc, *.policy, *.lattice)")
            ->envname("FBAC_POLICY_DIR");
        app.add_option("--policy", policies, "Policy file")->check(CLI::ExistingFile);
        app.add_option("--doc", docs, ".adoc document")->check(CLI::ExistingFile);
        app.add_option("--lattice", lattices, "Lattice policy file")->check(CLI::ExistingFile);
        app.add_option("--identities", identities, "Token file: <token> <subject> <role>")->check(CLI::ExistingFile);
        app.add_option("--outbox", outbox, "JSON Lines outbox for email");
        app.add_flag("--json", json, "Print JSON responses");
        if (with_subject) app.add_option("--as", as, "Subject to act as");
    }

    bool empty() const { return dir.empty() && docs.empty() && lattices.empty(); }

    std::unique_ptr<Monitor> open() const {
        MonitorConfig cfg;
        cfg.outbox_path = outbox;
        auto m = std::make_unique<Monitor>(cfg);
        if (!dir.empty()) m->load_directory(dir);
        if (!identities.empty()) m->set_identities(IdentityStore::parse(read_file(identities), identities));
        const auto names = m->catalog()->names();
        for (const auto& d : docs) m->put_document(parse_adoc(read_file(d), names));
        for (const auto& p : policies) m->load_policy(read_file(p), p);
        for (const auto& l : lattices) m->load_lattice(read_file(l), l);
        return m;
    }
};

struct Session {
    Monitor& monitor;
    Principal who;
    bool json = false;
    int status = 0;
};

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidOption, "cannot write " + path);
    out << bytes;
}

std::string slurp(std::istream& in) { return {std::istreambuf_iterator<char>(in), {}}; }

void show_view(const json& result) {
    for (const auto& seg : result.at("segments")) {
        const auto kind = seg.at("kind").get<std::string>();
        if (kind == "content") std::cout << seg.at("content").get<std::string>() << "\n";
        else if (kind == "redacted") std::cout << kRedactedMarker << "\n";
        else std::cout << kBlurredMarker << "\n";
    }
}

void show_search(const json& r) {
    if (r.value("boolean_only", false)) {
        std::cout << (r.at("matched").get<bool>() ? "match" : "no match") << "\n";
        return;
    }
    for (const auto& h : r.at("hits")) {
        const auto atom = h.at("atom").get<std::string>();
        const auto n = h.at("line_number").get<std::size_t>();
        const auto& before = h.at("before");
        for (std::size_t i = 0; i < before.size(); ++i)
            std::cout << atom << "-" << n - before.size() + i << "- " << before[i].get<std::string>() << "\n";
        std::cout << atom << ":" << n << ": " << h.at("line").get<std::string>() << "\n";
        const auto& after = h.at("after");
        for (std::size_t i = 0; i < after.size(); ++i)
            std::cout << atom << "-" << n + 1 + i << "- " << after[i].get<std::string>() << "\n";
    }
}

// Runs one request; prints the result and records the exit status.
InvokeResponse run(Session& s, const InvokeRequest& req, const std::function<void(const json&)>& show) {
    auto r = s.monitor.invoke(s.who, req);
    if (s.json) {
        std::cout << json{{"outcome", to_string(r.outcome)}, {"result", r.result}}.dump(2) << "\n";
    } else if (r.outcome == Outcome::Deny) {
        std::cout << "Deny\n";
    } else {
        show(r.result);
    }
    s.status = r.outcome == Outcome::Allow ? 0 : kDenied;
    return r;
}

Option opt(std::string key, std::string value) { return Option{std::move(key), std::move(value)}; }

std::string joined(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& x : v) out += (out.empty() ? "" : ",") + x;
    return out;
}

// The guarded verbs, shared by the top-level command line and the shell.
void add_verbs(CLI::App& app, const std::function<Session&()>& session) {
    app.require_subcommand(1);

    {
        auto doc = std::make_shared<std::string>();
        auto* cmd = app.add_subcommand("view", "Render a document with denied atoms redacted");
        cmd->add_option("document", *doc)->required();
        cmd->callback([=] { run(session(), {std::string(fn::kRead), {*doc}, {}, {}}, show_view); });
    }
    {
        struct Args {
            std::string doc, pattern;
            std::size_t context = 0;
            bool quiet = false;
            std::vector<std::string> hide;
        };
        auto a = std::make_shared<Args>();
        auto* cmd = app.add_subcommand("search", "grep over a document, or '-' for standard input");
        cmd->add_option("document", a->doc)->required();
        cmd->add_option("pattern", a->pattern)->required();
        cmd->add_option("-C,--context", a->context, "Lines of context");
        cmd->add_flag("-q,--quiet", a->quiet, "Report only whether something matched");
        cmd->add_option("--hide", a->hide, "Words to redact in output")->delimiter(',');
        cmd->callback([=] {
            InvokeRequest req;
            req.options = {opt("context", std::to_string(a->context)), opt("pattern", a->pattern)};
            if (a->quiet) req.options.push_back(Option{"quiet", std::nullopt});
            if (!a->hide.empty()) req.options.push_back(opt("hide", joined(a->hide)));
            if (a->doc == "-") {
                req.function = fn::kGrepStdin;
                req.stdin_bytes = slurp(std::cin);
            } else {
                req.function = fn::kSearch;
                req.args = {a->doc};
            }
            run(session(), req, show_search);
        });
    }
    {
        struct Args {
            std::string src, first, last, dest, variant = "bytes", save;
            std::size_t max_bytes = 0, max_chars = 0;
            std::vector<std::string> blocklist;
        };
        auto a = std::make_shared<Args>();
        auto* cmd = app.add_subcommand("copy", "Copy an atom range into another document");
        cmd->add_option("src", a->src)->required();
        cmd->add_option("first", a->first)->required();
        cmd->add_option("last", a->last)->required();
        cmd->add_option("dest", a->dest)->required();
        cmd->add_option("--variant", a->variant)->check(CLI::IsMember({"bytes", "chars", "words", "cite"}));
        cmd->add_option("--max-bytes", a->max_bytes);
        cmd->add_option("--max-chars", a->max_chars);
        cmd->add_option("--blocklist", a->blocklist)->delimiter(',');
        cmd->add_option("--save", a->save, "Write the updated destination document here");
        cmd->callback([=] {
            const std::map<std::string, std::string_view> fns = {
                {"bytes", fn::kCopyBytes}, {"chars", fn::kCopyChars}, {"words", fn::kCopyWords}, {"cite", fn::kCopyCite}};
            InvokeRequest req{std::string(fns.at(a->variant)), {a->src, a->first, a->last, a->dest}, {}, {}};
            if (a->max_bytes) req.options.push_back(opt("max_bytes", std::to_string(a->max_bytes)));
            if (a->max_chars) req.options.push_back(opt("max_chars", std::to_string(a->max_chars)));
            if (!a->blocklist.empty()) req.options.push_back(opt("blocklist", joined(a->blocklist)));
            auto& s = session();
            const auto r = run(s, req, [](const json& result) {
                std::cout << result.at("payload").get<std::string>() << "\n";
                if (result.contains("citation"))
                    std::cout << "-- quoted as " << result["citation"].at("quote_atom").get<std::string>()
                              << ", cited by " << result["citation"].at("citation_atom").get<std::string>() << "\n";
            });
            if (r.outcome == Outcome::Allow && !a->save.empty())
                write_file(a->save, serialize_adoc(*s.monitor.document(a->dest)));
        });
    }
    {
        auto a = std::make_shared<std::array<std::string, 3>>();  // doc, watermark, out
        auto* cmd = app.add_subcommand("print", "Watermarked print of the readable atoms");
        cmd->add_option("document", (*a)[0])->required();
        cmd->add_option("--watermark", (*a)[1]);
        cmd->add_option("-o,--out", (*a)[2], "Write the print artifact to a file");
        cmd->callback([=] {
            InvokeRequest req{std::string(fn::kPrint), {(*a)[0]}, {}, {}};
            if (!(*a)[1].empty()) req.options.push_back(opt("watermark", (*a)[1]));
            run(session(), req, [=](const json& result) {
                const auto artifact = result.at("text").get<std::string>();
                if ((*a)[2].empty()) std::cout << artifact;
                else write_file((*a)[2], artifact);
            });
        });
    }
    {
        struct Args {
            std::string doc;
            std::vector<std::string> atoms, to, cc;
        };
        auto a = std::make_shared<Args>();
        auto* cmd = app.add_subcommand("email", "Send atoms; the policy CC is always added");
        cmd->add_option("document", a->doc)->required();
        cmd->add_option("atoms", a->atoms)->required();
        cmd->add_option("--to", a->to)->delimiter(',')->required();
        cmd->add_option("--cc", a->cc)->delimiter(',');
        cmd->callback([=] {
            std::vector<std::string> args{a->doc};
            args.insert(args.end(), a->atoms.begin(), a->atoms.end());
            InvokeRequest req{std::string(fn::kEmail), args, {opt("to", joined(a->to))}, {}};
            if (!a->cc.empty()) req.options.push_back(opt("cc", joined(a->cc)));
            run(session(), req, [](const json& rec) {
                std::cout << "queued to " << joined(rec.at("to").get<std::vector<std::string>>()) << " cc "
                          << joined(rec.at("cc").get<std::vector<std::string>>()) << "\n";
            });
        });
    }
    {
        auto a = std::make_shared<std::pair<std::string, std::string>>();
        auto* cmd = app.add_subcommand("functions", "Functions this subject holds on one atom");
        cmd->add_option("document", a->first)->required();
        cmd->add_option("atom", a->second)->required();
        cmd->callback([=] {
            auto& s = session();
            const auto list = s.monitor.atom_functions(s.who, a->first, a->second);
            std::cout << (s.json ? to_json(list).dump(2) + "\n" : to_text(list));
        });
    }
    {
        struct Args {
            std::string function, outcome;
        };
        auto a = std::make_shared<Args>();
        auto* cmd = app.add_subcommand("audit", "This session's audit records");
        cmd->add_option("--function", a->function);
        cmd->add_option("--outcome", a->outcome)->check(CLI::IsMember({"Allow", "Deny"}));
        cmd->callback([=] {
            auto& s = session();
            AuditFilter f;
            if (s.who.role != Role::Admin) f.subject = s.who.subject;
            if (!a->function.empty()) f.function = a->function;
            if (!a->outcome.empty()) f.outcome = a->outcome == "Allow" ? Outcome::Allow : Outcome::Deny;
            for (const auto& r : s.monitor.audit_query(f)) std::cout << to_json(r).dump() << "\n";
        });
    }
}

int shell(Monitor& monitor, Principal who, bool as_json) {
    Session s{monitor, std::move(who), as_json};
    std::string line;
    while (std::getline(std::cin, line)) {
        const auto start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        if (line.substr(start) == "quit" || line.substr(start) == "exit") break;
        CLI::App app{"shell"};
        app.name("");
        add_verbs(app, [&]() -> Session& { return s; });
        const auto verb = line.substr(start, line.find_first_of(" \t", start) - start);
        if (verb != "help" && !app.get_subcommand_no_throw(verb)) {
            std::cout << "error: unknown verb '" << verb << "'; try help\n";
            continue;
        }
        if (verb == "help") {
            std::cout << app.help();
            continue;
        }
        try {
            app.parse(line, false);
        } catch (const CLI::CallForHelp&) {
            std::cout << app.help();
        } catch (const CLI::ParseError& e) {
            std::cout << "error: " << e.what() << "\n";
        } catch (const fbac::Error& e) {
            std::cout << "error: " << e.what() << "\n";
        }
    }
    return 0;
}

ApiServer* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Function-based access control: policies, atomic documents and guarded functions"};
    app.require_subcommand(1);
    int status = 0;

    Workspace ws;
    std::unique_ptr<Monitor> monitor;
    std::optional<Session> session;
    auto open_session = [&]() -> Session& {
        if (!session) {
            if (ws.as.empty()) throw Error(ErrorCode::InvalidOption, "--as <subject> is required");
            monitor = ws.open();
            session.emplace(Session{*monitor, Principal{SubjectId{ws.as}, Role::Viewer, {}}, ws.json});
        }
        return *session;
    };

    // project
    std::string kind;
    std::map<std::string, std::string> params;
    bool no_compress = false;
    auto* project = app.add_subcommand("project", "Print one projection of the access tensor");
    project->add_option("--kind", kind)->required()->check(CLI::IsMember({"authz", "cap", "acm", "flist", "slist", "olist"}));
    for (const auto* key : {"subject", "object", "function", "app", "prefix"})
        project->add_option_function<std::string>(std::string("--") + key, [&, key](const std::string& v) { params[key] = v; });
    project->add_flag("--no-compress", no_compress, "Keep NotApplicable cells");
    ws.add_options(*project, false);
    project->callback([&] {
        if (no_compress) params["compress"] = "false";
        std::shared_ptr<const AccessTensor> t;
        if (ws.empty()) {
            AccessTensor plain;
            for (const auto& p : ws.policies) load_policy(plain, read_file(p), p);
            t = std::make_shared<const AccessTensor>(std::move(plain));
        } else {
            monitor = ws.open();
            t = monitor->snapshot();
        }
        const auto r = run_projection(*t, kind, params);
        std::cout << (ws.json ? r.json.dump(2) + "\n" : r.text);
    });

    // convert
    std::string from = "txt", to = "adoc", in = "-", out = "-", doc_id, author;
    QuestionnaireAnswers answers;
    bool no_print = false, no_copy = false, no_email = false;
    auto* convert = app.add_subcommand("convert", "Split plain text into atoms and write .adoc");
    convert->add_option("--from", from)->check(CLI::IsMember({"txt"}));
    convert->add_option("--to", to)->check(CLI::IsMember({"adoc"}));
    convert->add_option("-i,--in", in, "Input file or '-'");
    convert->add_option("-o,--out", out, "Output file or '-'");
    convert->add_option("--id", doc_id, "Document id")->required();
    convert->add_option("--author", author, "Give this subject the questionnaire defaults");
    convert->add_flag("--no-print", no_print);
    convert->add_flag("--no-copy", no_copy);
    convert->add_flag("--no-email", no_email);
    convert->add_option("--search-context", answers.default_search_context);
    convert->callback([&] {
        const auto plain = in == "-" ? slurp(std::cin) : read_file(in);
        auto d = import_plain_text(plain, doc_id);
        if (!author.empty()) {
            answers.printable = !no_print;
            answers.copyable = !no_copy;
            answers.emailable = !no_email;
            d = apply_batch(d, defaults_from_questionnaire(answers, d, SubjectId{author}));
        }
        const auto bytes = serialize_adoc(d);
        if (out == "-") std::cout << bytes;
        else write_file(out, bytes);
    });

    // guarded verbs
    add_verbs(app, [&]() -> Session& { return open_session(); });
    for (auto* sub : app.get_subcommands([](const CLI::App* a) {
             const auto n = a->get_name();
             return n != "project" && n != "convert";
         }))
        ws.add_options(*sub, true);

    // shell
    auto* sh = app.add_subcommand("shell", "Read verbs from standard input, one per line");
    ws.add_options(*sh, true);
    sh->callback([&] {
        auto& s = open_session();
        status = shell(s.monitor, s.who, s.json);
    });

    // serve
    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    ws.add_options(*serve, false);
    serve->add_option("--host", host);
    serve->add_option("--port", port, "0 picks a free port");
    serve->callback([&] {
        monitor = ws.open();
        ApiServer server(*monitor);
        const int bound = port == 0 ? server.bind_any_port(host) : (server.bind(host, port) ? port : -1);
        if (bound < 0) throw Error(ErrorCode::InvalidOption, "cannot bind " + host + ":" + std::to_string(port));
        g_server = &server;
        std::signal(SIGINT, [](int) { g_server->stop(); });
        std::signal(SIGTERM, [](int) { g_server->stop(); });
        std::cout << "listening on http://" << host << ":" << bound << std::endl;
        server.listen_after_bind();
        g_server = nullptr;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const fbac::Error& e) {
        std::cerr << "fbac: " << e.what() << "\n";
        return kFailed;
    }
    if (session && status == 0) status = session->status;
    return status;
}
