#include "fbac/monitor.hpp"

#include "fbac/lattice.hpp"
#include "fbac/policy_file.hpp"
#include "fbac/regex.hpp"
#include "fbac/text.hpp"

#include <algorithm>
#include <charconv>

namespace fbac {

std::string_view to_string(Role r) {
    switch (r) {
    case Role::Author: return "author";
    case Role::CoAuthor: return "coauthor";
    case Role::Viewer: return "viewer";
    case Role::Admin: return "admin";
    }
    return "viewer";
}

Role parse_role(std::string_view s) {
    const auto low = text::to_lower_ascii(s);
    if (low == "author") return Role::Author;
    if (low == "coauthor" || low == "co-author") return Role::CoAuthor;
    if (low == "viewer") return Role::Viewer;
    if (low == "admin") return Role::Admin;
    throw Error(ErrorCode::InvalidOption, "unknown role '" + std::string(s) + "'");
}

// ── Identity ────────────────────────────────────────────────────────────────

void IdentityStore::add(std::string token, SubjectId subject, Role role) {
    if (token.empty()) throw Error(ErrorCode::InvalidOption, "empty token");
    if (!is_identifier(subject.name)) throw Error(ErrorCode::InvalidIdentifier, "bad subject '" + subject.name + "'");
    if (by_token_.contains(token)) throw Error(ErrorCode::DuplicateIdentifier, "token mapped twice");
    Principal p{std::move(subject), role, token};
    by_token_.emplace(std::move(token), std::move(p));
}

const Principal& IdentityStore::authenticate(std::string_view token) const {
    auto it = by_token_.find(token);
    if (token.empty() || it == by_token_.end()) throw Error(ErrorCode::Unauthenticated, "unknown token");
    return it->second;
}

std::vector<Principal> IdentityStore::principals() const {
    std::vector<Principal> out;
    for (const auto& [_, p] : by_token_) out.push_back(p);
    return out;
}

IdentityStore IdentityStore::parse(std::string_view file_text, std::string_view source) {
    IdentityStore ids;
    std::size_t number = 0;
    for (const auto& raw : text::split(file_text, '\n')) {
        ++number;
        const auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> parts;
        for (const auto& tok : text::split(line, ' '))
            if (!text::trim(tok).empty()) parts.emplace_back(text::trim(tok));
        try {
            if (parts.size() != 3) throw Error(ErrorCode::PolicySyntax, "expected '<token> <subject> <role>'");
            ids.add(parts[0], SubjectId{parts[1]}, parse_role(parts[2]));
        } catch (const Error& e) {
            throw Error(e.code(), std::string(source) + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return ids;
}

// ── Authoring defaults ──────────────────────────────────────────────────────

Predicate context_limit_predicate(std::size_t max_context) {
    return Predicate::regex("context=(" + re::decimal_at_most(max_context) + ")(;.*)?\\nSTDIN:.*");
}

PolicyBatch defaults_from_questionnaire(const QuestionnaireAnswers& q, const AtomicDocument& d, const SubjectId& author) {
    PolicyBatch b;
    std::vector<std::string_view> granted = {fn::kRead};
    if (!q.printable) b.forbidden.insert(std::string(fn::kPrint));
    else granted.push_back(fn::kPrint);
    if (!q.emailable) b.forbidden.insert(std::string(fn::kEmail));
    else granted.push_back(fn::kEmail);
    for (auto f : {fn::kCopyBytes, fn::kCopyChars, fn::kCopyWords, fn::kCopyCite}) {
        if (!q.copyable) b.forbidden.insert(std::string(f));
        else granted.push_back(f);
    }
    for (const auto& a : d.atoms) {
        auto& pol = b.atoms[a.id];
        for (auto f : granted) pol[std::string(f)][author] = TensorEntry::true_entry();
        for (const auto& f : b.forbidden) pol[f][author] = TensorEntry::false_entry();
        pol[std::string(fn::kSearch)][author] = TensorEntry::true_with(context_limit_predicate(q.default_search_context));
    }
    const auto applied = apply_batch(d, b);
    const auto report = validate_document(applied);
    for (const auto& v : report.violations)
        if (v.condition == Condition::ForbiddenFunctionGranted)
            throw Error(ErrorCode::InconsistentDefaults, "atom " + v.atom_id + " " + v.detail);
    return b;
}

AtomicDocument apply_batch(const AtomicDocument& d, const PolicyBatch& batch) {
    auto out = d;
    out.forbidden_functions.insert(batch.forbidden.begin(), batch.forbidden.end());
    for (const auto& [atom_id, pol] : batch.atoms) {
        auto* a = out.find(atom_id);
        if (!a) throw Error(ErrorCode::UnknownAtom, "no atom '" + atom_id + "' in " + d.id);
        for (const auto& [f, row] : pol)
            for (const auto& [s, e] : row) a->policy[f][s] = e;
    }
    return out;
}

PolicyBatch derive_coauthor_policy(const AtomicDocument& d, const SubjectId& author, const SubjectId& coauthor,
                                   const std::set<std::string>& removals) {
    std::set<std::string> author_granted;
    for (const auto& a : d.atoms)
        for (const auto& [f, row] : a.policy) {
            auto it = row.find(author);
            if (it != row.end() && it->second.grants()) author_granted.insert(f);
        }
    for (const auto& r : removals)
        if (!author_granted.contains(r))
            throw Error(ErrorCode::NotASubset, "'" + r + "' is not granted to " + author.name);
    PolicyBatch b;
    for (const auto& a : d.atoms)
        for (const auto& [f, row] : a.policy) {
            auto it = row.find(author);
            if (it == row.end() || !it->second.grants() || removals.contains(f)) continue;
            b.atoms[a.id][f][coauthor] = it->second;
        }
    return b;
}

PolicyBatch derive_coauthor_policy(const AtomicDocument& d, const SubjectId& author, const SubjectId& coauthor,
                                   const CoauthorTemplate& tmpl) {
    auto it = tmpl.overrides.find(coauthor);
    return derive_coauthor_policy(d, author, coauthor, it == tmpl.overrides.end() ? tmpl.global_removals : it->second);
}

std::set<SubjectId> narrow_suspects(const AccessTensor& t, const AuditLog& audit, std::string_view function,
                                    const ObjectRef& object) {
    const auto list = subject_list(t, function, {object});
    AuditFilter f;
    f.function = std::string(function);
    f.object = object;
    f.outcome = Outcome::Allow;
    std::set<SubjectId> ran;
    for (const auto& r : audit.query(f)) ran.insert(r.subject);
    std::set<SubjectId> out;
    for (const auto& [s, e] : list.entries)
        if (e.grants() && ran.contains(s)) out.insert(s);
    return out;
}

// ── Monitor ─────────────────────────────────────────────────────────────────

Monitor::Monitor(MonitorConfig config)
    : config_(std::move(config)),
      catalog_(std::make_shared<const FunctionCatalog>(FunctionCatalog::standard())),
      programs_(builtin_predicates()) {
    AccessTensor t;
    catalog_->register_in(t);
    snapshot_ = std::make_shared<const AccessTensor>(std::move(t));
}

void Monitor::install(std::shared_ptr<const AccessTensor> t,
                      std::map<std::string, std::shared_ptr<const AtomicDocument>, std::less<>> docs) {
    std::unique_lock lock(mu_);
    snapshot_ = std::move(t);
    documents_ = std::move(docs);
}

std::shared_ptr<const AccessTensor> Monitor::snapshot() const {
    std::shared_lock lock(mu_);
    return snapshot_;
}

std::shared_ptr<const FunctionCatalog> Monitor::catalog() const {
    std::shared_lock lock(mu_);
    return catalog_;
}

std::shared_ptr<const AtomicDocument> Monitor::document(std::string_view id) const {
    std::shared_lock lock(mu_);
    auto it = documents_.find(id);
    return it == documents_.end() ? nullptr : it->second;
}

std::vector<std::string> Monitor::document_ids() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, _] : documents_) out.push_back(id);
    return out;
}

void Monitor::set_identities(IdentityStore ids) {
    std::lock_guard w(writer_);
    auto t = *snapshot();
    for (const auto& p : ids.principals())
        if (!t.has_subject(p.subject)) t.create_subject(p.subject);
    {
        std::unique_lock lock(mu_);
        identities_ = std::move(ids);
        snapshot_ = std::make_shared<const AccessTensor>(std::move(t));
    }
}

Principal Monitor::authenticate(std::string_view token) const {
    std::shared_lock lock(mu_);
    return identities_.authenticate(token);
}

void Monitor::load_policy(std::string_view policy_text, std::string_view source) {
    std::lock_guard w(writer_);
    auto t = *snapshot();
    fbac::load_policy(t, policy_text, source);
    std::unique_lock lock(mu_);
    snapshot_ = std::make_shared<const AccessTensor>(std::move(t));
}

void Monitor::load_lattice(std::string_view lattice_text, std::string_view source) {
    std::lock_guard w(writer_);
    const auto a = parse_lattice_policy(lattice_text, source);
    auto t = compile_to_tensor(a, *snapshot());
    std::unique_lock lock(mu_);
    snapshot_ = std::make_shared<const AccessTensor>(std::move(t));
}

void Monitor::put_document(AtomicDocument d) {
    std::lock_guard w(writer_);
    put_document_locked(std::move(d));
}

void Monitor::put_document_locked(AtomicDocument d) {
    const auto report = validate_document(d);
    if (!report.accepted())
        throw Error(ErrorCode::InvalidDocument, d.id + ": atom " + report.violations.front().atom_id + " " +
                                                    report.violations.front().detail);
    std::map<std::string, std::shared_ptr<const AtomicDocument>, std::less<>> docs;
    {
        std::shared_lock lock(mu_);
        docs = documents_;
    }
    // cross-document links are checked once both ends are loaded
    auto check_target = [&](const AtomicDocument& from, const AtomLink& l) {
        const auto slash = l.target.find('/');
        if (slash == std::string::npos) return;
        const auto doc = l.target.substr(0, slash);
        const auto* target = doc == d.id ? &d : (docs.contains(doc) ? docs.at(doc).get() : nullptr);
        if (target && !target->find(l.target.substr(slash + 1)))
            throw Error(ErrorCode::DanglingLink, from.id + " links to missing " + l.target);
    };
    for (const auto& a : d.atoms)
        for (const auto& l : a.links) check_target(d, l);
    for (const auto& [id, other] : docs)
        if (id != d.id)
            for (const auto& a : other->atoms)
                for (const auto& l : a.links)
                    if (l.target.rfind(d.id + "/", 0) == 0) check_target(*other, l);

    auto t = *snapshot();
    if (auto it = docs.find(d.id); it != docs.end())
        for (const auto& a : it->second->atoms)
            if (!d.find(a.id)) t.destroy_object(atom_object(d.id, a.id));
    install_document_policy(t, d);
    auto id = d.id;
    docs[id] = std::make_shared<const AtomicDocument>(std::move(d));
    install(std::make_shared<const AccessTensor>(std::move(t)), std::move(docs));
}

void Monitor::load_directory(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::InvalidOption, dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    auto with_ext = [&](std::string_view ext) {
        std::vector<fs::path> out;
        for (const auto& f : files)
            if (f.extension() == ext) out.push_back(f);
        return out;
    };
    if (fs::exists(dir / "identities.txt"))
        set_identities(IdentityStore::parse(read_file((dir / "identities.txt").string()), "identities.txt"));
    const auto names = catalog()->names();
    for (const auto& f : with_ext(".adoc")) put_document(parse_adoc(read_file(f.string()), names));
    for (const auto& f : with_ext(".policy")) load_policy(read_file(f.string()), f.filename().string());
    for (const auto& f : with_ext(".lattice")) load_lattice(read_file(f.string()), f.filename().string());
}

FunctionSig Monitor::compose(std::string_view f, std::string_view g) {
    std::lock_guard w(writer_);
    auto cat = *catalog();
    auto t = *snapshot();
    const auto sig = fbac::compose(cat, f, g, &t);
    std::unique_lock lock(mu_);
    catalog_ = std::make_shared<const FunctionCatalog>(std::move(cat));
    snapshot_ = std::make_shared<const AccessTensor>(std::move(t));
    return sig;
}

namespace {

// Malformed request shape; the caller audits it before rethrowing.
struct BadRequest {
    std::string message;
};

const std::string* option(const InvokeRequest& req, std::string_view key) {
    for (const auto& o : req.options)
        if (o.key == key) return o.value ? &*o.value : nullptr;
    return nullptr;
}

bool has_flag(const InvokeRequest& req, std::string_view key) {
    for (const auto& o : req.options)
        if (o.key == key) return !o.value || *o.value == "true" || *o.value == "1";
    return false;
}

std::size_t size_option(const InvokeRequest& req, std::string_view key, std::size_t fallback) {
    const auto* v = option(req, key);
    if (!v) return fallback;
    std::size_t n = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), n);
    if (v->empty() || ec != std::errc{} || p != v->data() + v->size())
        throw BadRequest{std::string(key) + " must be a non-negative integer"};
    return n;
}

std::vector<std::string> list_option(const InvokeRequest& req, std::string_view key) {
    std::vector<std::string> out;
    if (const auto* v = option(req, key))
        for (const auto& part : text::split(*v, ','))
            if (!text::trim(part).empty()) out.emplace_back(text::trim(part));
    return out;
}

SearchOptions search_options(const InvokeRequest& req) {
    SearchOptions o;
    o.context = size_option(req, "context", 0);
    o.quiet = has_flag(req, "quiet");
    for (auto& w : list_option(req, "hide")) o.hide_words.insert(std::move(w));
    return o;
}

}  // namespace

InvokeResponse Monitor::invoke(const Principal& p, const InvokeRequest& req) {
    const auto snap = snapshot();
    const auto cat = catalog();
    GuardContext ctx{*snap, *cat, audit_, programs_};
    const Invocation raw{req.options, req.stdin_bytes};
    InvokeResponse out;
    out.result = nlohmann::json::object();

    ObjectTuple touched;
    for (const auto& a : req.args) touched.push_back(ObjectRef{a});
    auto refuse = [&](std::string detail) {
        AuditRecord r{0, 0, p.subject, req.function, touched, options_digest(raw), Outcome::Deny, 0, std::move(detail)};
        audit_.append(std::move(r));
        return out;
    };
    // Errors raised before a guarded function runs still leave their one record.
    auto fail = [&](ErrorCode code, const std::string& msg) -> InvokeResponse {
        refuse(msg);
        throw Error(code, msg);
    };

    const auto* spec = cat->find(req.function);
    if (!spec) return fail(ErrorCode::UnknownFunction, "no guarded function '" + req.function + "'");
    auto need_args = [&](std::size_t n) {
        if (req.args.size() < n) fail(ErrorCode::InvalidOption, req.function + " needs " + std::to_string(n) + " argument(s)");
    };
    auto doc_at = [&](std::size_t i) { return document(req.args.at(i)); };

    const auto& f = req.function;
    try {
        if (spec->parts) {
            need_args(2);
            const auto* pattern = option(req, "pattern");
            if (!pattern) return fail(ErrorCode::InvalidOption, "pattern option required");
            auto d = doc_at(0);
            if (!d) return refuse({});
            auto r = run_composite(ctx, p.subject, f, *d, req.args[1], *pattern, search_options(req));
            out.outcome = r.outcome;
            if (r.outcome == Outcome::Allow) out.result = {{"output", r.output}};
        } else if (f == fn::kRead) {
            need_args(1);
            auto d = doc_at(0);
            if (!d) return refuse({});
            auto v = redacted_view(ctx, p.subject, *d);
            out.outcome = std::any_of(v.segments.begin(), v.segments.end(),
                                      [](const Segment& s) { return s.kind == SegmentKind::Content; })
                              ? Outcome::Allow
                              : Outcome::Deny;
            if (out.outcome == Outcome::Allow) out.result = to_json(v);
        } else if (f == fn::kSearch || f == fn::kGrepStdin) {
            const auto* pattern = option(req, "pattern");
            if (!pattern) return fail(ErrorCode::InvalidOption, "pattern option required");
            SearchResult r;
            if (f == fn::kSearch) {
                need_args(1);
                auto d = doc_at(0);
                if (!d) return refuse({});
                r = search(ctx, p.subject, *d, *pattern, search_options(req));
            } else {
                r = search_standard(ctx, p.subject, req.stdin_bytes, *pattern, search_options(req));
            }
            out.outcome = r.outcome;
            if (r.outcome == Outcome::Allow) out.result = to_json(r);
        } else if (f == fn::kPrint) {
            need_args(1);
            auto d = doc_at(0);
            if (!d) return refuse({});
            const auto* wm = option(req, "watermark");
            auto r = watermark_print(ctx, p.subject, *d, wm ? *wm : p.subject.name, config_.page_lines);
            out.outcome = r.outcome;
            if (r.outcome == Outcome::Allow) out.result = {{"text", r.text}, {"pages", r.pages}};
        } else if (f == fn::kEmail) {
            need_args(2);
            auto d = doc_at(0);
            if (!d) return refuse({});
            std::vector<std::string> atoms(req.args.begin() + 1, req.args.end());
            auto r = force_cc_email(ctx, p.subject, *d, atoms, list_option(req, "to"), list_option(req, "cc"),
                                    config_.policy_cc, config_.outbox_path);
            out.outcome = r.outcome;
            if (r.record) out.result = to_json(*r.record);
        } else if (f == fn::kCopyBytes || f == fn::kCopyChars || f == fn::kCopyWords || f == fn::kCopyCite) {
            need_args(4);
            CopyRequest cr;
            cr.variant = f == fn::kCopyBytes   ? CopyVariant::ByteRestricted
                         : f == fn::kCopyChars ? CopyVariant::CharacterLimited
                         : f == fn::kCopyWords ? CopyVariant::SensitiveWordExclusion
                                               : CopyVariant::WithCitation;
            cr.first_atom = req.args[1];
            cr.last_atom = req.args[2];
            cr.max_bytes = size_option(req, "max_bytes", 0);
            cr.max_chars = size_option(req, "max_chars", 0);
            for (auto& w : list_option(req, "blocklist")) cr.blocklist.insert(std::move(w));

            std::lock_guard w(writer_);
            auto src = doc_at(0);
            auto dest_ptr = doc_at(3);
            if (!src || !dest_ptr) return refuse({});
            auto dest = *dest_ptr;
            // the source may be the destination; read it before the copy lands
            const auto src_copy = *src;
            auto r = copy(ctx, p.subject, src_copy, cr, dest);
            out.outcome = r.outcome;
            out.result = to_json(r);
            if (r.outcome == Outcome::Allow && r.citation) put_document_locked(std::move(dest));
        } else {
            return fail(ErrorCode::NotComposable, f + " has no executor");
        }
    } catch (const BadRequest& e) {
        return fail(ErrorCode::InvalidOption, e.message);
    } catch (const std::out_of_range&) {
        return fail(ErrorCode::InvalidOption, "missing argument");
    }
    return out;
}

FunctionList Monitor::atom_functions(const Principal& p, std::string_view doc_id, std::string_view atom_id) const {
    auto d = document(doc_id);
    if (!d || !d->find(atom_id)) throw Error(ErrorCode::UnknownDocument, std::string(doc_id) + "/" + std::string(atom_id));
    const auto snap = snapshot();
    std::set<std::string> app;
    for (const auto& name : catalog()->names())
        if (snap->has_function(name)) app.insert(name);
    if (!snap->has_subject(p.subject)) return FunctionList{p.subject, {atom_object(doc_id, atom_id)}, {}};
    return application_restricted_function_list(*snap, app, p.subject, {atom_object(doc_id, atom_id)});
}

nlohmann::json Monitor::projection(const Principal& p, std::string_view kind,
                                   const std::map<std::string, std::string>& params) const {
    auto scoped = params;
    if (p.role != Role::Admin) {
        if (kind == "authz" || kind == "acm" || kind == "slist")
            throw Error(ErrorCode::Forbidden, std::string(kind) + " spans all subjects; admin only");
        if (auto it = scoped.find("subject"); it != scoped.end() && it->second != p.subject.name)
            throw Error(ErrorCode::Forbidden, "only admins may inspect other subjects");
    }
    scoped.try_emplace("subject", p.subject.name);
    return run_projection(*snapshot(), kind, scoped).json;
}

}  // namespace fbac
