#include "fbac/guarded.hpp"

#include "fbac/regex.hpp"
#include "fbac/text.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

namespace fbac {

// ── Catalog ─────────────────────────────────────────────────────────────────

FunctionCatalog FunctionCatalog::standard() {
    using T = OptionType;
    const std::vector<OptionSpec> search_opts = {
        {"context", T::Integer, "0"}, {"pattern", T::Text, ""}, {"quiet", T::Flag, ""}, {"hide", T::WordList, ""}};
    FunctionCatalog c;
    c.add({{std::string(fn::kRead), 1}, {}, "atom content or a redaction marker", {}});
    c.add({{std::string(fn::kSearch), 1}, search_opts, "matching lines with bounded context", {}});
    c.add({{std::string(fn::kGrepStdin), 0}, search_opts, "matching stdin lines with bounded context", {}});
    c.add({{std::string(fn::kPrint), 1}, {{"watermark", T::Text, ""}}, "watermarked pages", {}});
    c.add({{std::string(fn::kEmail), 1}, {{"to", T::WordList, ""}, {"cc", T::WordList, ""}}, "outbox record", {}});
    c.add({{std::string(fn::kCopyBytes), 1}, {{"max_bytes", T::Integer, "0"}}, "payload of at most max_bytes bytes", {}});
    c.add({{std::string(fn::kCopyChars), 1}, {{"max_chars", T::Integer, "0"}}, "payload of at most max_chars code points", {}});
    c.add({{std::string(fn::kCopyWords), 1}, {{"blocklist", T::WordList, ""}}, "payload without blocklisted words", {}});
    c.add({{std::string(fn::kCopyCite), 1}, {}, "quote atom linked to a citation atom", {}});
    return c;
}

void FunctionCatalog::add(GuardedFunctionSpec spec) {
    if (!is_function_name(spec.sig.name)) throw Error(ErrorCode::InvalidIdentifier, "bad function name '" + spec.sig.name + "'");
    const auto name = spec.sig.name;
    if (!specs_.emplace(name, std::move(spec)).second)
        throw Error(ErrorCode::DuplicateIdentifier, "function '" + name + "' already in the catalog");
}

const GuardedFunctionSpec* FunctionCatalog::find(std::string_view name) const {
    auto it = specs_.find(name);
    return it == specs_.end() ? nullptr : &it->second;
}

const GuardedFunctionSpec& FunctionCatalog::at(std::string_view name) const {
    if (const auto* s = find(name)) return *s;
    throw Error(ErrorCode::UnknownFunction, std::string(name));
}

std::set<std::string> FunctionCatalog::names() const {
    std::set<std::string> out;
    for (const auto& [n, _] : specs_) out.insert(n);
    return out;
}

void FunctionCatalog::register_in(AccessTensor& t) const {
    for (const auto& [name, spec] : specs_)
        if (!t.has_function(name)) t.create_function(spec.sig);
}

FunctionSig compose(FunctionCatalog& catalog, std::string_view f, std::string_view g, AccessTensor* t) {
    const auto& outer = catalog.at(f);
    const auto& inner = catalog.at(g);
    FunctionSig sig{outer.sig.name + std::string(kComposeOperator) + inner.sig.name, inner.sig.arity};
    if (catalog.find(sig.name)) throw Error(ErrorCode::DuplicateComposite, sig.name + " already registered");
    if (t && t->has_function(sig.name)) throw Error(ErrorCode::DuplicateComposite, sig.name + " already in the tensor");
    GuardedFunctionSpec spec{sig, outer.options, outer.output + " over " + inner.sig.name + " output",
                             std::make_pair(outer.sig.name, inner.sig.name)};
    catalog.add(std::move(spec));
    if (t) t->create_function(sig);
    return sig;
}

Decision guarded_decide(const GuardContext& ctx, const SubjectId& s, std::string_view function,
                        const ObjectTuple& objects, const Invocation& inv) {
    try {
        return decide(ctx.tensor, s, function, objects, inv, ctx.programs);
    } catch (const Error& e) {
        switch (e.code()) {
        case ErrorCode::UnknownSubject:
        case ErrorCode::UnknownFunction:
        case ErrorCode::UnknownObject:
        case ErrorCode::UnknownIdentifier: {
            Decision d;
            d.outcome = Outcome::Deny;
            d.reason = DecisionReason::NoEntry;
            return d;
        }
        default: throw;
        }
    }
}

namespace {

void record(const GuardContext& ctx, const SubjectId& s, std::string_view function, ObjectTuple objects,
            const Invocation& inv, Outcome outcome, std::size_t bytes, std::string detail = {}) {
    AuditRecord r;
    r.subject = s;
    r.function = std::string(function);
    r.objects = std::move(objects);
    r.options_digest = options_digest(inv);
    r.outcome = outcome;
    r.output_bytes = outcome == Outcome::Allow ? bytes : 0;
    r.detail = std::move(detail);
    ctx.audit.append(std::move(r));
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

// Calls emit(word) for every maximal word and keep(gap) for the text between words.
template <typename OnWord, typename OnGap>
void scan_words(std::string_view s, OnWord on_word, OnGap on_gap) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto start = pos;
        const bool word = is_word_byte(static_cast<unsigned char>(s[pos]));
        while (pos < s.size() && is_word_byte(static_cast<unsigned char>(s[pos])) == word) ++pos;
        if (word) on_word(s.substr(start, pos - start));
        else on_gap(s.substr(start, pos - start));
    }
}

std::set<std::string> lowered(const std::set<std::string>& words) {
    std::set<std::string> out;
    for (const auto& w : words) out.insert(text::to_lower_ascii(w));
    return out;
}

struct CompiledSearch {
    re::Regex matcher;
};

CompiledSearch compile_search(std::string_view pattern) {
    re::Regex check(pattern);  // reject on its own before wrapping
    (void)check;
    return {re::Regex(".*(" + std::string(pattern) + ").*")};
}

std::vector<SearchHit> search_lines(const re::Regex& matcher, const std::string& atom_id,
                                    const std::vector<std::string>& lines, const SearchOptions& opts) {
    std::vector<SearchHit> hits;
    const auto hidden = lowered(opts.hide_words);
    auto clean = [&](const std::string& l) { return hidden.empty() ? l : hide_words(l, hidden); };
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!matcher.full_match(lines[i])) continue;
        SearchHit h;
        h.atom_id = atom_id;
        h.line_number = i + 1;
        h.line = clean(lines[i]);
        for (std::size_t j = i - std::min(i, opts.context); j < i; ++j) h.before.push_back(clean(lines[j]));
        for (std::size_t j = i + 1; j < lines.size() && j <= i + opts.context; ++j) h.after.push_back(clean(lines[j]));
        hits.push_back(std::move(h));
    }
    return hits;
}

std::size_t hit_bytes(const std::vector<SearchHit>& hits) {
    std::size_t n = 0;
    for (const auto& h : hits) {
        n += h.line.size() + 1;
        for (const auto& l : h.before) n += l.size() + 1;
        for (const auto& l : h.after) n += l.size() + 1;
    }
    return n;
}

std::string join_addresses(const std::vector<std::string>& v) { return text::join(v, ","); }

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::vector<const Atom*> available_in_order(const AtomicDocument& d) {
    const auto ok = available_atoms(d);
    std::vector<const Atom*> out;
    for (const auto& a : d.atoms)
        if (ok.contains(a.id)) out.push_back(&a);
    return out;
}

std::string search_text(const SearchResult& r) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < r.hits.size(); ++i) {
        if (i) out.push_back("--");
        const auto& h = r.hits[i];
        out.insert(out.end(), h.before.begin(), h.before.end());
        out.push_back(h.line);
        out.insert(out.end(), h.after.begin(), h.after.end());
    }
    return out.empty() ? std::string{} : text::join(out, "\n") + "\n";
}

}  // namespace

// ── search ──────────────────────────────────────────────────────────────────

Invocation search_invocation(std::string_view pattern, const SearchOptions& opts, std::string stdin_bytes) {
    Invocation inv;
    inv.options.push_back({"context", std::to_string(opts.context)});
    inv.options.push_back({"pattern", std::string(pattern)});
    if (opts.quiet) inv.options.push_back({"quiet", std::nullopt});
    if (!opts.hide_words.empty())
        inv.options.push_back({"hide", text::join({opts.hide_words.begin(), opts.hide_words.end()}, ",")});
    inv.stdin_bytes = std::move(stdin_bytes);
    return inv;
}

std::string hide_words(std::string_view line, const std::set<std::string>& words) {
    const auto wanted = lowered(words);
    std::string out;
    scan_words(
        line,
        [&](std::string_view w) {
            if (wanted.contains(text::to_lower_ascii(w))) out += kRedactedMarker;
            else out += w;
        },
        [&](std::string_view gap) { out += gap; });
    return out;
}

SearchResult search(const GuardContext& ctx, const SubjectId& s, const AtomicDocument& d, std::string_view pattern,
                    const SearchOptions& opts) {
    const auto inv = search_invocation(pattern, opts);
    ObjectTuple touched;
    std::vector<const Atom*> atoms;
    for (const auto* a : available_in_order(d))
        if (a->kind == AtomKind::Text) {
            atoms.push_back(a);
            touched.push_back(atom_object(d.id, a->id));
        }
    std::optional<CompiledSearch> compiled;
    try {
        compiled.emplace(compile_search(pattern));
    } catch (const Error& e) {
        record(ctx, s, fn::kSearch, touched, inv, Outcome::Deny, 0, e.what());
        throw;
    }

    SearchResult r;
    r.boolean_only = opts.quiet;
    for (const auto* a : atoms) {
        if (guarded_decide(ctx, s, fn::kSearch, {atom_object(d.id, a->id)}, inv).outcome != Outcome::Allow) continue;
        r.outcome = Outcome::Allow;
        r.searched_atoms.push_back(a->id);
        auto hits = search_lines(compiled->matcher, a->id, text::split_lines(a->content), opts);
        if (!hits.empty()) r.matched = true;
        if (!opts.quiet) r.hits.insert(r.hits.end(), std::make_move_iterator(hits.begin()), std::make_move_iterator(hits.end()));
    }
    record(ctx, s, fn::kSearch, std::move(touched), inv, r.outcome, opts.quiet ? 1 : hit_bytes(r.hits));
    return r;
}

SearchResult search_standard(const GuardContext& ctx, const SubjectId& s, std::string_view stdin_bytes,
                             std::string_view pattern, const SearchOptions& opts) {
    const auto inv = search_invocation(pattern, opts, std::string(stdin_bytes));
    std::optional<CompiledSearch> compiled;
    try {
        compiled.emplace(compile_search(pattern));
    } catch (const Error& e) {
        record(ctx, s, fn::kGrepStdin, {}, inv, Outcome::Deny, 0, e.what());
        throw;
    }
    SearchResult r;
    r.boolean_only = opts.quiet;
    const auto decision = guarded_decide(ctx, s, fn::kGrepStdin, {}, inv);
    if (decision.outcome == Outcome::Allow) {
        r.outcome = Outcome::Allow;
        auto hits = search_lines(compiled->matcher, "-", text::split_lines(stdin_bytes), opts);
        r.matched = !hits.empty();
        if (!opts.quiet) r.hits = std::move(hits);
    }
    record(ctx, s, fn::kGrepStdin, {}, inv, r.outcome, opts.quiet ? 1 : hit_bytes(r.hits), decision.detail);
    return r;
}

// ── view / print / email ────────────────────────────────────────────────────

std::string_view to_string(SegmentKind k) {
    switch (k) {
    case SegmentKind::Content: return "content";
    case SegmentKind::Redacted: return "redacted";
    case SegmentKind::BlurredImage: return "blurred-image";
    }
    return "redacted";
}

namespace {

Segment denied_segment(const Atom& a) {
    return {a.id, a.kind == AtomKind::ImageRef ? SegmentKind::BlurredImage : SegmentKind::Redacted, {}};
}

// Segments for `atoms`, content only where every function in `needed` is allowed.
RenderedView render(const GuardContext& ctx, const SubjectId& s, const AtomicDocument& d,
                    const std::vector<const Atom*>& atoms, const std::vector<std::pair<std::string_view, Invocation>>& needed,
                    bool& any_allowed) {
    RenderedView v{d.id, {}};
    any_allowed = false;
    for (const auto* a : atoms) {
        bool ok = true;
        for (const auto& [f, inv] : needed)
            if (guarded_decide(ctx, s, f, {atom_object(d.id, a->id)}, inv).outcome != Outcome::Allow) {
                ok = false;
                break;
            }
        if (ok) {
            any_allowed = true;
            v.segments.push_back({a->id, SegmentKind::Content, a->content});
        } else {
            v.segments.push_back(denied_segment(*a));
        }
    }
    return v;
}

ObjectTuple objects_of(const AtomicDocument& d, const std::vector<const Atom*>& atoms) {
    ObjectTuple out;
    for (const auto* a : atoms) out.push_back(atom_object(d.id, a->id));
    return out;
}

std::size_t content_bytes(const RenderedView& v) {
    std::size_t n = 0;
    for (const auto& seg : v.segments) n += seg.content.size();
    return n;
}

}  // namespace

RenderedView redacted_view(const GuardContext& ctx, const SubjectId& s, const AtomicDocument& d) {
    const auto atoms = available_in_order(d);
    bool any = false;
    auto v = render(ctx, s, d, atoms, {{fn::kRead, Invocation{}}}, any);
    record(ctx, s, fn::kRead, objects_of(d, atoms), Invocation{}, any ? Outcome::Allow : Outcome::Deny, content_bytes(v));
    return v;
}

std::vector<std::string> render_lines(const RenderedView& v) {
    std::vector<std::string> out;
    for (const auto& seg : v.segments) {
        switch (seg.kind) {
        case SegmentKind::Content:
            for (auto& l : text::split_lines(seg.content)) out.push_back(std::move(l));
            break;
        case SegmentKind::Redacted: out.emplace_back(kRedactedMarker); break;
        case SegmentKind::BlurredImage: out.emplace_back(kBlurredMarker); break;
        }
    }
    return out;
}

PrintArtifact watermark_print(const GuardContext& ctx, const SubjectId& s, const AtomicDocument& d,
                              std::string_view watermark, std::size_t page_lines) {
    if (page_lines == 0) throw Error(ErrorCode::InvalidOption, "page size must be positive");
    const Invocation inv{{{"watermark", std::string(watermark)}}, {}};
    const auto atoms = available_in_order(d);
    PrintArtifact out;
    if (d.forbidden_functions.contains(std::string(fn::kPrint))) {
        record(ctx, s, fn::kPrint, objects_of(d, atoms), inv, Outcome::Deny, 0, "print is forbidden for " + d.id);
        return out;
    }
    bool any = false;
    const auto v = render(ctx, s, d, atoms, {{fn::kRead, Invocation{}}, {fn::kPrint, inv}}, any);
    if (any) {
        out.outcome = Outcome::Allow;
        const auto lines = render_lines(v);
        std::size_t i = 0;
        do {
            out.text += std::string(watermark) + "\n";
            for (std::size_t k = 0; k < page_lines && i < lines.size(); ++k, ++i) out.text += lines[i] + "\n";
            ++out.pages;
        } while (i < lines.size());
    }
    record(ctx, s, fn::kPrint, objects_of(d, atoms), inv, out.outcome, out.text.size());
    return out;
}

bool is_valid_address(std::string_view a) {
    static const re::Regex addr("[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(\\.[A-Za-z0-9-]+)*");
    return a.size() <= 254 && addr.full_match(a);
}

EmailResult force_cc_email(const GuardContext& ctx, const SubjectId& s, const AtomicDocument& d,
                           const std::vector<std::string>& atom_ids, const std::vector<std::string>& to,
                           const std::vector<std::string>& cc, std::string_view policy_cc,
                           const std::string& outbox_path) {
    std::vector<std::string> full_cc;
    for (const auto& c : cc)
        if (std::find(full_cc.begin(), full_cc.end(), c) == full_cc.end()) full_cc.push_back(c);
    if (std::find(full_cc.begin(), full_cc.end(), policy_cc) == full_cc.end()) full_cc.emplace_back(policy_cc);
    const Invocation inv{{{"to", join_addresses(to)}, {"cc", join_addresses(full_cc)}}, {}};

    ObjectTuple touched;
    for (const auto& id : atom_ids) touched.push_back(atom_object(d.id, id));

    std::string bad;
    if (to.empty()) bad = "no recipients";
    for (const auto& a : to)
        if (!is_valid_address(a)) bad = "bad address '" + a + "'";
    for (const auto& a : full_cc)
        if (!is_valid_address(a)) bad = "bad address '" + a + "'";
    if (!bad.empty()) {
        record(ctx, s, fn::kEmail, touched, inv, Outcome::Deny, 0, bad);
        throw Error(ErrorCode::InvalidAddress, bad);
    }

    EmailResult out;
    const auto avail = available_atoms(d);
    bool ok = !atom_ids.empty() && !d.forbidden_functions.contains(std::string(fn::kEmail));
    std::vector<const Atom*> atoms;
    for (const auto& id : atom_ids) {
        const auto* a = d.find(id);
        if (!ok || !a || !avail.contains(id) ||
            guarded_decide(ctx, s, fn::kEmail, {atom_object(d.id, id)}, inv).outcome != Outcome::Allow) {
            ok = false;
            break;
        }
        atoms.push_back(a);
    }
    if (!ok) {
        record(ctx, s, fn::kEmail, touched, inv, Outcome::Deny, 0);
        return out;
    }
    bool any = false;
    const auto v = render(ctx, s, d, atoms, {{fn::kRead, Invocation{}}}, any);
    const auto lines = render_lines(v);
    OutboxRecord rec{s.name, to, full_cc, lines.empty() ? std::string{} : text::join(lines, "\n") + "\n", now_ms()};
    if (!outbox_path.empty()) {
        std::ofstream f(outbox_path, std::ios::app);
        if (!f) throw Error(ErrorCode::InvalidOption, "cannot open outbox " + outbox_path);
        f << to_json(rec).dump() << "\n";
    }
    out.outcome = Outcome::Allow;
    out.record = std::move(rec);
    record(ctx, s, fn::kEmail, touched, inv, Outcome::Allow, out.record->body.size());
    return out;
}

nlohmann::json to_json(const OutboxRecord& r) {
    return {{"from", r.from}, {"to", r.to}, {"cc", r.cc}, {"body", r.body}, {"timestamp", r.timestamp_ms}};
}

// ── copy ────────────────────────────────────────────────────────────────────

std::string_view function_for(CopyVariant v) {
    switch (v) {
    case CopyVariant::ByteRestricted: return fn::kCopyBytes;
    case CopyVariant::CharacterLimited: return fn::kCopyChars;
    case CopyVariant::SensitiveWordExclusion: return fn::kCopyWords;
    case CopyVariant::WithCitation: return fn::kCopyCite;
    }
    return fn::kCopyBytes;
}

std::string exclude_words(std::string_view s, const std::set<std::string>& blocklist,
                          std::map<std::string, std::size_t>* removed) {
    const auto wanted = lowered(blocklist);
    std::string out;
    scan_words(
        s,
        [&](std::string_view w) {
            const auto low = text::to_lower_ascii(w);
            if (wanted.contains(low)) {
                if (removed) ++(*removed)[low];
            } else {
                out += w;
            }
        },
        [&](std::string_view gap) { out += gap; });
    return out;
}

CopyResult copy(const GuardContext& ctx, const SubjectId& s, const AtomicDocument& src, const CopyRequest& req,
                AtomicDocument& dest) {
    const auto function = function_for(req.variant);
    Invocation inv;
    switch (req.variant) {
    case CopyVariant::ByteRestricted: inv.options.push_back({"max_bytes", std::to_string(req.max_bytes)}); break;
    case CopyVariant::CharacterLimited: inv.options.push_back({"max_chars", std::to_string(req.max_chars)}); break;
    case CopyVariant::SensitiveWordExclusion:
        inv.options.push_back({"blocklist", text::join({req.blocklist.begin(), req.blocklist.end()}, ",")});
        break;
    case CopyVariant::WithCitation: break;
    }

    std::size_t first = src.atoms.size(), last = src.atoms.size();
    for (std::size_t i = 0; i < src.atoms.size(); ++i) {
        if (src.atoms[i].id == req.first_atom) first = i;
        if (src.atoms[i].id == req.last_atom) last = i;
    }
    const auto avail = available_atoms(src);
    std::vector<const Atom*> range;
    if (first < src.atoms.size() && last < src.atoms.size() && first <= last)
        for (std::size_t i = first; i <= last; ++i)
            if (avail.contains(src.atoms[i].id)) range.push_back(&src.atoms[i]);
    const auto touched = objects_of(src, range);
    if (range.empty()) {
        const std::string why = "no available atoms between '" + req.first_atom + "' and '" + req.last_atom + "'";
        record(ctx, s, function, touched, inv, Outcome::Deny, 0, why);
        throw Error(ErrorCode::InvalidRange, why);
    }

    CopyResult out;
    for (const auto* a : range)
        if (guarded_decide(ctx, s, function, {atom_object(src.id, a->id)}, inv).outcome != Outcome::Allow)
            out.denied_atoms.push_back(a->id);
    if (!out.denied_atoms.empty()) {
        record(ctx, s, function, touched, inv, Outcome::Deny, 0);
        return out;
    }

    std::vector<std::string> parts;
    for (const auto* a : range) parts.push_back(a->content);
    std::string payload = text::join(parts, "\n\n");
    switch (req.variant) {
    case CopyVariant::ByteRestricted:
        if (payload.size() > req.max_bytes) {
            payload = std::string(text::truncate_bytes(payload, req.max_bytes));
            out.applied_limits.push_back("truncated to " + std::to_string(payload.size()) + " bytes");
        }
        break;
    case CopyVariant::CharacterLimited:
        if (text::code_point_count(payload) > req.max_chars) {
            payload = std::string(text::truncate_code_points(payload, req.max_chars));
            out.applied_limits.push_back("truncated to " + std::to_string(req.max_chars) + " characters");
        }
        break;
    case CopyVariant::SensitiveWordExclusion: {
        std::map<std::string, std::size_t> removed;
        payload = exclude_words(payload, req.blocklist, &removed);
        for (const auto& [w, n] : removed) out.applied_limits.push_back("excluded '" + w + "' x" + std::to_string(n));
        break;
    }
    case CopyVariant::WithCitation: {
        std::size_t n = 1;
        while (dest.find("quote" + std::to_string(n)) || dest.find("cite" + std::to_string(n))) ++n;
        Citation c{src.id, {}, "quote" + std::to_string(n), "cite" + std::to_string(n)};
        for (const auto* a : range) c.atoms.push_back(a->id);

        Atom cite;
        cite.id = c.citation_atom;
        cite.content = "source: " + src.id + " atoms " + text::join(c.atoms, ",");
        cite.links.push_back({src.id + "/" + range.front()->id, "citation-of", Cascade::None});
        cite.policy[std::string(fn::kRead)][s] = TensorEntry::true_entry();
        Atom quote;
        quote.id = c.quote_atom;
        quote.content = payload;
        quote.links.push_back({cite.id, "quote-of", Cascade::UnavailableOnRemove});
        quote.policy[std::string(fn::kRead)][s] = TensorEntry::true_entry();
        dest.atoms.push_back(std::move(quote));
        dest.atoms.push_back(std::move(cite));
        out.citation = std::move(c);
        break;
    }
    }
    out.outcome = Outcome::Allow;
    out.payload = std::move(payload);
    record(ctx, s, function, touched, inv, Outcome::Allow, out.payload.size());
    return out;
}

// ── composites ──────────────────────────────────────────────────────────────

CompositeResult run_composite(const GuardContext& ctx, const SubjectId& s, std::string_view composite,
                              const AtomicDocument& d, const std::string& atom_id, std::string_view pattern,
                              const SearchOptions& opts) {
    const auto& spec = ctx.catalog.at(composite);
    if (!spec.parts) throw Error(ErrorCode::NotComposable, std::string(composite) + " is not a composite");
    const auto& [outer, inner] = *spec.parts;
    const auto& outer_spec = ctx.catalog.at(outer);
    if (outer_spec.sig.arity != 0 || outer_spec.parts || outer != fn::kGrepStdin)
        throw Error(ErrorCode::NotComposable, outer + " does not read standard input");
    if (inner != fn::kRead && inner != fn::kSearch)
        throw Error(ErrorCode::NotComposable, inner + " has no text output to pipe");

    const auto inv = search_invocation(pattern, opts);
    const ObjectTuple objects{atom_object(d.id, atom_id)};
    CompositeResult out;
    const auto decision = guarded_decide(ctx, s, composite, objects, inv);
    const auto* atom = d.find(atom_id);
    const auto avail = available_atoms(d);
    if (decision.outcome != Outcome::Allow || !atom || !avail.contains(atom_id)) {
        record(ctx, s, composite, objects, inv, Outcome::Deny, 0, decision.detail);
        return out;
    }
    // Inner stages run under the composite's decision; they are not separately granted.
    std::string piped;
    if (inner == fn::kRead) {
        piped = atom->content;
    } else {
        const auto m = compile_search(pattern);
        SearchResult r;
        r.hits = search_lines(m.matcher, atom->id, text::split_lines(atom->content), opts);
        piped = search_text(r);
    }
    const auto m = compile_search(pattern);
    SearchResult final_result;
    final_result.hits = search_lines(m.matcher, "-", text::split_lines(piped), opts);
    out.output = opts.quiet ? (final_result.hits.empty() ? "false\n" : "true\n") : search_text(final_result);
    out.outcome = Outcome::Allow;
    record(ctx, s, composite, objects, inv, Outcome::Allow, out.output.size());
    return out;
}

// ── JSON ────────────────────────────────────────────────────────────────────

nlohmann::json to_json(const SearchResult& r) {
    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : r.hits)
        hits.push_back({{"atom", h.atom_id}, {"line_number", h.line_number}, {"line", h.line}, {"before", h.before},
                        {"after", h.after}});
    return {{"outcome", to_string(r.outcome)}, {"boolean_only", r.boolean_only}, {"matched", r.matched},
            {"hits", hits}};
}

nlohmann::json to_json(const RenderedView& v) {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& seg : v.segments) {
        nlohmann::json j = {{"atom", seg.atom_id}, {"kind", to_string(seg.kind)}};
        if (seg.kind == SegmentKind::Content) j["content"] = seg.content;
        segs.push_back(std::move(j));
    }
    return {{"document", v.document_id}, {"segments", segs}};
}

nlohmann::json to_json(const CopyResult& r) {
    nlohmann::json j = {{"outcome", to_string(r.outcome)}, {"applied_limits", r.applied_limits}};
    if (r.outcome == Outcome::Allow) j["payload"] = r.payload;
    else j["denied_atoms"] = r.denied_atoms;
    if (r.citation)
        j["citation"] = {{"source", r.citation->source_document},
                         {"atoms", r.citation->atoms},
                         {"quote_atom", r.citation->quote_atom},
                         {"citation_atom", r.citation->citation_atom}};
    return j;
}

}  // namespace fbac
