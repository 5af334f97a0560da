#pragma once

#include "fbac/adoc.hpp"
#include "fbac/audit.hpp"
#include "fbac/tensor.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fbac {

// Function names of the guarded catalog.
namespace fn {
inline constexpr std::string_view kRead = "read";
inline constexpr std::string_view kSearch = "search";
inline constexpr std::string_view kGrepStdin = "grep_in_standard";
inline constexpr std::string_view kPrint = "print";
inline constexpr std::string_view kEmail = "email";
inline constexpr std::string_view kCopyBytes = "copy_byte_restricted";
inline constexpr std::string_view kCopyChars = "copy_character_limited";
inline constexpr std::string_view kCopyWords = "copy_sensitive_word_exclusion";
inline constexpr std::string_view kCopyCite = "copy_with_citation";
}  // namespace fn

inline constexpr std::string_view kRedactedMarker = "[REDACTED]";
inline constexpr std::string_view kBlurredMarker = "[BLURRED IMAGE]";
inline constexpr std::size_t kDefaultPageLines = 60;

enum class OptionType { Integer, Flag, Text, WordList };

struct OptionSpec {
    std::string key;
    OptionType type = OptionType::Text;
    std::string default_value;
};

struct GuardedFunctionSpec {
    FunctionSig sig;
    std::vector<OptionSpec> options;
    std::string output;  // what the function may emit
    /// Set for f∘g composites.
    std::optional<std::pair<std::string, std::string>> parts;
};

class FunctionCatalog {
public:
    /// The built-in catalog.
    static FunctionCatalog standard();

    void add(GuardedFunctionSpec spec);
    const GuardedFunctionSpec* find(std::string_view name) const;
    const GuardedFunctionSpec& at(std::string_view name) const;
    std::set<std::string> names() const;
    const std::map<std::string, GuardedFunctionSpec, std::less<>>& specs() const { return specs_; }

    /// Registers every function of the catalog in `t` (skips ones already present).
    void register_in(AccessTensor& t) const;

private:
    std::map<std::string, GuardedFunctionSpec, std::less<>> specs_;
};

/// Registers "f∘g" with g's arity in the catalog and, when given, in the tensor.
/// The composite starts with no grants. Throws UnknownFunction / DuplicateComposite.
/// Whether it can run is checked by run_composite (NotComposable).
FunctionSig compose(FunctionCatalog& catalog, std::string_view f, std::string_view g, AccessTensor* t = nullptr);

/// What every guarded function needs: a policy snapshot, predicate programs, the audit sink.
struct GuardContext {
    const AccessTensor& tensor;
    const FunctionCatalog& catalog;
    AuditLog& audit;
    const PredicateRegistry& programs = builtin_predicates();
};

/// decide(), except unknown subjects/functions/objects read as a uniform Deny.
Decision guarded_decide(const GuardContext& ctx, const SubjectId& s, std::string_view function,
                        const ObjectTuple& objects, const Invocation& inv);

// ── search ──────────────────────────────────────────────────────────────────

struct SearchOptions {
    std::size_t context = 0;
    bool quiet = false;
    std::set<std::string> hide_words;
};

/// Options as decide sees them: context=N;pattern=P[;quiet][;hide=w1,w2].
Invocation search_invocation(std::string_view pattern, const SearchOptions& opts, std::string stdin_bytes = {});

struct SearchHit {
    std::string atom_id;
    std::size_t line_number = 0;  // 1-based within the atom
    std::string line;
    std::vector<std::string> before;
    std::vector<std::string> after;

    bool operator==(const SearchHit&) const = default;
};

struct SearchResult {
    Outcome outcome = Outcome::Deny;
    bool boolean_only = false;
    bool matched = false;
    std::vector<SearchHit> hits;
    std::vector<std::string> searched_atoms;
};

/// Searches the available text atoms the subject may search. Throws InvalidPattern.
SearchResult search(const GuardContext& ctx, const SubjectId& s, const AtomicDocument& d, std::string_view pattern,
                    const SearchOptions& opts);

/// grep over standard input; decided on the arity-0 grep_in_standard with stdin in the invocation.
SearchResult search_standard(const GuardContext& ctx, const SubjectId& s, std::string_view stdin_bytes,
                             std::string_view pattern, const SearchOptions& opts);

/// Whole-word, ASCII case-insensitive replacement by the redaction marker.
std::string hide_words(std::string_view line, const std::set<std::string>& words);

// ── view / print / email ────────────────────────────────────────────────────

enum class SegmentKind { Content, Redacted, BlurredImage };
std::string_view to_string(SegmentKind k);

struct Segment {
    std::string atom_id;
    SegmentKind kind = SegmentKind::Redacted;
    std::string content;

    bool operator==(const Segment&) const = default;
};

struct RenderedView {
    std::string document_id;
    std::vector<Segment> segments;
};

/// Unavailable atoms are left out; denied atoms become markers.
RenderedView redacted_view(const GuardContext& ctx, const SubjectId& s, const AtomicDocument& d);

/// One line per content line, one marker line per denied atom.
std::vector<std::string> render_lines(const RenderedView& v);

struct PrintArtifact {
    Outcome outcome = Outcome::Deny;
    std::string text;
    std::size_t pages = 0;
};

PrintArtifact watermark_print(const GuardContext& ctx, const SubjectId& s, const AtomicDocument& d,
                              std::string_view watermark, std::size_t page_lines = kDefaultPageLines);

struct OutboxRecord {
    std::string from;
    std::vector<std::string> to;
    std::vector<std::string> cc;
    std::string body;
    std::int64_t timestamp_ms = 0;
};

struct EmailResult {
    Outcome outcome = Outcome::Deny;
    std::optional<OutboxRecord> record;
};

bool is_valid_address(std::string_view address);

/// The policy CC is always added. Appends to `outbox_path` (JSON Lines) when non-empty.
EmailResult force_cc_email(const GuardContext& ctx, const SubjectId& s, const AtomicDocument& d,
                           const std::vector<std::string>& atom_ids, const std::vector<std::string>& to,
                           const std::vector<std::string>& cc, std::string_view policy_cc,
                           const std::string& outbox_path = {});

nlohmann::json to_json(const OutboxRecord& r);

// ── copy ────────────────────────────────────────────────────────────────────

enum class CopyVariant { ByteRestricted, CharacterLimited, SensitiveWordExclusion, WithCitation };

struct CopyRequest {
    CopyVariant variant = CopyVariant::ByteRestricted;
    std::string first_atom;
    std::string last_atom;  // inclusive, in document order
    std::size_t max_bytes = 0;
    std::size_t max_chars = 0;
    std::set<std::string> blocklist;
};

struct Citation {
    std::string source_document;
    std::vector<std::string> atoms;
    std::string quote_atom;
    std::string citation_atom;
};

struct CopyResult {
    Outcome outcome = Outcome::Deny;
    std::string payload;
    std::optional<Citation> citation;
    std::vector<std::string> applied_limits;
    std::vector<std::string> denied_atoms;
};

std::string_view function_for(CopyVariant v);

/// Removes blocklisted whole words (ASCII case-insensitive); counts land in `removed`.
std::string exclude_words(std::string_view text, const std::set<std::string>& blocklist,
                          std::map<std::string, std::size_t>* removed = nullptr);

/// All-or-nothing across the range. With a citation, `dest` gains a quote atom and a citation atom.
/// Throws InvalidRange.
CopyResult copy(const GuardContext& ctx, const SubjectId& s, const AtomicDocument& src, const CopyRequest& req,
                AtomicDocument& dest);

// ── composites ──────────────────────────────────────────────────────────────

struct CompositeResult {
    Outcome outcome = Outcome::Deny;
    std::string output;
};

/// Runs f∘g: g's text output becomes f's standard input. Decided on the composite name only.
CompositeResult run_composite(const GuardContext& ctx, const SubjectId& s, std::string_view composite,
                              const AtomicDocument& d, const std::string& atom_id, std::string_view pattern,
                              const SearchOptions& opts);

nlohmann::json to_json(const SearchResult& r);
nlohmann::json to_json(const RenderedView& v);
nlohmann::json to_json(const CopyResult& r);

}  // namespace fbac
