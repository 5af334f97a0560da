#pragma once

#include "fbac/adoc.hpp"
#include "fbac/audit.hpp"
#include "fbac/guarded.hpp"
#include "fbac/projections.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

namespace fbac {

enum class Role { Author, CoAuthor, Viewer, Admin };

std::string_view to_string(Role r);
/// author, coauthor (or co-author), viewer, admin; case-insensitive.
Role parse_role(std::string_view s);

struct Principal {
    SubjectId subject;
    Role role = Role::Viewer;
    std::string token;
};

/// Static token file: `<token> <subject> <role>` per line, '#' comments.
class IdentityStore {
public:
    /// Throws DuplicateIdentifier when the token is already mapped.
    void add(std::string token, SubjectId subject, Role role);
    /// Throws Unauthenticated.
    const Principal& authenticate(std::string_view token) const;
    std::vector<Principal> principals() const;

    static IdentityStore parse(std::string_view file_text, std::string_view source = "<identities>");

private:
    std::map<std::string, Principal, std::less<>> by_token_;
};

// ── Authoring defaults ──────────────────────────────────────────────────────

struct QuestionnaireAnswers {
    bool printable = true;
    bool copyable = true;
    bool emailable = true;
    std::size_t default_search_context = 5;
    std::optional<std::string> watermark;
};

/// Policy edits for one document: extra forbidden functions and per-atom entries.
struct PolicyBatch {
    std::set<std::string> forbidden;
    std::map<std::string, AtomPolicy> atoms;
};

/// Search predicate bounding the context option to at most `max_context`.
Predicate context_limit_predicate(std::size_t max_context);

/// Throws InconsistentDefaults when the result would violate the forbidden-function condition.
PolicyBatch defaults_from_questionnaire(const QuestionnaireAnswers& q, const AtomicDocument& d, const SubjectId& author);

/// Entries in the batch overwrite the document's; forbidden sets are merged.
AtomicDocument apply_batch(const AtomicDocument& d, const PolicyBatch& batch);

struct CoauthorTemplate {
    std::set<std::string> global_removals;
    std::map<SubjectId, std::set<std::string>> overrides;
};

/// Co-author gets the author's entries minus `removals`. Throws NotASubset.
PolicyBatch derive_coauthor_policy(const AtomicDocument& d, const SubjectId& author, const SubjectId& coauthor,
                                   const std::set<std::string>& removals);
PolicyBatch derive_coauthor_policy(const AtomicDocument& d, const SubjectId& author, const SubjectId& coauthor,
                                   const CoauthorTemplate& tmpl);

/// Subjects allowed `function` on `object` who also ran it successfully on that object.
std::set<SubjectId> narrow_suspects(const AccessTensor& t, const AuditLog& audit, std::string_view function,
                                    const ObjectRef& object);

// ── The reference monitor ───────────────────────────────────────────────────

struct InvokeRequest {
    std::string function;
    std::vector<std::string> args;
    std::vector<Option> options;
    std::string stdin_bytes;
};

struct InvokeResponse {
    Outcome outcome = Outcome::Deny;
    nlohmann::json result;  // empty object on Deny
};

struct MonitorConfig {
    std::string policy_cc = "supervisor@localhost";
    std::string outbox_path;
    std::size_t page_lines = kDefaultPageLines;
};

class Monitor {
public:
    explicit Monitor(MonitorConfig config = {});

    void set_identities(IdentityStore ids);
    const IdentityStore& identities() const { return identities_; }
    Principal authenticate(std::string_view token) const;

    /// Merge an act_core policy file into the snapshot.
    void load_policy(std::string_view policy_text, std::string_view source = "<policy>");
    /// Compile a lattice policy into the snapshot.
    void load_lattice(std::string_view lattice_text, std::string_view source = "<lattice>");
    /// Adds or replaces a document and installs its atom policies.
    void put_document(AtomicDocument d);
    /// identities.txt, *.adoc, *.policy, *.lattice (in that order).
    void load_directory(const std::filesystem::path& dir);

    std::shared_ptr<const AccessTensor> snapshot() const;
    std::shared_ptr<const AtomicDocument> document(std::string_view id) const;
    std::vector<std::string> document_ids() const;
    std::shared_ptr<const FunctionCatalog> catalog() const;

    /// Registers f∘g; grants must be entered separately.
    FunctionSig compose(std::string_view f, std::string_view g);

    /// The only way to run a guarded function. Exactly one audit record per call.
    InvokeResponse invoke(const Principal& p, const InvokeRequest& req);

    std::vector<AuditRecord> audit_query(const AuditFilter& filter = {}) const { return audit_.query(filter); }
    const AuditLog& audit() const { return audit_; }

    /// Function list of the catalog for one atom. Throws UnknownDocument.
    FunctionList atom_functions(const Principal& p, std::string_view doc_id, std::string_view atom_id) const;

    /// kind: authz|cap|acm|flist|slist|olist. Non-admins may only ask about themselves.
    nlohmann::json projection(const Principal& p, std::string_view kind,
                              const std::map<std::string, std::string>& params) const;

private:
    void install(std::shared_ptr<const AccessTensor> t,
                 std::map<std::string, std::shared_ptr<const AtomicDocument>, std::less<>> docs);
    void put_document_locked(AtomicDocument d);

    MonitorConfig config_;
    IdentityStore identities_;
    std::shared_ptr<const FunctionCatalog> catalog_;
    AuditLog audit_;
    PredicateRegistry programs_;

    mutable std::shared_mutex mu_;
    std::shared_ptr<const AccessTensor> snapshot_;
    std::map<std::string, std::shared_ptr<const AtomicDocument>, std::less<>> documents_;
    std::mutex writer_;  // one writer at a time (policy loads, copies into documents)
};

}  // namespace fbac
