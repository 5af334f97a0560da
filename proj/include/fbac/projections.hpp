#pragma once

#include "fbac/tensor.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fbac {

// Views of the tensor with one or two coordinates fixed. Every view is computed
// on demand from a tensor snapshot. "Compressed" views omit NotApplicable cells
// and nothing else; all-False rows stay.

struct ProjectionLimits {
    /// Refuse (EnumerationTooLarge) to enumerate more object tuples than this.
    std::size_t max_tuples = 1'000'000;
};

/// Fixed object tuple: subjects x functions.
struct AuthorizationMatrix {
    ObjectTuple object;
    bool compressed = false;
    std::vector<SubjectId> rows;
    std::vector<std::string> cols;
    std::map<std::pair<SubjectId, std::string>, TensorEntry> cells;

    const TensorEntry* cell(const SubjectId& s, const std::string& f) const;
};

/// Fixed subject: functions x object tuples.
struct CapabilityMatrix {
    SubjectId subject;
    bool compressed = false;
    std::vector<std::string> rows;
    std::vector<ObjectTuple> cols;
    std::map<std::pair<std::string, ObjectTuple>, TensorEntry> cells;

    const TensorEntry* cell(const std::string& f, const ObjectTuple& o) const;
};

/// Fixed function: subjects x object tuples (the classical access control matrix).
struct PerFunctionACM {
    FunctionSig function;
    bool compressed = false;
    std::vector<SubjectId> rows;
    std::vector<ObjectTuple> cols;
    std::map<std::pair<SubjectId, ObjectTuple>, TensorEntry> cells;

    const TensorEntry* cell(const SubjectId& s, const ObjectTuple& o) const;
};

struct FunctionList {
    SubjectId subject;
    ObjectTuple object;
    std::map<std::string, TensorEntry> entries;
};

struct SubjectList {
    std::string function;
    ObjectTuple object;
    std::optional<std::set<SubjectId>> restriction;
    std::map<SubjectId, TensorEntry> entries;
};

struct ObjectList {
    SubjectId subject;
    std::string function;
    std::optional<std::set<ObjectTuple>> restriction;
    std::map<ObjectTuple, TensorEntry> entries;
};

AuthorizationMatrix authorization_matrix(const AccessTensor& t, const ObjectTuple& object, bool compress);

CapabilityMatrix capability_matrix(const AccessTensor& t, const SubjectId& subject, bool compress,
                                   const ProjectionLimits& limits = {});

PerFunctionACM per_function_acm(const AccessTensor& t, std::string_view function, bool compress,
                                const ProjectionLimits& limits = {});

FunctionList function_list(const AccessTensor& t, const SubjectId& subject, const ObjectTuple& object);

/// Restricted to the functions offered by one application; `app` must be registered.
FunctionList application_restricted_function_list(const AccessTensor& t, const std::set<std::string>& app,
                                                  const SubjectId& subject, const ObjectTuple& object);

/// Throws MeaninglessPair when the tuple length differs from the function's arity.
SubjectList subject_list(const AccessTensor& t, std::string_view function, const ObjectTuple& object,
                         const std::optional<std::set<SubjectId>>& restriction = std::nullopt);

/// Tuples of the wrong length inside `restriction` are skipped.
ObjectList object_list(const AccessTensor& t, const SubjectId& subject, std::string_view function,
                       const std::optional<std::set<ObjectTuple>>& restriction = std::nullopt,
                       const ProjectionLimits& limits = {});

/// All registered tuples of length `arity` whose every element starts with `prefix`.
std::set<ObjectTuple> tuples_under_prefix(const AccessTensor& t, std::size_t arity, std::string_view prefix,
                                          const ProjectionLimits& limits = {});

/// Registered-object tuples of exactly `length`, lexicographic.
std::vector<ObjectTuple> enumerate_tuples(const AccessTensor& t, std::size_t length, const ProjectionLimits& limits = {});

// ── Reports ─────────────────────────────────────────────────────────────────

nlohmann::json to_json(const AuthorizationMatrix& m);
nlohmann::json to_json(const CapabilityMatrix& m);
nlohmann::json to_json(const PerFunctionACM& m);
nlohmann::json to_json(const FunctionList& l);
nlohmann::json to_json(const SubjectList& l);
nlohmann::json to_json(const ObjectList& l);

std::string to_text(const AuthorizationMatrix& m);
std::string to_text(const CapabilityMatrix& m);
std::string to_text(const PerFunctionACM& m);
std::string to_text(const FunctionList& l);
std::string to_text(const SubjectList& l);
std::string to_text(const ObjectList& l);

struct ProjectionReport {
    nlohmann::json json;
    std::string text;
};

/// One projection by name: authz|cap|acm|flist|slist|olist.
/// Parameters: object, subject, function, app (comma list), prefix, compress (default true).
ProjectionReport run_projection(const AccessTensor& t, std::string_view kind,
                                const std::map<std::string, std::string>& params);

}  // namespace fbac
