#pragma once

#include "fbac/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace fbac {

struct AuditRecord {
    std::uint64_t sequence = 0;
    std::int64_t timestamp_ms = 0;
    SubjectId subject;
    std::string function;
    ObjectTuple objects;
    std::string options_digest;  // hex FNV-1a of the canonical invocation
    Outcome outcome = Outcome::Deny;
    std::size_t output_bytes = 0;
    std::string detail;
};

struct AuditFilter {
    std::optional<SubjectId> subject;
    std::optional<std::string> function;
    /// Matches records whose tuple contains this object.
    std::optional<ObjectRef> object;
    std::optional<Outcome> outcome;
    std::optional<std::int64_t> from_ms;
    std::optional<std::int64_t> to_ms;  // inclusive
};

/// Append-only, sequence numbers start at 1 with no gaps. Safe for concurrent appends.
class AuditLog {
public:
    /// Fills in sequence and timestamp; returns the stored copy.
    AuditRecord append(AuditRecord record);

    std::vector<AuditRecord> query(const AuditFilter& filter = {}) const;
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    std::vector<AuditRecord> records_;
};

std::string options_digest(const Invocation& inv);

nlohmann::json to_json(const AuditRecord& r);

}  // namespace fbac
