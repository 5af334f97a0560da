#include "fbac/audit.hpp"

#include "fbac/text.hpp"

#include <algorithm>
#include <chrono>

namespace fbac {

AuditRecord AuditLog::append(AuditRecord record) {
    const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    std::lock_guard lock(mu_);
    record.sequence = records_.size() + 1;
    record.timestamp_ms = now;
    records_.push_back(record);
    return record;
}

std::vector<AuditRecord> AuditLog::query(const AuditFilter& f) const {
    std::lock_guard lock(mu_);
    std::vector<AuditRecord> out;
    for (const auto& r : records_) {
        if (f.subject && r.subject != *f.subject) continue;
        if (f.function && r.function != *f.function) continue;
        if (f.object && std::find(r.objects.begin(), r.objects.end(), *f.object) == r.objects.end()) continue;
        if (f.outcome && r.outcome != *f.outcome) continue;
        if (f.from_ms && r.timestamp_ms < *f.from_ms) continue;
        if (f.to_ms && r.timestamp_ms > *f.to_ms) continue;
        out.push_back(r);
    }
    return out;
}

std::size_t AuditLog::size() const {
    std::lock_guard lock(mu_);
    return records_.size();
}

std::string options_digest(const Invocation& inv) { return text::hex64(text::fnv1a(canonical_serialize(inv))); }

nlohmann::json to_json(const AuditRecord& r) {
    nlohmann::json objects = nlohmann::json::array();
    for (const auto& o : r.objects) objects.push_back(o.uri);
    nlohmann::json j = {{"sequence", r.sequence},       {"timestamp_ms", r.timestamp_ms},
                        {"subject", r.subject.name},    {"function", r.function},
                        {"objects", objects},           {"options_digest", r.options_digest},
                        {"outcome", to_string(r.outcome)}, {"output_bytes", r.output_bytes}};
    if (!r.detail.empty()) j["detail"] = r.detail;
    return j;
}

}  // namespace fbac
