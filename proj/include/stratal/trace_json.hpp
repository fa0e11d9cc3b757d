#ifndef STRATAL_TRACE_JSON_HPP
#define STRATAL_TRACE_JSON_HPP

#include <ostream>

#include <json.hpp>

#include "stratal/run.hpp"

namespace stratal {

// One JSON-lines record per trace event. Replaying the same file with the
// same seed reproduces byte-identical output.
inline nlohmann::json trace_record_json(const TraceRecord& rec) {
    nlohmann::json j;
    j["step"] = rec.step;
    j["instant"] = rec.instant;
    j["thread"] = rec.thread_id;
    j["rule"] = rec.rule;
    j["redex"] = rec.redex;
    if (rec.delta_region)
        j["store_delta"] = {{"region", rec.delta_region->str()}, {"added", *rec.delta_value}};
    else
        j["store_delta"] = nullptr;
    j["state"] = rec.state_hash;
    return j;
}

inline void write_trace(std::ostream& out, const std::vector<TraceRecord>& trace) {
    for (const auto& rec : trace) out << trace_record_json(rec).dump() << "\n";
}

} // namespace stratal

#endif // STRATAL_TRACE_JSON_HPP
