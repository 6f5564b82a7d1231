#pragma once

#include <cstdint>
#include <functional>

namespace arbor {

// ARBOR_RCM_THREADS if set, otherwise hardware concurrency; at least 1.
int default_thread_count();

// Chunked index-range loop. Results must be written to disjoint slots or
// merged per chunk in index order so the outcome is independent of the
// thread schedule.
void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t, std::int64_t)>& body);

} // namespace arbor
