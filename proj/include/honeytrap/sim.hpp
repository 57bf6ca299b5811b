#pragma once

#include "honeytrap/config.hpp"
#include "honeytrap/detector.hpp"
#include "honeytrap/learner.hpp"
#include "honeytrap/report.hpp"
#include "honeytrap/world.hpp"

#include <functional>
#include <map>
#include <vector>

namespace honeytrap {

struct RunResult {
    /// World as built, before any honeypot redesign or visit.
    WorldState world;
    std::vector<CheckInEvent> events;
    std::map<UserId, SuspicionRecord> records;
    std::vector<HoneypotRevision> revisions;
    RunReport report;
};

/// One complete, single-threaded run. Deterministic in the config (seed included).
RunResult run(const SimConfig& config);

/// Runs every config; the i-th report belongs to the i-th config regardless of parallelism.
std::vector<RunReport> run_batch(const std::vector<SimConfig>& configs, unsigned parallelism = 1);

/// Calls fn(i) for i in [0, n) on up to parallelism threads. The first exception, by
/// index, is rethrown after every call has finished.
void parallel_for_each(std::size_t n, unsigned parallelism, const std::function<void(std::size_t)>& fn);

/// Copies of base with seeds replaced by the given list.
std::vector<SimConfig> with_seeds(const SimConfig& base, const std::vector<std::uint64_t>& seeds);

/// Report metrics from a finished run (used by run(); exposed for replays).
RunReport build_report(const SimConfig& config, const WorldState& world, std::span<const CheckInEvent> events,
                       const std::map<UserId, SuspicionRecord>& records, std::vector<FitRecord> trajectory,
                       std::optional<std::uint64_t> adaptive_budget);

} // namespace honeytrap
