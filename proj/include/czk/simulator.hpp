#ifndef CZK_SIMULATOR_HPP_
#define CZK_SIMULATOR_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "czk/scheduler.hpp"

namespace czk {

struct RewindInterval {
    int lo = 0, hi = 0;  // slot range, inclusive
    int mid = 0;         // last slot of the first half

    int size() const { return hi - lo + 1; }
    bool dominates(const RewindInterval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool operator==(const RewindInterval& o) const { return lo == o.lo && hi == o.hi; }
};

// Fixed recursive rewinding order over the slot range. Every non-singleton
// half at every recursion level is executed twice with a rewind between the
// runs; the whole range itself is never rewound.
struct RewindPlan {
    int num_slots = 0;
    std::vector<int> trace;                  // slot execution order
    std::vector<RewindInterval> rewinds;     // chronological rewind events
    std::vector<RewindInterval> intervals;   // distinct rewound intervals
    bool is_plan_interval(const RewindInterval& iv) const;
};

RewindPlan rewind_plan(int num_slots);

// Total slot executions of rewind_plan(n), by the recurrence; n^2/2 for
// powers of two and at most n^2 always.
std::uint64_t round_budget(int num_slots);

struct FailureReport {
    int session_id = 0;
    int slot = 0;
    int completed_preambles = 0;
    int solve_table_size = 0;
    std::string to_json() const;
};

struct SimStats {
    std::uint64_t slot_executions = 0;
    int realized_slots = 0;
    int sessions_solved = 0;
    int sessions_aborted = 0;
    int sessions_accepted = 0;
    std::map<int, int> preamble_completions;  // across all runs, per session
    int max_preamble_completions = 0;
    int stale_solve_anomalies = 0;
};

struct InstrumentRecord {
    int slot = 0;
    std::uint64_t execution_index = 0;
    int run = 0;  // 0 top, 1 first, 2 second
    RewindInterval interval;
    std::string to_json() const;
};

// One may-solve-shaped observation of a rewound interval, used by the
// solve-probability analysis.
struct IntervalObservation {
    RewindInterval interval;
    int session_id = 0;
    bool first_interesting = false;
    bool first_revealed = false;  // reveal at the later in-interval round verified
    bool second_interesting = false;
    bool second_revealed = false;
    bool solved_after = false;  // solved or aborted once the second run finished
};

struct SimOptions {
    bool use_replay_path = false;  // rebuild the black box by replay instead of copying
    bool collect_trace = false;
    bool collect_observations = false;
};

struct SimResult {
    std::optional<Transcript> transcript;
    std::optional<FailureReport> failure;
    SimStats stats;
    std::vector<InstrumentRecord> trace;
    std::vector<IntervalObservation> observations;

    bool ok() const { return transcript.has_value(); }
};

// Runs the rewinding simulator against the black box. No witness for the
// base graph is given; sessions must be solved from learned values or end
// aborted. A session reaching the body unsolved yields a FailureReport.
SimResult simulate(const VerifierBlackBox& blackbox, const SessionSetup& setup,
                   const Graph& base_graph, std::uint64_t seed,
                   const SimOptions& opts = {});

}  // namespace czk

#endif  // CZK_SIMULATOR_HPP_
