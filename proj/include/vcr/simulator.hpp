#pragma once

// Event-driven Monte Carlo of n replicated groups: vehicles leave after an
// exponential sojourn, a lone survivor recruits a replacement, and losing a
// lone survivor fails the application.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vcr/dsmp.hpp"
#include "vcr/recruitment.hpp"
#include "vcr/rng.hpp"
#include "vcr/stats.hpp"
#include "vcr/units.hpp"

namespace vcr {

struct SimConfig {
    int n = 1;
    Rate lambda_z{1.0};
    RecruitmentLaw recruitment;
    std::uint64_t trials = 1;
    std::uint64_t master_seed = 0;
    Hours max_time{1e4};
    unsigned threads = 1;  // 0 = hardware concurrency

    void validate() const;  // throws ModelError
};

enum class SimEventKind { Start, Departure, Completion, Failure, Truncated };
std::string to_string(SimEventKind k);

struct TraceEvent {
    double time = 0;
    SimEventKind kind = SimEventKind::Start;
    StateLabel state;            // after the event; the state failed from, for Failure
    int group = -1;              // group touched by the event
    std::uint64_t vehicle = 0;   // departing vehicle, or the vehicle that joined
    int order = 0;               // completion: rank among active recruiters by start time
};

struct SimOutcome {
    double ttf = 0;
    bool truncated = false;
    std::vector<TraceEvent> trace;  // filled only when requested
};

// One trajectory. Each event is also passed to `observe` when set.
SimOutcome simulate_ttf(const SimConfig& cfg, Stream& rng, bool record_trace = false,
                        const std::function<void(const TraceEvent&)>& observe = {});

// The stream used for trial t; exposed so a single trial can be replayed.
inline Stream trial_stream(const SimConfig& cfg, std::uint64_t trial) {
    return Stream(cfg.master_seed, trial, StreamDomain::Trial);
}

struct Smttf {
    double mean = 0;
    double se = 0;  // standard error
    std::uint64_t trials = 0;
    std::uint64_t truncated = 0;
};

// Trials run in fixed blocks merged in block order, so the result is
// bit-identical for any thread count.
Smttf smttf(const SimConfig& cfg);

struct StateStats {
    std::uint64_t visits = 0;
    Accumulator dwell;
    std::uint64_t up = 0;          // paired departure
    std::vector<std::uint64_t> down;  // down[k-1]: completion of order k
    std::uint64_t fail = 0;
    std::uint64_t censored = 0;    // still in the state at max_time

    [[nodiscard]] double frequency(std::uint64_t count) const;
    [[nodiscard]] double frequency_se(std::uint64_t count) const;
};

std::map<StateLabel, StateStats> empirical_state_stats(const SimConfig& cfg);

// Trace rows (trial,time,event,i,j) for the first `trials` trials.
void write_trace_csv(const SimConfig& cfg, std::uint64_t trials, std::ostream& out);

}  // namespace vcr
