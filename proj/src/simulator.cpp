#include "vcr/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <queue>
#include <thread>

#include "vcr/csv.hpp"
#include "vcr/errors.hpp"

namespace vcr {

void SimConfig::validate() const {
    if (n < 1) throw ModelError("n must be at least 1");
    if (!(lambda_z.value() > 0) || !std::isfinite(lambda_z.value()))
        throw ModelError("lambda_z must be a positive finite rate");
    if (trials < 1) throw ModelError("trials must be at least 1");
    if (!(max_time.value() > 0)) throw ModelError("max_time must be positive");
}

std::string to_string(SimEventKind k) {
    switch (k) {
        case SimEventKind::Start: return "start";
        case SimEventKind::Departure: return "departure";
        case SimEventKind::Completion: return "completion";
        case SimEventKind::Failure: return "failure";
        case SimEventKind::Truncated: return "truncated";
    }
    return "?";
}

namespace {

// Reusable buffers for one trajectory at a time.
class TrialRunner {
public:
    explicit TrialRunner(const SimConfig& cfg) : cfg_(cfg) {}

    template <class Visit>
    SimOutcome run(Stream& rng, bool record, Visit&& visit) {
        reset();
        SimOutcome out;
        const double lz = cfg_.lambda_z.value();
        StateLabel state{0, 0};
        auto emit = [&](TraceEvent e) {
            visit(e);
            if (record) out.trace.push_back(e);
        };
        for (int v = 0; v < 2 * cfg_.n; ++v) add_vehicle(v / 2, rng.exponential(lz));
        emit({0.0, SimEventKind::Start, state, -1, 0, 0});

        while (!queue_.empty()) {
            const Ev ev = queue_.top();
            queue_.pop();
            if (ev.t > cfg_.max_time.value()) break;

            if (ev.kind == kDeparture) {
                const auto v = ev.ref;
                const int g = vehicle_group_[v];
                auto& mem = members_[static_cast<std::size_t>(g)];
                if (recruiter_of_[static_cast<std::size_t>(g)] >= 0) {
                    out.ttf = ev.t;
                    emit({ev.t, SimEventKind::Failure, state, g, v, 0});
                    return out;
                }
                mem.erase(std::find(mem.begin(), mem.end(), v));
                const int rid = static_cast<int>(rec_group_.size());
                rec_group_.push_back(g);
                recruiter_of_[static_cast<std::size_t>(g)] = rid;
                active_.push_back(rid);
                const double u = cfg_.recruitment.sample(rng);
                if (std::isfinite(u)) push(ev.t + u, kCompletion, static_cast<std::uint64_t>(rid));
                state = {state.i + 1, 0};
                emit({ev.t, SimEventKind::Departure, state, g, v, 0});
            } else {
                const int rid = static_cast<int>(ev.ref);
                const auto pos = std::find(active_.begin(), active_.end(), rid);
                const int k = static_cast<int>(pos - active_.begin()) + 1;
                active_.erase(pos);
                const int g = rec_group_[static_cast<std::size_t>(rid)];
                recruiter_of_[static_cast<std::size_t>(g)] = -1;
                const auto v = add_vehicle(g, ev.t + rng.exponential(lz));
                state = {state.i - 1, k};
                emit({ev.t, SimEventKind::Completion, state, g, v, k});
            }
        }
        out.ttf = cfg_.max_time.value();
        out.truncated = true;
        emit({out.ttf, SimEventKind::Truncated, state, -1, 0, 0});
        return out;
    }

private:
    static constexpr int kDeparture = 0, kCompletion = 1;
    struct Ev {
        double t;
        int kind;
        std::uint64_t seq;
        std::uint64_t ref;
        // Earliest first; departures before completions on ties, then FIFO.
        bool operator>(const Ev& o) const {
            if (t != o.t) return t > o.t;
            if (kind != o.kind) return kind > o.kind;
            return seq > o.seq;
        }
    };

    void reset() {
        queue_ = {};
        seq_ = 0;
        vehicle_group_.clear();
        members_.assign(static_cast<std::size_t>(cfg_.n), {});
        recruiter_of_.assign(static_cast<std::size_t>(cfg_.n), -1);
        rec_group_.clear();
        active_.clear();
    }

    std::uint64_t add_vehicle(int g, double leaves) {
        const auto id = static_cast<std::uint64_t>(vehicle_group_.size());
        vehicle_group_.push_back(g);
        members_[static_cast<std::size_t>(g)].push_back(id);
        push(leaves, kDeparture, id);
        return id;
    }

    void push(double t, int kind, std::uint64_t ref) { queue_.push({t, kind, seq_++, ref}); }

    const SimConfig& cfg_;
    std::priority_queue<Ev, std::vector<Ev>, std::greater<>> queue_;
    std::uint64_t seq_ = 0;
    std::vector<int> vehicle_group_;
    std::vector<std::vector<std::uint64_t>> members_;
    std::vector<int> recruiter_of_;
    std::vector<int> rec_group_;
    std::vector<int> active_;  // recruiter ids in start order
};

constexpr std::uint64_t kBlock = 4096;

// Runs `body(block, first_trial, end_trial)` for every block on the
// configured number of threads.
template <class Body>
void for_blocks(const SimConfig& cfg, std::uint64_t blocks, Body&& body) {
    unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                        : cfg.threads;
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, blocks));
    std::atomic<std::uint64_t> next{0};
    auto work = [&] {
        for (std::uint64_t b; (b = next.fetch_add(1)) < blocks;)
            body(b, b * kBlock, std::min(cfg.trials, (b + 1) * kBlock));
    };
    if (threads <= 1) {
        work();
        return;
    }
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
}

}  // namespace

SimOutcome simulate_ttf(const SimConfig& cfg, Stream& rng, bool record_trace,
                        const std::function<void(const TraceEvent&)>& observe) {
    cfg.validate();
    TrialRunner runner(cfg);
    return runner.run(rng, record_trace, [&](const TraceEvent& e) {
        if (observe) observe(e);
    });
}

Smttf smttf(const SimConfig& cfg) {
    cfg.validate();
    const std::uint64_t blocks = (cfg.trials + kBlock - 1) / kBlock;
    std::vector<Accumulator> acc(blocks);
    std::vector<std::uint64_t> cut(blocks, 0);
    for_blocks(cfg, blocks, [&](std::uint64_t b, std::uint64_t lo, std::uint64_t hi) {
        TrialRunner runner(cfg);
        for (std::uint64_t t = lo; t < hi; ++t) {
            Stream rng = trial_stream(cfg, t);
            auto o = runner.run(rng, false, [](const TraceEvent&) {});
            acc[b].add(o.ttf);
            cut[b] += o.truncated ? 1 : 0;
        }
    });
    Accumulator all;
    Smttf out;
    for (std::uint64_t b = 0; b < blocks; ++b) {
        all.merge(acc[b]);
        out.truncated += cut[b];
    }
    out.mean = all.mean();
    out.se = all.stderr_of_mean();
    out.trials = all.count();
    return out;
}

double StateStats::frequency(std::uint64_t count) const {
    const auto exits = visits - censored;
    return exits == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(exits);
}

double StateStats::frequency_se(std::uint64_t count) const {
    const auto exits = visits - censored;
    if (exits == 0) return 0.0;
    const double f = frequency(count);
    return std::sqrt(f * (1 - f) / static_cast<double>(exits));
}

std::map<StateLabel, StateStats> empirical_state_stats(const SimConfig& cfg) {
    cfg.validate();
    const auto labels = state_labels(cfg.n);
    auto fresh = [&] {
        std::vector<StateStats> v(labels.size());
        for (std::size_t s = 0; s < labels.size(); ++s)
            v[s].down.assign(static_cast<std::size_t>(labels[s].i), 0);
        return v;
    };
    const std::uint64_t blocks = (cfg.trials + kBlock - 1) / kBlock;
    std::vector<std::vector<StateStats>> part(blocks);

    for_blocks(cfg, blocks, [&](std::uint64_t b, std::uint64_t lo, std::uint64_t hi) {
        auto stats = fresh();
        TrialRunner runner(cfg);
        std::size_t cur = 0;
        double entered = 0;
        auto visit = [&](const TraceEvent& e) {
            if (e.kind == SimEventKind::Start) {
                cur = state_index(cfg.n, e.state);
                entered = 0;
                ++stats[cur].visits;
                return;
            }
            auto& s = stats[cur];
            switch (e.kind) {
                case SimEventKind::Departure: ++s.up; break;
                case SimEventKind::Completion: ++s.down[static_cast<std::size_t>(e.order - 1)]; break;
                case SimEventKind::Failure: ++s.fail; break;
                case SimEventKind::Truncated: ++s.censored; return;
                default: break;
            }
            s.dwell.add(e.time - entered);
            if (e.kind == SimEventKind::Failure) return;
            cur = state_index(cfg.n, e.state);
            entered = e.time;
            ++stats[cur].visits;
        };
        for (std::uint64_t t = lo; t < hi; ++t) {
            Stream rng = trial_stream(cfg, t);
            runner.run(rng, false, visit);
        }
        part[b] = std::move(stats);
    });

    auto total = fresh();
    for (const auto& p : part)
        for (std::size_t s = 0; s < total.size(); ++s) {
            auto& d = total[s];
            const auto& x = p[s];
            d.visits += x.visits;
            d.dwell.merge(x.dwell);
            d.up += x.up;
            for (std::size_t k = 0; k < d.down.size(); ++k) d.down[k] += x.down[k];
            d.fail += x.fail;
            d.censored += x.censored;
        }
    std::map<StateLabel, StateStats> out;
    for (std::size_t s = 0; s < labels.size(); ++s) out.emplace(labels[s], std::move(total[s]));
    return out;
}

void write_trace_csv(const SimConfig& cfg, std::uint64_t trials, std::ostream& out) {
    cfg.validate();
    CsvWriter w(out, {"trial", "time", "event", "i", "j"});
    TrialRunner runner(cfg);
    for (std::uint64_t t = 0; t < trials; ++t) {
        Stream rng = trial_stream(cfg, t);
        auto o = runner.run(rng, true, [](const TraceEvent&) {});
        for (const auto& e : o.trace)
            w.row() << t << e.time << to_string(e.kind) << e.state.i << e.state.j;
    }
}

}  // namespace vcr
