#include <doctest.h>

#include <sstream>

#include "vcr/csv.hpp"
#include "vcr/errors.hpp"
#include "vcr/dsmp.hpp"
#include "vcr/simulator.hpp"

using namespace vcr;

namespace {

SimConfig cfg(int n, const char* law, std::uint64_t trials, std::uint64_t seed = 1) {
    SimConfig c;
    c.n = n;
    c.lambda_z = Rate{1};
    c.recruitment = RecruitmentLaw::parse(law);
    c.trials = trials;
    c.master_seed = seed;
    return c;
}

}  // namespace

TEST_SUITE("simulator") {
    TEST_CASE("without recruitment a single group lives as long as its longer vehicle") {
        const auto r = smttf(cfg(1, "never", 200000));
        CHECK(std::abs(r.mean - 1.5) <= 3 * r.se);
        CHECK(r.truncated == 0);
    }

    TEST_CASE("near-instant recruitment makes failure rare") {
        auto c = cfg(1, "exp:1e9", 50);
        c.max_time = Hours{1e3};
        const auto r = smttf(c);
        CHECK(r.mean > 10 * 0.5);
    }

    TEST_CASE("single group at the anchor rates") {
        const auto r = smttf(cfg(1, "exp:6", 200000));
        CHECK(std::abs(r.mean - 4.5) <= 3 * r.se);
    }

    TEST_CASE("results do not depend on the thread count") {
        auto c = cfg(3, "exp:4", 20000, 42);
        const auto one = smttf(c);
        c.threads = 4;
        const auto four = smttf(c);
        CHECK(one.mean == four.mean);
        CHECK(one.se == four.se);
        c.threads = 1;
        CHECK(smttf(c).mean == one.mean);
        c.master_seed = 43;
        CHECK(smttf(c).mean != one.mean);
    }

    TEST_CASE("trajectories: increasing times, conserved counts, legal successors") {
        const auto c = cfg(3, "exp:6", 1);
        for (std::uint64_t t = 0; t < 300; ++t) {
            Stream rng = trial_stream(c, t);
            auto o = simulate_ttf(c, rng, true);
            REQUIRE(o.trace.size() >= 2);
            CHECK(o.trace.front().kind == SimEventKind::Start);
            CHECK(o.ttf <= c.max_time.value());
            int recruiting = 0;
            StateLabel prev{0, 0};
            for (std::size_t k = 1; k < o.trace.size(); ++k) {
                const auto& e = o.trace[k];
                CHECK(e.time > o.trace[k - 1].time);
                switch (e.kind) {
                    case SimEventKind::Departure:
                        ++recruiting;
                        CHECK(e.state == StateLabel{prev.i + 1, 0});
                        break;
                    case SimEventKind::Completion:
                        --recruiting;
                        CHECK(e.state == StateLabel{prev.i - 1, e.order});
                        CHECK(e.order >= 1);
                        CHECK(e.order <= prev.i);
                        break;
                    case SimEventKind::Failure:
                        CHECK(e.state == prev);
                        CHECK(prev.i >= 1);
                        break;
                    default: break;
                }
                CHECK(recruiting == e.state.i);
                CHECK(e.state.i <= c.n);
                prev = e.state;
            }
        }
    }

    TEST_CASE("per-state frequencies and dwell means match the exponential chain") {
        const auto stats = empirical_state_stats(cfg(2, "exp:6", 200000, 5));
        const auto& s = stats.at({1, 0});
        const double p = 2.0 / 3, q = 2.0 / 9, b = 1.0 / 9;
        CHECK(std::abs(s.frequency(s.down[0]) - p) <= 3 * s.frequency_se(s.down[0]));
        CHECK(std::abs(s.frequency(s.up) - q) <= 3 * s.frequency_se(s.up));
        CHECK(std::abs(s.frequency(s.fail) - b) <= 3 * s.frequency_se(s.fail));
        CHECK(std::abs(s.dwell.mean() - 1.0 / 9) <= 3 * s.dwell.stderr_of_mean());
        for (const auto& [label, st] : stats)
            if (label.i == 0) CHECK(st.fail == 0);
    }

    TEST_CASE("trace CSV") {
        std::ostringstream out;
        write_trace_csv(cfg(2, "exp:6", 1), 3, out);
        auto t = parse_csv(out.str());
        CHECK(t.header == std::vector<std::string>{"trial", "time", "event", "i", "j"});
        CHECK(t.rows.front()[2] == "start");
        CHECK(t.rows.back()[0] == "2");
    }

    TEST_CASE("invalid configurations are refused") {
        auto c = cfg(0, "exp:6", 1);
        CHECK_THROWS_AS(smttf(c), ModelError);
        c = cfg(1, "exp:6", 0);
        CHECK_THROWS_AS(smttf(c), ModelError);
    }
}
