#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "vcr/errors.hpp"
#include "vcr/fleet.hpp"
#include "vcr/stats.hpp"

using namespace vcr;

namespace {

std::vector<VehicleSlot> slots(std::initializer_list<double> caps, int jobs = 1) {
    std::vector<VehicleSlot> out;
    std::uint64_t id = 0;
    for (double c : caps) out.push_back({id++, c, jobs});
    return out;
}

}  // namespace

TEST_SUITE("fleet") {
    TEST_CASE("strategies parse and print back") {
        for (const char* s : {"j2", "rpvc:2", "rpvc:4", "nor-j2", "nor-rpvc:3"})
            CHECK(Strategy::parse(s).spec() == s);
        CHECK(Strategy::parse("rpvc:3").groups() == 3);
        CHECK(Strategy::parse("rpvc:3").replicas() == 2);
        CHECK(Strategy::parse("nor-rpvc:3").replicas() == 1);
        CHECK(Strategy::parse("j2").groups() == 1);
        CHECK(Strategy::parse("rpvc:3").without_replicas() == Strategy::nor_rpvc(3));
        CHECK(Strategy::j2().without_replicas() == Strategy::nor_j2());
        CHECK_THROWS_AS(Strategy::parse("rpvc:0"), ConfigError);
        CHECK_THROWS_AS(Strategy::parse("rpvc:x"), ConfigError);
        CHECK_THROWS_AS(Strategy::parse("j3"), ConfigError);
    }

    TEST_CASE("admission examples") {
        CHECK_FALSE(admit(30, slots({26, 26}), Strategy::j2()).has_value());
        auto six = slots({26, 26, 26, 26, 26, 26});
        auto placed = admit(30, six, Strategy::rpvc(3));
        REQUIRE(placed.has_value());
        CHECK(placed->size() == 3);
        CHECK_FALSE(admit(30, slots({26, 26, 26}), Strategy::rpvc(2)).has_value());
        CHECK(admit(30, slots({26, 26}), Strategy::nor_rpvc(2)).has_value());
        CHECK(admit(20, slots({26, 21}), Strategy::j2()).has_value());
    }

    TEST_CASE("property: placements respect capacity, job slots and distinct replicas") {
        std::mt19937_64 g(4);
        std::uniform_real_distribution<double> cap(5, 30), req(5, 60);
        const Strategy strategies[] = {Strategy::j2(), Strategy::rpvc(2), Strategy::rpvc(4),
                                       Strategy::nor_j2(), Strategy::nor_rpvc(3)};
        int accepted = 0;
        for (int trial = 0; trial < 2000; ++trial) {
            std::vector<VehicleSlot> free;
            const int m = static_cast<int>(g() % 10);
            for (int k = 0; k < m; ++k) free.push_back({static_cast<std::uint64_t>(k), cap(g), 1 + static_cast<int>(g() % 3)});
            const auto& s = strategies[g() % 5];
            const double r = req(g);
            auto placed = admit(r, free, s);
            if (!placed) continue;
            ++accepted;
            REQUIRE(placed->size() == static_cast<std::size_t>(s.groups()));
            std::map<std::size_t, std::pair<int, double>> use;
            for (const auto& row : *placed) {
                CHECK(row.size() == static_cast<std::size_t>(s.replicas()));
                CHECK(std::set<std::size_t>(row.begin(), row.end()).size() == row.size());
                for (auto v : row) {
                    use[v].first += 1;
                    use[v].second += r / s.groups();
                }
            }
            for (const auto& [v, u] : use) {
                CHECK(u.first <= free[v].free_jobs);
                CHECK(u.second <= free[v].free_capacity + 1e-9);
            }
        }
        CHECK(accepted > 100);
    }

    TEST_CASE("recruitment delay with a suitable vehicle is Exp(lambda_u)") {
        auto free = slots({26});
        Stream s(12), ref(13);
        std::vector<double> got, want;
        for (int k = 0; k < 100000; ++k) {
            got.push_back(recruitment_completion(Hours{5}, 10, free, Rate{6}, s)->value() - 5);
            want.push_back(ref.exponential(6));
        }
        CHECK(ks_two_sample(got, want, 0.01).pass);
    }

    TEST_CASE("recruitment cannot complete without a suitable vehicle") {
        Stream s(1);
        CHECK_FALSE(recruitment_completion(Hours{0}, 10, {}, Rate{6}, s).has_value());
        CHECK_FALSE(recruitment_completion(Hours{0}, 27, slots({26, 26}), Rate{6}, s).has_value());
        CHECK_FALSE(recruitment_completion(Hours{0}, 10, slots({26}, 0), Rate{6}, s).has_value());
    }

    TEST_CASE("counting identities hold for every strategy") {
        for (const char* name : {"j2", "rpvc:2", "rpvc:4", "nor-j2", "nor-rpvc:3"}) {
            FleetConfig c;
            c.strategy = Strategy::parse(name);
            c.horizon = Hours{100};
            c.seed = 3;
            for (std::uint64_t rep = 0; rep < 3; ++rep) {
                const auto m = run_fleet(c, rep);
                CHECK(m.succeeded + m.failed + m.running == m.accepted);
                CHECK(m.accepted <= m.total);
                CHECK(m.total > 0);
                CHECK(m.ar() == static_cast<double>(m.accepted) / static_cast<double>(m.total));
                CHECK(m.sr() == static_cast<double>(m.succeeded) / static_cast<double>(m.total));
            }
        }
    }

    TEST_CASE("a trickle of applications on abundant capacity is always accepted") {
        FleetConfig c;
        c.lambda_app = Rate{0.02};
        c.veh_cap = {1000, 1000};
        c.horizon = Hours{200};
        for (std::uint64_t rep = 0; rep < 5; ++rep) {
            const auto m = run_fleet(c, rep);
            if (m.total > 0) CHECK(m.ar() == 1.0);
        }
    }

    TEST_CASE("with unlimited capacity, free job slots and instant recruitment replicated apps do not fail") {
        FleetConfig c;
        c.veh_cap = {1e9, 1e9};
        c.max_groups_per_vehicle = 1000;
        c.lambda_u = Rate{1e6};
        c.strategy = Strategy::rpvc(2);
        std::uint64_t ok = 0, done = 0;
        for (std::uint64_t rep = 0; rep < 5; ++rep) {
            const auto m = run_fleet(c, rep);
            ok += m.succeeded;
            done += m.succeeded + m.failed;
        }
        REQUIRE(done > 0);
        CHECK(static_cast<double>(ok) / static_cast<double>(done) >= 0.999);
    }

    TEST_CASE("runs are reproducible and strategies see the same arrivals") {
        FleetConfig c;
        c.seed = 9;
        const auto a = run_fleet(c, 2), b = run_fleet(c, 2);
        CHECK(a.accepted == b.accepted);
        CHECK(a.succeeded == b.succeeded);
        FleetConfig d = c;
        d.strategy = Strategy::j2();
        CHECK(run_fleet(d, 2).total == a.total);
    }

    TEST_CASE("invalid fleet configurations are refused") {
        FleetConfig c;
        c.app_req = {30, 20};
        CHECK_THROWS_AS(run_fleet(c), ModelError);
        c = FleetConfig{};
        c.lambda_u = Rate{0};
        CHECK_THROWS_AS(run_fleet(c), ModelError);
    }
}
