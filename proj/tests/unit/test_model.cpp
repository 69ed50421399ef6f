#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "vcr/errors.hpp"
#include "vcr/model.hpp"

using namespace vcr;

namespace {

DeploymentMap with_row_sums(std::vector<int> sums) {
    std::vector<std::vector<int>> rows;
    for (int s : sums) {
        std::vector<int> r(4, 0);
        for (int k = 0; k < s; ++k) r[static_cast<std::size_t>(k)] = 1;
        rows.push_back(r);
    }
    return DeploymentMap(rows);
}

// Independent set-based statement of the grouping rules.
bool brute_force_valid(int m, const Partition& p) {
    if (p.size() > m) return false;
    std::multiset<int> seen;
    for (const auto& g : p.groups) {
        if (g.empty()) return false;
        for (int v : g) {
            if (v < 1 || v > m) return false;
            seen.insert(v);
        }
    }
    for (int v = 1; v <= m; ++v)
        if (seen.count(v) != 1) return false;
    return true;
}

}  // namespace

TEST_SUITE("model") {
    TEST_CASE("deployed groups and lost replicas follow row sums") {
        CHECK(deployed_groups(DeploymentMap({{0, 0}, {0, 0}})).empty());
        CHECK(deployed_groups(with_row_sums({2, 2, 0})) == std::set<GroupId>{1, 2});
        CHECK(deployed_groups(with_row_sums({1, 2})) == std::set<GroupId>{1, 2});

        CHECK(theta(with_row_sums({2, 2, 2})).empty());
        CHECK(lost_replicas(with_row_sums({2, 2, 2})) == 0);
        CHECK(theta(with_row_sums({1, 2, 1})) == std::set<GroupId>{1, 3});
        CHECK(lost_replicas(with_row_sums({1, 2, 1})) == 2);
        CHECK(theta(with_row_sums({1, 1})) == std::set<GroupId>{1, 2});
    }

    TEST_CASE("deployment maps reject more than two replicas and non-binary entries") {
        CHECK_THROWS_AS(DeploymentMap({{1, 1, 1}}), ModelError);
        CHECK_THROWS_AS(DeploymentMap({{2, 0}}), ModelError);
        CHECK_THROWS_AS(DeploymentMap({{1, 0}, {1}}), ModelError);
    }

    TEST_CASE("random maps: every lost-replica group is deployed and counts add up") {
        std::mt19937 g(7);
        for (int trial = 0; trial < 500; ++trial) {
            const int k = 1 + static_cast<int>(g() % 6), r = 2 + static_cast<int>(g() % 6);
            std::vector<std::vector<int>> rows(static_cast<std::size_t>(k),
                                               std::vector<int>(static_cast<std::size_t>(r), 0));
            int full = 0;
            for (auto& row : rows) {
                const int s = static_cast<int>(g() % 3);
                full += s == 2;
                std::vector<int> cols(static_cast<std::size_t>(r));
                std::iota(cols.begin(), cols.end(), 0);
                std::shuffle(cols.begin(), cols.end(), g);
                for (int c = 0; c < s; ++c) row[static_cast<std::size_t>(cols[static_cast<std::size_t>(c)])] = 1;
            }
            DeploymentMap m(rows);
            const auto d = deployed_groups(m), t = theta(m);
            CHECK(std::includes(d.begin(), d.end(), t.begin(), t.end()));
            CHECK(static_cast<int>(t.size()) + full == static_cast<int>(d.size()));
        }
    }

    TEST_CASE("six-task graph split into three groups is a valid partition") {
        AppGraph app(6, {{1, 2}, {1, 3}, {2, 4}, {3, 5}, {4, 6}, {5, 6}}, true);
        Partition p{{{1, 2}, {3, 5}, {4, 6}}};
        CHECK(validate_partition(app, p).empty());
    }

    TEST_CASE("overlap and uncovered vertices are reported") {
        AppGraph app(3, {}, false);
        auto v = validate_partition(app, Partition{{{1, 2}, {2, 3}}});
        REQUIRE(v.size() == 1);
        CHECK(v[0].kind == Violation::Kind::Overlap);
        CHECK(v[0].subject == 2);

        v = validate_partition(app, Partition{{{1}, {2}}});
        REQUIRE(v.size() == 1);
        CHECK(v[0].kind == Violation::Kind::Uncovered);
        CHECK(v[0].subject == 3);

        v = validate_partition(app, Partition{{{1, 2, 3}, {}}});
        REQUIRE(!v.empty());
        CHECK(v[0].kind == Violation::Kind::EmptyGroup);
    }

    TEST_CASE("fuzz: partition validation agrees with a brute-force checker") {
        std::mt19937 g(11);
        int valid = 0;
        for (int trial = 0; trial < 3000; ++trial) {
            const int m = 1 + static_cast<int>(g() % 6);
            AppGraph app(m, {}, false);
            Partition p;
            const int k = 1 + static_cast<int>(g() % 7);
            for (int h = 0; h < k; ++h) {
                std::vector<int> grp;
                for (int v = 0; v <= m + 1; ++v)
                    if (g() % 3 == 0) grp.push_back(v);
                p.groups.push_back(grp);
            }
            // Also feed exact partitions so both outcomes are exercised.
            if (trial % 2 == 0) {
                p.groups.assign(static_cast<std::size_t>(std::min(k, m)), {});
                for (int v = 1; v <= m; ++v)
                    p.groups[g() % p.groups.size()].push_back(v);
            }
            const bool ok = validate_partition(app, p).empty();
            CHECK(ok == brute_force_valid(m, p));
            valid += ok;
        }
        CHECK(valid > 100);
    }

    TEST_CASE("graphs reject self edges, bad ids and directed cycles") {
        CHECK_THROWS_AS(AppGraph(3, {{1, 1}}, false), ModelError);
        CHECK_THROWS_AS(AppGraph(3, {{1, 4}}, false), ModelError);
        CHECK_THROWS_AS(AppGraph(3, {{1, 2}, {2, 3}, {3, 1}}, true), ModelError);
        CHECK_NOTHROW(AppGraph(3, {{1, 2}, {2, 3}, {3, 1}}, false));
    }

    TEST_CASE("application specs load from JSON") {
        auto spec = parse_app_spec(R"({"m": 3, "directed": true, "edges": [[1,2],[2,3]], "groups": [[1],[2,3]]})");
        CHECK(spec.app.size() == 3);
        CHECK(spec.partition.size() == 2);
        CHECK(validate_partition(spec.app, spec.partition).empty());
        CHECK_THROWS_AS(parse_app_spec(R"({"m": 3})"), ModelError);
        CHECK_THROWS_AS(parse_app_spec("not json"), ModelError);
    }

    TEST_CASE("vehicle pools need positive capacity") {
        VehiclePool pool;
        pool.add({1, 20, Hours{0}});
        CHECK(pool.vehicles().size() == 1);
        CHECK_THROWS_AS(pool.add({2, 0, Hours{0}}), ModelError);
    }
}
