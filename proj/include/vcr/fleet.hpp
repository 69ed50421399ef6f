#pragma once

// Workload simulation of a vehicle pool serving a stream of applications
// under a replication strategy, reporting acceptance and success rates.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vcr/rng.hpp"
#include "vcr/units.hpp"

namespace vcr {

class Strategy {
public:
    enum class Kind { J2, RPVC, NoR_J2, NoR_RPVC };

    static Strategy j2() { return Strategy(Kind::J2, 1); }
    static Strategy rpvc(int n) { return Strategy(Kind::RPVC, n); }
    static Strategy nor_j2() { return Strategy(Kind::NoR_J2, 1); }
    static Strategy nor_rpvc(int n) { return Strategy(Kind::NoR_RPVC, n); }
    // j2 | rpvc:N | nor-j2 | nor-rpvc:N
    static Strategy parse(std::string_view text);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] int groups() const { return groups_; }
    [[nodiscard]] int replicas() const { return kind_ == Kind::J2 || kind_ == Kind::RPVC ? 2 : 1; }
    [[nodiscard]] std::string spec() const;  // round-trips through parse
    // The same strategy without the second replica.
    [[nodiscard]] Strategy without_replicas() const;
    bool operator==(const Strategy&) const = default;

private:
    Strategy(Kind k, int groups);
    Kind kind_;
    int groups_;
};

struct Range {
    double lo, hi;
};

struct FleetConfig {
    Rate lambda_ve{20};
    Rate lambda_app{2};
    Rate lambda_d{1};
    Rate lambda_z{1};
    Rate lambda_u{6};
    Range app_req{20, 30};
    Range veh_cap{20, 26};
    Strategy strategy = Strategy::rpvc(2);
    Hours horizon{200};
    std::uint64_t seed = 0;
    int max_groups_per_vehicle = 1;

    void validate() const;  // throws ModelError
};

struct FleetMetrics {
    std::uint64_t total = 0;
    std::uint64_t accepted = 0;
    std::uint64_t succeeded = 0;
    std::uint64_t failed = 0;
    std::uint64_t running = 0;  // still running at the horizon
    [[nodiscard]] double ar() const;
    [[nodiscard]] double sr() const;
};

// A vehicle as admission sees it.
struct VehicleSlot {
    std::uint64_t id;
    double free_capacity;
    int free_jobs;  // groups it may still take
};

// First-fit placement: vehicle indices into `free`, one row per group with
// one entry per replica. nullopt means reject.
std::optional<std::vector<std::vector<std::size_t>>> admit(double requirement,
                                                          std::span<const VehicleSlot> free,
                                                          const Strategy& strategy);

// Completion time of a recruitment starting at `now`, or nullopt when no
// listed vehicle can host the group (the caller then waits for an arrival).
std::optional<Hours> recruitment_completion(Hours now, double group_requirement,
                                            std::span<const VehicleSlot> free, Rate lambda_u,
                                            Stream& rng);

// One repetition. Vehicle, application and recruitment draws come from
// separate streams keyed on (seed, rep), so strategies see the same arrivals.
FleetMetrics run_fleet(const FleetConfig& cfg, std::uint64_t rep = 0);

}  // namespace vcr
