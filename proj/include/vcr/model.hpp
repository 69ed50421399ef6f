#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vcr/units.hpp"

namespace vcr {

using TaskId = int;   // 1..m
using GroupId = int;  // 1..k

// Application as a graph of m dependent sub-tasks. Directedness is a flag:
// the reliability math is the same for DAG and undirected dependency graphs.
class AppGraph {
public:
    // Throws ModelError on self-edges, out-of-range ids, or a directed cycle.
    AppGraph(int m, std::vector<std::pair<TaskId, TaskId>> edges, bool directed);

    [[nodiscard]] int size() const { return m_; }
    [[nodiscard]] bool directed() const { return directed_; }
    [[nodiscard]] std::span<const std::pair<TaskId, TaskId>> edges() const { return edges_; }

private:
    int m_;
    std::vector<std::pair<TaskId, TaskId>> edges_;
    bool directed_;
};

struct Partition {
    std::vector<std::vector<TaskId>> groups;
    [[nodiscard]] int size() const { return static_cast<int>(groups.size()); }
};

struct Violation {
    enum class Kind { EmptyGroup, Overlap, Uncovered, UnknownVertex, TooManyGroups };
    Kind kind;
    int subject;  // vertex id, or group index (1-based) for EmptyGroup
    [[nodiscard]] std::string describe() const;
};

// Every violated grouping rule, in a stable order; empty means valid.
std::vector<Violation> validate_partition(const AppGraph& app, const Partition& part);

// k x r 0/1 matrix: row h marks the vehicles holding a replica of group h.
class DeploymentMap {
public:
    // Throws ModelError on ragged rows, entries outside {0,1}, or a row sum > 2.
    DeploymentMap(std::vector<std::vector<int>> rows, Hours timestamp = Hours{0});

    [[nodiscard]] int groups() const { return static_cast<int>(rows_.size()); }
    [[nodiscard]] int vehicles() const { return cols_; }
    [[nodiscard]] int replicas(GroupId h) const;  // row sum, 1-based h
    [[nodiscard]] Hours timestamp() const { return t_; }

private:
    std::vector<std::vector<int>> rows_;
    int cols_ = 0;
    Hours t_;
};

std::set<GroupId> deployed_groups(const DeploymentMap& map);
// Groups that lost one of their two vehicles.
std::set<GroupId> theta(const DeploymentMap& map);
inline int lost_replicas(const DeploymentMap& map) { return static_cast<int>(theta(map).size()); }

struct Vehicle {
    std::uint64_t id;
    double capacity;
    Hours arrival;
};

class VehiclePool {
public:
    void add(Vehicle v);  // throws ModelError unless capacity > 0
    [[nodiscard]] std::span<const Vehicle> vehicles() const { return vehicles_; }

private:
    std::vector<Vehicle> vehicles_;
};

struct AppSpec {
    AppGraph app;
    Partition partition;
};

// {"m": int, "directed": bool, "edges": [[x,y],...], "groups": [[ids],...]}
AppSpec parse_app_spec(std::string_view json_text);

}  // namespace vcr
