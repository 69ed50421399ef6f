#include "vcr/model.hpp"

#include <algorithm>
#include <json.hpp>
#include <map>

#include "vcr/errors.hpp"

namespace vcr {

AppGraph::AppGraph(int m, std::vector<std::pair<TaskId, TaskId>> edges, bool directed)
    : m_(m), edges_(std::move(edges)), directed_(directed) {
    if (m < 1) throw ModelError("application needs at least one sub-task");
    for (auto [a, b] : edges_) {
        if (a < 1 || a > m || b < 1 || b > m)
            throw ModelError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                             ") references a vertex outside 1.." + std::to_string(m));
        if (a == b) throw ModelError("self-edge at vertex " + std::to_string(a));
    }
    if (!directed_) return;
    // Kahn's algorithm; leftover vertices sit on a cycle.
    std::vector<int> indeg(m + 1, 0);
    std::vector<std::vector<int>> out(m + 1);
    for (auto [a, b] : edges_) {
        out[a].push_back(b);
        ++indeg[b];
    }
    std::vector<int> ready;
    for (int v = 1; v <= m; ++v)
        if (indeg[v] == 0) ready.push_back(v);
    int seen = 0;
    while (!ready.empty()) {
        int v = ready.back();
        ready.pop_back();
        ++seen;
        for (int w : out[v])
            if (--indeg[w] == 0) ready.push_back(w);
    }
    if (seen != m) throw ModelError("directed application graph has a cycle");
}

std::string Violation::describe() const {
    switch (kind) {
        case Kind::EmptyGroup: return "group " + std::to_string(subject) + " is empty";
        case Kind::Overlap: return "vertex " + std::to_string(subject) + " is in several groups";
        case Kind::Uncovered: return "vertex " + std::to_string(subject) + " is uncovered";
        case Kind::UnknownVertex: return "vertex " + std::to_string(subject) + " does not exist";
        case Kind::TooManyGroups: return std::to_string(subject) + " groups exceed m";
    }
    return "unknown violation";
}

std::vector<Violation> validate_partition(const AppGraph& app, const Partition& part) {
    std::vector<Violation> out;
    const int m = app.size();
    if (part.size() > m) out.push_back({Violation::Kind::TooManyGroups, part.size()});
    std::vector<int> hits(m + 1, 0);
    std::set<int> unknown;
    for (int g = 0; g < part.size(); ++g) {
        const auto& grp = part.groups[g];
        if (grp.empty()) out.push_back({Violation::Kind::EmptyGroup, g + 1});
        // A vertex listed twice in one group still counts as one placement.
        std::set<int> uniq(grp.begin(), grp.end());
        for (int v : uniq) {
            if (v < 1 || v > m)
                unknown.insert(v);
            else
                ++hits[v];
        }
    }
    for (int v : unknown) out.push_back({Violation::Kind::UnknownVertex, v});
    for (int v = 1; v <= m; ++v) {
        if (hits[v] > 1) out.push_back({Violation::Kind::Overlap, v});
        if (hits[v] == 0) out.push_back({Violation::Kind::Uncovered, v});
    }
    return out;
}

DeploymentMap::DeploymentMap(std::vector<std::vector<int>> rows, Hours timestamp)
    : rows_(std::move(rows)), t_(timestamp) {
    if (!rows_.empty()) cols_ = static_cast<int>(rows_.front().size());
    for (std::size_t h = 0; h < rows_.size(); ++h) {
        const auto& r = rows_[h];
        if (static_cast<int>(r.size()) != cols_) throw ModelError("deployment matrix is ragged");
        int sum = 0;
        for (int x : r) {
            if (x != 0 && x != 1) throw ModelError("deployment entries must be 0 or 1");
            sum += x;
        }
        if (sum > 2)
            throw ModelError("group " + std::to_string(h + 1) + " has " + std::to_string(sum) +
                             " replicas; at most two are allowed");
    }
}

int DeploymentMap::replicas(GroupId h) const {
    if (h < 1 || h > groups()) throw ModelError("group id out of range");
    const auto& r = rows_[h - 1];
    return static_cast<int>(std::count(r.begin(), r.end(), 1));
}

std::set<GroupId> deployed_groups(const DeploymentMap& map) {
    std::set<GroupId> out;
    for (int h = 1; h <= map.groups(); ++h)
        if (map.replicas(h) >= 1) out.insert(h);
    return out;
}

std::set<GroupId> theta(const DeploymentMap& map) {
    std::set<GroupId> out;
    for (int h = 1; h <= map.groups(); ++h)
        if (map.replicas(h) == 1) out.insert(h);
    return out;
}

void VehiclePool::add(Vehicle v) {
    if (!(v.capacity > 0)) throw ModelError("vehicle capacity must be positive");
    vehicles_.push_back(v);
}

AppSpec parse_app_spec(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
        int m = doc.at("m").get<int>();
        bool directed = doc.value("directed", true);
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : doc.value("edges", nlohmann::json::array())) {
            if (!e.is_array() || e.size() != 2) throw ModelError("each edge must be a pair");
            edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
        Partition part;
        for (const auto& g : doc.at("groups")) part.groups.push_back(g.get<std::vector<int>>());
        return AppSpec{AppGraph(m, std::move(edges), directed), std::move(part)};
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("application spec: ") + e.what());
    }
}

}  // namespace vcr
