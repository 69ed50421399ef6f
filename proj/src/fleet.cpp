#include "vcr/fleet.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <queue>

#include "vcr/errors.hpp"

namespace vcr {

Strategy::Strategy(Kind k, int groups) : kind_(k), groups_(groups) {
    if (groups < 1) throw ModelError("a strategy needs at least one group");
}

Strategy Strategy::parse(std::string_view text) {
    auto count = [&](std::string_view digits) {
        int n = 0;
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
        if (ec != std::errc{} || p != digits.data() + digits.size() || n < 1)
            throw ConfigError("strategy '" + std::string(text) + "': group count must be a positive integer");
        return n;
    };
    if (text == "j2") return j2();
    if (text == "nor-j2") return nor_j2();
    if (text.starts_with("rpvc:")) return rpvc(count(text.substr(5)));
    if (text.starts_with("nor-rpvc:")) return nor_rpvc(count(text.substr(9)));
    throw ConfigError("unknown strategy '" + std::string(text) +
                      "' (expected j2, rpvc:N, nor-j2 or nor-rpvc:N)");
}

std::string Strategy::spec() const {
    switch (kind_) {
        case Kind::J2: return "j2";
        case Kind::NoR_J2: return "nor-j2";
        case Kind::RPVC: return "rpvc:" + std::to_string(groups_);
        case Kind::NoR_RPVC: return "nor-rpvc:" + std::to_string(groups_);
    }
    return "?";
}

Strategy Strategy::without_replicas() const {
    switch (kind_) {
        case Kind::J2:
        case Kind::NoR_J2: return nor_j2();
        default: return nor_rpvc(groups_);
    }
}

void FleetConfig::validate() const {
    auto rate = [](Rate r, const char* name) {
        if (!(r.value() > 0) || !std::isfinite(r.value()))
            throw ModelError(std::string(name) + " must be a positive finite rate");
    };
    rate(lambda_ve, "lambda_ve");
    rate(lambda_app, "lambda_app");
    rate(lambda_d, "lambda_d");
    rate(lambda_z, "lambda_z");
    rate(lambda_u, "lambda_u");
    if (!(app_req.lo > 0) || app_req.lo > app_req.hi)
        throw ModelError("application requirement range must satisfy 0 < l_a <= h_a");
    if (!(veh_cap.lo > 0) || veh_cap.lo > veh_cap.hi)
        throw ModelError("vehicle capacity range must satisfy 0 < l_v <= h_v");
    if (!(horizon.value() > 0)) throw ModelError("horizon must be positive");
    if (max_groups_per_vehicle < 1) throw ModelError("max_groups_per_vehicle must be >= 1");
}

double FleetMetrics::ar() const {
    return total == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(total);
}

double FleetMetrics::sr() const {
    return total == 0 ? 0.0 : static_cast<double>(succeeded) / static_cast<double>(total);
}

namespace {

bool fits(const VehicleSlot& v, double req) { return v.free_jobs >= 1 && v.free_capacity >= req; }

}  // namespace

std::optional<std::vector<std::vector<std::size_t>>> admit(double requirement,
                                                          std::span<const VehicleSlot> free,
                                                          const Strategy& strategy) {
    const double req = requirement / strategy.groups();
    std::vector<VehicleSlot> left(free.begin(), free.end());
    std::vector<std::vector<std::size_t>> out;
    for (int g = 0; g < strategy.groups(); ++g) {
        std::vector<std::size_t> row;
        for (int r = 0; r < strategy.replicas(); ++r) {
            std::size_t k = 0;
            // Replicas of one group never share a vehicle.
            while (k < left.size() &&
                   (!fits(left[k], req) || std::find(row.begin(), row.end(), k) != row.end()))
                ++k;
            if (k == left.size()) return std::nullopt;
            left[k].free_capacity -= req;
            left[k].free_jobs -= 1;
            row.push_back(k);
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::optional<Hours> recruitment_completion(Hours now, double group_requirement,
                                            std::span<const VehicleSlot> free, Rate lambda_u,
                                            Stream& rng) {
    auto ok = [&](const VehicleSlot& v) { return fits(v, group_requirement); };
    if (std::none_of(free.begin(), free.end(), ok)) return std::nullopt;
    return Hours{now.value() + rng.exponential(lambda_u.value())};
}

namespace {

class FleetSim {
public:
    FleetSim(const FleetConfig& cfg, std::uint64_t rep)
        : cfg_(cfg),
          vs_(cfg.seed, rep, StreamDomain::VehicleArrivals),
          as_(cfg.seed, rep, StreamDomain::AppArrivals),
          rs_(cfg.seed, rep, StreamDomain::Recruitment) {}

    FleetMetrics run() {
        // Start from the stationary pool: Poisson(lambda_ve/lambda_z) vehicles
        // with memoryless residual sojourns.
        const double mean = cfg_.lambda_ve.value() / cfg_.lambda_z.value();
        for (double acc = vs_.exponential(1.0); acc < mean; acc += vs_.exponential(1.0))
            arrive_vehicle(0.0);
        push(vs_.exponential(cfg_.lambda_ve.value()), Kind::VehicleArrival, 0, 0);
        push(as_.exponential(cfg_.lambda_app.value()), Kind::AppArrival, 0, 0);

        const double end = cfg_.horizon.value();
        while (!queue_.empty() && queue_.top().t <= end) {
            const Ev e = queue_.top();
            queue_.pop();
            switch (e.kind) {
                case Kind::VehicleArrival:
                    arrive_vehicle(e.t);
                    serve_waiting(e.t);
                    push(e.t + vs_.exponential(cfg_.lambda_ve.value()), Kind::VehicleArrival, 0, 0);
                    break;
                case Kind::VehicleDeparture: depart_vehicle(e.a, e.t); break;
                case Kind::AppArrival:
                    arrive_app(e.t);
                    push(e.t + as_.exponential(cfg_.lambda_app.value()), Kind::AppArrival, 0, 0);
                    break;
                case Kind::AppDone: finish_app(e.a, e.b, e.t); break;
                case Kind::RecruitDone: recruited(e.a, e.b, e.t); break;
            }
        }
        m_.running = m_.accepted - m_.succeeded - m_.failed;
        return m_;
    }

private:
    enum class Kind { VehicleArrival, VehicleDeparture, AppArrival, AppDone, RecruitDone };
    struct Ev {
        double t;
        std::uint64_t seq;
        Kind kind;
        std::uint64_t a, b;
        bool operator>(const Ev& o) const { return t != o.t ? t > o.t : seq > o.seq; }
    };
    struct Veh {
        double cap = 0, used = 0;
        int jobs = 0;
        bool alive = true;
        std::vector<std::size_t> hosts;     // group ids held
        std::vector<std::size_t> reserved;  // group ids whose recruit this is
    };
    struct Grp {
        std::size_t app = 0;
        double req = 0;
        std::vector<std::uint64_t> holders;
        bool recruiting = false;
        bool waiting = false;
        std::optional<std::uint64_t> target;
        std::uint64_t token = 0;
    };
    struct App {
        std::vector<std::size_t> groups;
        double remaining;
        double resumed_at;
        int recruiting = 0;
        std::uint64_t version = 0;
        bool done = false;
    };

    void push(double t, Kind k, std::uint64_t a, std::uint64_t b) {
        queue_.push({t, seq_++, k, a, b});
    }

    void arrive_vehicle(double t) {
        const double cap = vs_.uniform(cfg_.veh_cap.lo, cfg_.veh_cap.hi);
        const double stay = vs_.exponential(cfg_.lambda_z.value());
        Veh v;
        v.cap = cap;
        veh_.push_back(std::move(v));
        present_.push_back(veh_.size() - 1);
        push(t + stay, Kind::VehicleDeparture, veh_.size() - 1, 0);
    }

    [[nodiscard]] VehicleSlot slot(std::uint64_t id) const {
        const auto& v = veh_[id];
        return {id, v.cap - v.used, cfg_.max_groups_per_vehicle - v.jobs};
    }

    void charge(std::uint64_t id, double req, int sign) {
        veh_[id].used += sign * req;
        veh_[id].jobs += sign;
    }

    void arrive_app(double t) {
        const double req = as_.uniform(cfg_.app_req.lo, cfg_.app_req.hi);
        const double work = as_.exponential(cfg_.lambda_d.value());
        ++m_.total;
        std::vector<VehicleSlot> free;
        for (auto id : present_) free.push_back(slot(id));
        auto placed = admit(req, free, cfg_.strategy);
        if (!placed) return;
        ++m_.accepted;
        const std::size_t a = apps_.size();
        apps_.push_back({{}, work, t});
        const double per = req / cfg_.strategy.groups();
        for (const auto& row : *placed) {
            const std::size_t g = grps_.size();
            Grp grp;
            grp.app = a;
            grp.req = per;
            grps_.push_back(std::move(grp));
            for (auto k : row) {
                const auto id = free[k].id;
                charge(id, per, +1);
                veh_[id].hosts.push_back(g);
                grps_[g].holders.push_back(id);
            }
            apps_[a].groups.push_back(g);
        }
        push(t + work, Kind::AppDone, a, 0);
    }

    // First-fit host for group g among present vehicles not already holding it.
    std::optional<std::uint64_t> find_host(std::size_t g) const {
        for (auto id : present_) {
            const auto& h = grps_[g].holders;
            if (std::find(h.begin(), h.end(), id) != h.end()) continue;
            if (fits(slot(id), grps_[g].req)) return id;
        }
        return std::nullopt;
    }

    void reserve(std::size_t g, std::uint64_t id, double t) {
        auto& grp = grps_[g];
        grp.target = id;
        grp.waiting = false;
        charge(id, grp.req, +1);
        veh_[id].reserved.push_back(g);
        push(t + rs_.exponential(cfg_.lambda_u.value()), Kind::RecruitDone, g, ++grp.token);
    }

    void search(std::size_t g, double t) {
        if (auto id = find_host(g)) {
            reserve(g, *id, t);
        } else {
            grps_[g].waiting = true;
            waiting_.push_back(g);
        }
    }

    void serve_waiting(double t) {
        std::deque<std::size_t> still;
        while (!waiting_.empty()) {
            const auto g = waiting_.front();
            waiting_.pop_front();
            if (!grps_[g].waiting || apps_[grps_[g].app].done) continue;
            if (auto id = find_host(g))
                reserve(g, *id, t);
            else
                still.push_back(g);
        }
        waiting_ = std::move(still);
    }

    void pause(std::size_t a, double t) {
        auto& app = apps_[a];
        if (app.recruiting++ == 0) {
            app.remaining -= t - app.resumed_at;
            ++app.version;
        }
    }

    void resume(std::size_t a, double t) {
        auto& app = apps_[a];
        if (--app.recruiting == 0) {
            app.resumed_at = t;
            push(t + app.remaining, Kind::AppDone, a, ++app.version);
        }
    }

    void depart_vehicle(std::uint64_t id, double t) {
        auto& v = veh_[id];
        v.alive = false;
        present_.erase(std::find(present_.begin(), present_.end(), id));
        for (auto g : std::vector(v.reserved)) {
            auto& grp = grps_[g];
            grp.target.reset();
            ++grp.token;
            search(g, t);
        }
        v.reserved.clear();
        for (auto g : std::vector(v.hosts)) {
            auto& grp = grps_[g];
            const std::size_t a = grp.app;
            if (apps_[a].done) continue;
            grp.holders.erase(std::find(grp.holders.begin(), grp.holders.end(), id));
            if (grp.holders.empty()) {
                ++m_.failed;
                release(a, t);
            } else {
                grp.recruiting = true;
                pause(a, t);
                search(g, t);
            }
        }
        v.hosts.clear();
    }

    void recruited(std::size_t g, std::uint64_t token, double t) {
        auto& grp = grps_[g];
        if (grp.token != token || !grp.target || apps_[grp.app].done) return;
        const auto id = *grp.target;
        auto& res = veh_[id].reserved;
        res.erase(std::find(res.begin(), res.end(), g));
        veh_[id].hosts.push_back(g);
        grp.holders.push_back(id);
        grp.target.reset();
        grp.recruiting = false;
        resume(grp.app, t);
    }

    void finish_app(std::size_t a, std::uint64_t version, double t) {
        if (apps_[a].done || apps_[a].version != version) return;
        ++m_.succeeded;
        release(a, t);
    }

    void release(std::size_t a, double t) {
        auto& app = apps_[a];
        app.done = true;
        for (auto g : app.groups) {
            auto& grp = grps_[g];
            for (auto id : grp.holders) {
                charge(id, grp.req, -1);
                auto& h = veh_[id].hosts;
                h.erase(std::find(h.begin(), h.end(), g));
            }
            grp.holders.clear();
            if (grp.target) {
                const auto id = *grp.target;
                charge(id, grp.req, -1);
                auto& r = veh_[id].reserved;
                r.erase(std::find(r.begin(), r.end(), g));
                grp.target.reset();
            }
            ++grp.token;
            grp.waiting = false;
        }
        serve_waiting(t);
    }

    const FleetConfig& cfg_;
    Stream vs_, as_, rs_;
    std::priority_queue<Ev, std::vector<Ev>, std::greater<>> queue_;
    std::uint64_t seq_ = 0;
    std::vector<Veh> veh_;
    std::vector<std::uint64_t> present_;  // arrival order
    std::vector<Grp> grps_;
    std::vector<App> apps_;
    std::deque<std::size_t> waiting_;
    FleetMetrics m_;
};

}  // namespace

FleetMetrics run_fleet(const FleetConfig& cfg, std::uint64_t rep) {
    cfg.validate();
    return FleetSim(cfg, rep).run();
}

}  // namespace vcr
