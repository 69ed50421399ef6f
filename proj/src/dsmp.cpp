#include "vcr/dsmp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vcr/errors.hpp"

namespace vcr {

using algebra::AtomLaw;
using algebra::Difference;
using algebra::EDistribution;
using algebra::Edl;
using algebra::EdvExpr;

std::string StateLabel::str() const {
    if (failed) return "F";
    return "S(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

void DsmpParams::validate() const {
    if (n < 1) throw ModelError("n must be at least 1");
    if (!(lambda_z.value() > 0) || !std::isfinite(lambda_z.value()))
        throw ModelError("lambda_z must be a positive finite rate");
}

std::vector<StateLabel> state_labels(int n) {
    std::vector<StateLabel> out{{0, 0}, {0, 1}};
    for (int i = 1; i < n; ++i)
        for (int j = 0; j <= i + 1; ++j) out.push_back({i, j});
    out.push_back({n, 0});
    return out;
}

std::size_t state_index(int n, StateLabel s) {
    if (s.failed) throw ModelError("F has no row");
    if (s.i < 0 || s.i > n || s.j < 0) throw ModelError("no state " + s.str());
    if (s.i == 0) {
        if (s.j > 1) throw ModelError("no state " + s.str());
        return static_cast<std::size_t>(s.j);
    }
    if (s.i == n) {
        if (s.j != 0) throw ModelError("no state " + s.str());
    } else if (s.j > s.i + 1) {
        throw ModelError("no state " + s.str());
    }
    // Level i (1 <= i < n) holds i+2 states and starts after 2 + sum_{k<i}(k+2).
    std::size_t base = 2;
    for (int k = 1; k < s.i; ++k) base += static_cast<std::size_t>(k + 2);
    return base + static_cast<std::size_t>(s.j);
}

// ---- symbolic states ----

bool HState::is_recruiting(int group) const {
    return std::find(recruiter_group_.begin(), recruiter_group_.end(), group) !=
           recruiter_group_.end();
}

HState HState::initial(const DsmpParams& params) {
    params.validate();
    HState s;
    s.n_ = params.n;
    s.u_ = std::make_shared<algebra::Universe>(params.lambda_z, params.recruitment);
    std::vector<EdvExpr> items;
    for (int v = 0; v < 2 * params.n; ++v) {
        items.push_back(EdvExpr::srv(s.u_, s.u_->add(AtomLaw::Sojourn)));
        s.vehicles_.push_back(static_cast<std::uint64_t>(v));
        s.vehicle_group_.push_back(v / 2);
    }
    s.sojourns_ = Edl(std::move(items));
    s.next_vehicle_ = static_cast<std::uint64_t>(2 * params.n);
    return s;
}

HState HState::failure(const DsmpParams& params) {
    params.validate();
    HState s;
    s.n_ = params.n;
    s.label_ = StateLabel::F();
    s.u_ = std::make_shared<algebra::Universe>(params.lambda_z, params.recruitment);
    return s;
}

HState decompose_transition(const HState& s, const DsmpEvent& e) {
    if (s.label_.failed) throw ModelError("F is absorbing");
    HState out = s;
    out.path_.push_back(e);
    const auto& u = s.u_;

    if (const auto* d = std::get_if<Departure>(&e)) {
        auto it = std::find(s.vehicles_.begin(), s.vehicles_.end(), d->vehicle);
        if (it == s.vehicles_.end())
            throw ModelError("vehicle " + std::to_string(d->vehicle) + " is not attached");
        const auto idx = static_cast<std::size_t>(it - s.vehicles_.begin());
        const int g = s.vehicle_group_[idx];
        if (s.is_recruiting(g)) {
            out.label_ = StateLabel::F();
            out.sojourns_ = Edl();
            out.recruiters_ = Edl();
            out.vehicles_.clear();
            out.vehicle_group_.clear();
            out.recruiter_group_.clear();
            return out;
        }
        const EdvExpr& gone = s.sojourns_[idx];
        out.sojourns_ = algebra::edl_subtract(s.sojourns_, gone);
        out.vehicles_.erase(out.vehicles_.begin() + static_cast<std::ptrdiff_t>(idx));
        out.vehicle_group_.erase(out.vehicle_group_.begin() + static_cast<std::ptrdiff_t>(idx));
        auto fresh = Edl({EdvExpr::srv(u, u->add(AtomLaw::Recruitment))});
        out.recruiters_ = algebra::edl_concat(algebra::edl_subtract(s.recruiters_, gone), fresh);
        out.recruiter_group_.push_back(g);
        out.label_ = {s.label_.i + 1, 0};
        return out;
    }

    const int k = std::get<Completion>(e).order;
    if (k < 1 || k > static_cast<int>(s.recruiters_.size()))
        throw ModelError("no recruiter of order " + std::to_string(k));
    const auto ki = static_cast<std::size_t>(k - 1);
    const EdvExpr& done = s.recruiters_[ki];
    const int g = s.recruiter_group_[ki];

    // The replacement came from the pool; it had to outlive the recruitment.
    const auto now = s.sojourns_[0].reducer();
    auto pool = EdvExpr::residual(u, u->add(AtomLaw::Sojourn), now);
    auto joined = algebra::subtract_edv(pool, done, Difference::FirstMinusSecond);
    u->register_epoch(joined.reducer().form());

    Edl rest = algebra::edl_subtract(s.sojourns_, done);
    out.sojourns_ = algebra::edl_concat(rest, Edl({joined}));
    const bool at_end = out.sojourns_[out.sojourns_.size() - 1].tree().same_tree(joined.tree());
    if (at_end) {
        out.vehicles_.push_back(s.next_vehicle_);
        out.vehicle_group_.push_back(g);
    } else {
        out.vehicles_.insert(out.vehicles_.begin(), s.next_vehicle_);
        out.vehicle_group_.insert(out.vehicle_group_.begin(), g);
    }
    ++out.next_vehicle_;

    out.recruiters_ = algebra::edl_subtract(s.recruiters_, done);
    out.recruiter_group_.erase(out.recruiter_group_.begin() + static_cast<std::ptrdiff_t>(ki));
    out.label_ = {s.label_.i - 1, k};
    return out;
}

std::optional<StateLabel> canonical_label(const HState& s) {
    if (s.label().failed) return StateLabel::F();
    const int n = s.n();
    const int i = static_cast<int>(s.recruiters().size());
    if (i > n || static_cast<int>(s.sojourns().size()) != 2 * n - i) return std::nullopt;
    const auto st = s.sojourns().tag();
    if (!st.regular || st.tail_len != 0) return std::nullopt;
    const auto m = static_cast<std::size_t>(2 * n - i);

    if (i == 0) {
        if (st.head == EDistribution::Srv_Exp) return StateLabel{0, 0};
        if (st.head == EDistribution::DdotExp) return StateLabel{0, 1};
        return std::nullopt;
    }
    const auto rt = s.recruiters().tag();
    if (!rt.regular) return std::nullopt;
    const auto ui = static_cast<std::size_t>(i);

    if (st.head == EDistribution::DotExp && st.head_len == m) {
        // phi^(i-1) followed by one fresh recruitment
        bool ok = i == 1 ? (rt.head == EDistribution::Srv_General && rt.head_len == 1 &&
                            rt.tail_len == 0)
                         : (rt.head == EDistribution::Phi && rt.head_len == ui - 1 &&
                            rt.tail == EDistribution::Srv_General && rt.tail_len == 1);
        if (ok) return StateLabel{i, 0};
        return std::nullopt;
    }
    if (st.head == EDistribution::DdotExp && st.head_len == m && i < n) {
        // gamma^(j-1) followed by psi^(i-j+1)
        std::size_t gammas = 0;
        if (rt.tail_len == 0) {
            if (rt.head == EDistribution::Gamma) gammas = ui;
            else if (rt.head != EDistribution::Psi) return std::nullopt;
        } else {
            if (rt.head != EDistribution::Gamma || rt.tail != EDistribution::Psi)
                return std::nullopt;
            gammas = rt.head_len;
        }
        return StateLabel{i, static_cast<int>(gammas) + 1};
    }
    return std::nullopt;
}

HState canonical_state(const DsmpParams& params, StateLabel s) {
    if (s.failed) return HState::failure(params);
    state_index(params.n, s);  // validates
    HState h = HState::initial(params);
    const int depth = s.j == 0 ? s.i : s.i + 1;
    for (int g = 0; g < depth; ++g)
        h = decompose_transition(h, Departure{static_cast<std::uint64_t>(2 * g)});
    if (s.j > 0) h = decompose_transition(h, Completion{s.j});
    return h;
}

std::vector<HState> enumerate_states(const DsmpParams& params) {
    std::vector<HState> out;
    for (auto l : state_labels(params.n)) out.push_back(canonical_state(params, l));
    out.push_back(HState::failure(params));
    return out;
}

// ---- tables ----

double TransitionTriple::total() const {
    return std::accumulate(p.begin(), p.end(), 0.0) + q + b;
}

DsmpTable::DsmpTable(int n) : n_(n) {
    if (n < 1) throw ModelError("n must be at least 1");
    for (auto l : state_labels(n)) {
        StateRow r;
        r.state = l;
        r.probs.p.assign(static_cast<std::size_t>(l.i), 0.0);
        rows_.push_back(std::move(r));
    }
}

void DsmpTable::validate(double tol) const {
    for (const auto& r : rows_) {
        const auto& t = r.probs;
        auto bad = [&](const std::string& why) {
            return ModelError(r.state.str() + ": " + why);
        };
        if (static_cast<int>(t.p.size()) != r.state.i) throw bad("p must have i entries");
        auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
        if (!std::all_of(t.p.begin(), t.p.end(), in01) || !in01(t.q) || !in01(t.b))
            throw bad("probability outside [0,1]");
        if (std::abs(t.total() - 1.0) > tol) throw bad("probabilities do not sum to 1");
        if (!(r.sojourn > 0) || !std::isfinite(r.sojourn))
            throw bad("expected sojourn must be positive and finite");
    }
}

namespace {

double exit_rate(const DsmpParams& params, int i) {
    const double lz = params.lambda_z.value();
    const double lu = params.recruitment.exponential_rate();
    return (2 * params.n - i) * lz + i * lu;
}

void check_level(const DsmpParams& params, int i) {
    params.validate();
    if (i < 0 || i > params.n)
        throw ModelError("level " + std::to_string(i) + " outside 0.." + std::to_string(params.n));
    if (!params.recruitment.is_exponential())
        throw ModelError("closed forms need exponential recruitment, got " +
                         params.recruitment.spec());
}

}  // namespace

TransitionTriple transition_probs_exponential(const DsmpParams& params, int i) {
    check_level(params, i);
    const double d = exit_rate(params, i);
    const double lz = params.lambda_z.value();
    TransitionTriple t;
    t.p.assign(static_cast<std::size_t>(i), params.recruitment.exponential_rate() / d);
    t.q = 2.0 * (params.n - i) * lz / d;
    t.b = i * lz / d;
    return t;
}

Hours expected_sojourn_exponential(const DsmpParams& params, int i) {
    check_level(params, i);
    return Hours{1.0 / exit_rate(params, i)};
}

DsmpTable exponential_table(const DsmpParams& params) {
    DsmpTable t(params.n);
    for (auto& r : t.rows()) {
        r.probs = transition_probs_exponential(params, r.state.i);
        r.sojourn = expected_sojourn_exponential(params, r.state.i).value();
    }
    return t;
}

// ---- Monte Carlo ----

namespace {

// Weighted tallies for self-normalised estimates with ratio-estimator errors.
class WeightedTally {
public:
    explicit WeightedTally(std::size_t outcomes) : a_(outcomes, 0.0), b_(outcomes, 0.0) {}

    void add(double w, std::size_t outcome, double dwell) {
        sw_ += w;
        sw2_ += w * w;
        a_[outcome] += w;
        b_[outcome] += w * w;
        aw_ += w * dwell;
        bw_ += w * w * dwell;
        cw_ += w * w * dwell * dwell;
    }

    [[nodiscard]] double ess() const { return sw2_ > 0 ? sw_ * sw_ / sw2_ : 0.0; }

    [[nodiscard]] Estimate outcome(std::size_t o) const {
        const double est = a_[o] / sw_;
        const double var = (b_[o] * (1 - 2 * est) + est * est * sw2_) / (sw_ * sw_);
        return {est, std::sqrt(std::max(var, 0.0))};
    }

    [[nodiscard]] Estimate dwell() const {
        const double est = aw_ / sw_;
        const double var = (cw_ - 2 * est * bw_ + est * est * sw2_) / (sw_ * sw_);
        return {est, std::sqrt(std::max(var, 0.0))};
    }

private:
    double sw_ = 0, sw2_ = 0, aw_ = 0, bw_ = 0, cw_ = 0;
    std::vector<double> a_, b_;
};

StateEstimate finish(const WeightedTally& t, int i, std::size_t trials) {
    const double ess = t.ess();
    if (ess == 0) throw UnreachableState("no trial reached the state under this recruitment law");
    const double frac = ess / static_cast<double>(trials);
    if (!(frac >= 1e-3))
        throw InsufficientConditioning("effective sample fraction " + std::to_string(frac) +
                                       " is below 1e-3");
    StateEstimate out;
    for (int k = 0; k < i; ++k) out.p.push_back(t.outcome(static_cast<std::size_t>(k)));
    out.q = t.outcome(static_cast<std::size_t>(i));
    out.b = t.outcome(static_cast<std::size_t>(i) + 1);
    out.sojourn = t.dwell();
    out.ess_fraction = frac;
    out.trials = trials;
    return out;
}

void check_state(const HState& s, std::size_t trials) {
    if (s.label().failed) throw ModelError("F has no outgoing transitions");
    if (trials < 1) throw ModelError("need at least one trial");
}

}  // namespace

StateEstimate estimate_state_mc(const DsmpParams& params, const HState& s, std::size_t trials,
                                Stream& rng) {
    params.validate();
    check_state(s, trials);
    if (s.n() != params.n) throw ModelError("state and parameters disagree on n");
    const double lz = params.lambda_z.value();
    const int i = s.label().i;
    constexpr double inf = std::numeric_limits<double>::infinity();

    struct Rec {
        int group;
        double left;
    };
    struct Veh {
        std::uint64_t id;
        int group;
    };
    std::vector<Veh> attached;
    std::vector<Rec> recs;
    WeightedTally tally(static_cast<std::size_t>(i) + 2);

    for (std::size_t t = 0; t < trials; ++t) {
        attached.clear();
        recs.clear();
        for (int v = 0; v < 2 * params.n; ++v)
            attached.push_back({static_cast<std::uint64_t>(v), v / 2});
        std::uint64_t next_id = static_cast<std::uint64_t>(2 * params.n);
        double w = 1.0;

        for (const auto& ev : s.path()) {
            const double rate = static_cast<double>(attached.size()) * lz;
            if (const auto* d = std::get_if<Departure>(&ev)) {
                double rmin = inf;
                for (const auto& r : recs) rmin = std::min(rmin, r.left);
                double dt = 0;
                if (rmin < inf) {
                    const double c = -std::expm1(-rate * rmin);
                    w *= c;
                    if (w == 0) break;
                    dt = -std::log1p(-rng.uniform01() * c) / rate;
                }
                for (auto& r : recs) r.left -= dt;
                auto it = std::find_if(attached.begin(), attached.end(),
                                       [&](const Veh& x) { return x.id == d->vehicle; });
                const int g = it->group;
                attached.erase(it);
                recs.push_back({g, params.recruitment.sample(rng)});
            } else {
                const auto k = static_cast<std::size_t>(std::get<Completion>(ev).order - 1);
                const double rk = recs[k].left;
                bool first = true;
                for (std::size_t r = 0; r < recs.size(); ++r)
                    if (r != k && recs[r].left < rk) first = false;
                if (!first) {
                    w = 0;
                    break;
                }
                w *= std::exp(-rate * rk);
                for (auto& r : recs) r.left -= rk;
                attached.push_back({next_id++, recs[k].group});
                recs.erase(recs.begin() + static_cast<std::ptrdiff_t>(k));
            }
        }
        if (w == 0) continue;

        const double rate = static_cast<double>(attached.size()) * lz;
        const double dep = rng.exponential(rate);
        std::size_t kmin = 0;
        double rmin = inf;
        for (std::size_t r = 0; r < recs.size(); ++r)
            if (recs[r].left < rmin) {
                rmin = recs[r].left;
                kmin = r;
            }
        if (rmin < dep) {
            tally.add(w, kmin, rmin);
            continue;
        }
        // Each attached vehicle is equally likely to be the one leaving.
        auto who = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(attached.size()));
        who = std::min(who, attached.size() - 1);
        const int g = attached[who].group;
        const bool recruiting =
            std::any_of(recs.begin(), recs.end(), [&](const Rec& r) { return r.group == g; });
        tally.add(w, static_cast<std::size_t>(i) + (recruiting ? 1 : 0), dep);
    }
    return finish(tally, i, trials);
}

StateEstimate estimate_state_rejection(const HState& s, std::size_t trials, Stream& rng) {
    check_state(s, trials);
    const int i = s.label().i;
    std::vector<algebra::LinearForm> forms, cons;
    for (const auto& v : s.sojourns().items()) {
        forms.push_back(v.form());
        cons.insert(cons.end(), v.constraints().begin(), v.constraints().end());
    }
    for (const auto& v : s.recruiters().items()) {
        forms.push_back(v.form());
        cons.insert(cons.end(), v.constraints().begin(), v.constraints().end());
    }
    auto draws = algebra::sample_conditioned(*s.universe(), forms, cons, trials, rng);
    const std::size_t ns = s.sojourns().size();
    WeightedTally tally(static_cast<std::size_t>(i) + 2);
    for (std::size_t t = 0; t < trials; ++t) {
        const double* row = draws.values.data() + t * draws.width;
        const auto best = static_cast<std::size_t>(
            std::min_element(row, row + draws.width) - row);
        if (best >= ns) {
            tally.add(1.0, best - ns, row[best]);
        } else {
            const bool recruiting = s.is_recruiting(s.vehicle_groups()[best]);
            tally.add(1.0, static_cast<std::size_t>(i) + (recruiting ? 1 : 0), row[best]);
        }
    }
    return finish(tally, i, trials);
}

TransitionEstimate transition_probs_mc(const DsmpParams& params, const HState& s,
                                       std::size_t trials, Stream& rng) {
    if (trials < 10000) throw ModelError("transition_probs_mc needs at least 1e4 trials");
    auto e = estimate_state_mc(params, s, trials, rng);
    TransitionEstimate out;
    for (const auto& p : e.p) {
        out.probs.p.push_back(p.value);
        out.p_se.push_back(p.se);
    }
    out.probs.q = e.q.value;
    out.q_se = e.q.se;
    out.probs.b = e.b.value;
    out.b_se = e.b.se;
    return out;
}

Estimate expected_sojourn_mc(const DsmpParams& params, const HState& s, std::size_t trials,
                             Stream& rng) {
    if (trials < 10000) throw ModelError("expected_sojourn_mc needs at least 1e4 trials");
    return estimate_state_mc(params, s, trials, rng).sojourn;
}

DsmpTable mc_table(const DsmpParams& params, std::size_t trials, std::uint64_t master_seed) {
    DsmpTable t(params.n);
    const auto labels = state_labels(params.n);
    for (std::size_t k = 0; k < labels.size(); ++k) {
        Stream rng(master_seed, k, StreamDomain::MonteCarlo);
        auto& row = t.at(labels[k]);
        StateEstimate e;
        try {
            e = estimate_state_mc(params, canonical_state(params, labels[k]), trials, rng);
        } catch (const UnreachableState&) {
            // Never entered, so any valid row leaves the MTTF unchanged.
            row.probs.b = 1;
            row.sojourn = 1;
            continue;
        }
        for (std::size_t r = 0; r < e.p.size(); ++r) row.probs.p[r] = e.p[r].value;
        row.probs.q = e.q.value;
        row.probs.b = e.b.value;
        row.sojourn = e.sojourn.value;
    }
    return t;
}

// ---- solvers ----

std::string to_string(Solver s) {
    switch (s) {
        case Solver::LinearSystem: return "linear";
        case Solver::GeneralRecursion: return "recursion";
        case Solver::ExponentialClosedForm: return "closed";
    }
    return "?";
}

std::string to_string(Grouping g) {
    return g == Grouping::ProofLine ? "proof-line" : "statement";
}

MttfReport mttf_linear_system(const DsmpTable& t) {
    t.validate(1e-9);
    const int n = t.n();
    const auto rows = t.rows();
    const auto size = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(size, size);
    Eigen::VectorXd w(size);
    for (Eigen::Index r = 0; r < size; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        const auto [i, j, f] = row.state;
        w(r) = row.sojourn;
        if (i < n && row.probs.q > 0)
            a(r, static_cast<Eigen::Index>(state_index(n, {i + 1, 0}))) -= row.probs.q;
        for (int k = 1; k <= i; ++k)
            a(r, static_cast<Eigen::Index>(state_index(n, {i - 1, k}))) -=
                row.probs.p[static_cast<std::size_t>(k - 1)];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    if (!(lu.rcond() > 1e-13)) throw SingularSystem("first-passage system is singular");
    Eigen::VectorXd q = lu.solve(w);
    // rcond misses exact zero pivots.
    if (!q.allFinite()) throw SingularSystem("first-passage system is singular");

    MttfReport rep;
    rep.solver = Solver::LinearSystem;
    rep.value = Hours{q(0)};
    for (Eigen::Index r = 0; r < size; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        rep.states.push_back({row.state, row.sojourn, q(r)});
    }
    return rep;
}

MttfReport mttf_general_recursion(const DsmpTable& t) {
    t.validate(1e-9);
    const int n = t.n();
    auto q = [&](int i, int j) { return t.at({i, j}).probs.q; };
    auto p = [&](int l, int i, int j) {
        return t.at({i, j}).probs.p[static_cast<std::size_t>(l - 1)];
    };
    auto wt = [&](int i, int j) { return t.at({i, j}).sojourn; };

    // a[i][l] for i = 2..n+1, l = 1..i-1
    std::vector<std::vector<double>> a(static_cast<std::size_t>(n) + 2);
    std::vector<double> alpha(static_cast<std::size_t>(n) + 1, 0.0);
    a[n + 1].assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 1; k <= n; ++k) a[n + 1][k] = p(k, n, 0);

    for (int i = n; i >= 1; --i) {
        double loop = 0;
        for (int j = 1; j <= i; ++j) loop += q(i - 1, j) * a[i + 1][j];
        const double den = 1.0 - loop;
        if (std::abs(den) < 1e-300)
            throw SingularSystem("alpha(" + std::to_string(i) + ") has a vanishing denominator");
        alpha[i] = q(i - 1, 0) / den;
        if (i < 2) break;
        a[i].assign(static_cast<std::size_t>(i), 0.0);
        for (int l = 1; l <= i - 1; ++l) {
            double s = 0;
            for (int j = 1; j <= i; ++j) s += p(l, i - 1, j) * a[i + 1][j];
            a[i][l] = alpha[i] * s + p(l, i - 1, 0);
        }
    }

    double beta = 1, total = wt(0, 0);
    for (int i = 1; i <= n; ++i) {
        beta *= alpha[i];
        total += beta * wt(i, 0);
        for (int j = 1; j <= i; ++j) total += beta * wt(i - 1, j) * a[i + 1][j];
    }

    MttfReport rep;
    rep.solver = Solver::GeneralRecursion;
    rep.value = Hours{total};
    for (const auto& row : t.rows()) rep.states.push_back({row.state, row.sojourn, std::nullopt});
    return rep;
}

ClosedFormCandidates closed_form_candidates(const DsmpParams& params) {
    check_level(params, 0);
    const int n = params.n;
    std::vector<double> pp(n + 1), qq(n + 1), ww(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double d = exit_rate(params, i);
        pp[i] = params.recruitment.exponential_rate() / d;
        qq[i] = 2.0 * (n - i) * params.lambda_z.value() / d;
        ww[i] = 1.0 / d;
    }
    std::vector<double> ap(n + 2, 0.0), beta(n + 1, 1.0);
    ap[n + 1] = pp[n];
    for (int i = n; i >= 2; --i) ap[i] = pp[i - 1] / (1.0 - i * qq[i - 1] * ap[i + 1]);
    for (int k = 1; k <= n; ++k)
        beta[k] = beta[k - 1] * qq[k - 1] / (1.0 - k * qq[k - 1] * ap[k + 1]);

    const double ends = ww[0] * (1.0 + beta[1] * ap[2]) + beta[n] * ww[n];
    ClosedFormCandidates c{ends, ends};
    for (int i = 1; i <= n - 1; ++i) {
        c.proof_line += ww[i] * (beta[i] + (i + 1) * beta[i + 1] * ap[i + 2]);
        c.statement += ww[i] * (i + 1) * (beta[i + 1] * ap[i + 2] + beta[i]);
    }
    return c;
}

MttfReport mttf_exponential_closed_form(const DsmpParams& params) {
    const auto c = closed_form_candidates(params);
    const auto table = exponential_table(params);
    const double ref = mttf_linear_system(table).value.value();
    auto close = [&](double x) { return std::abs(x - ref) <= 1e-6 * std::abs(ref); };

    MttfReport rep;
    rep.solver = Solver::ExponentialClosedForm;
    if (close(c.proof_line)) rep.matched.push_back(Grouping::ProofLine);
    if (close(c.statement)) rep.matched.push_back(Grouping::Statement);
    if (rep.matched.empty())
        throw FormulaDiscrepancy("closed form disagrees with the linear system (" +
                                 std::to_string(ref) + " h): proof-line grouping gives " +
                                 std::to_string(c.proof_line) + " h, statement grouping " +
                                 std::to_string(c.statement) + " h");
    rep.value = Hours{rep.matched.front() == Grouping::ProofLine ? c.proof_line : c.statement};
    for (const auto& row : table.rows())
        rep.states.push_back({row.state, row.sojourn, std::nullopt});
    return rep;
}

}  // namespace vcr
