// End-to-end acceptance run: one PASS/FAIL line per criterion, details indented.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vcr/certification.hpp"
#include "vcr/cli.hpp"
#include "vcr/csv.hpp"
#include "vcr/dsmp.hpp"
#include "vcr/fleet.hpp"
#include "vcr/simulator.hpp"
#include "vcr/stats.hpp"
#include "walk.hpp"

using namespace vcr;

namespace {

// Tolerances and sizes, fixed before any run.
constexpr double kAnchor = 4.5;
constexpr double kAnchorTol = 1e-9;
constexpr double kSigmas = 3.0;
constexpr std::uint64_t kTrials = 1'000'000;
constexpr double kRecursionTol = 1e-9;
constexpr double kClosedTol = 1e-6;
constexpr int kRandomTables = 100;
constexpr std::size_t kKsSamples = 100'000;
constexpr double kKsAlpha = 0.01;
constexpr std::uint64_t kCertSeed = 2;
constexpr double kCertLambdaU = 2.0;
constexpr int kSequences = 10'000;
constexpr int kReplays = 2'000;
constexpr std::uint64_t kFleetReps = 100;
constexpr double kFleetConfidence = 0.95;
constexpr double kJ2Vanishing = 0.01;
constexpr double kRpvc3Floor = 0.5;

struct GridPoint {
    int n;
    double lz, lu;
};

std::vector<GridPoint> reference_grid() {
    std::vector<GridPoint> g;
    for (double lz : {1.0, 0.5, 1.0 / 3.0})
        for (double lu : {6.0, 4.0, 3.0})
            for (int n = 1; n <= 6; ++n) g.push_back({n, lz, lu});
    return g;
}

DsmpParams expo(int n, double lz, double lu) {
    return {n, Rate{lz}, RecruitmentLaw::exponential(Rate{lu})};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

class Report {
public:
    void detail(const std::string& s) { std::cout << "    " << s << '\n'; }
    bool verdict(int k, const std::string& what, bool ok, double seconds) {
        std::printf("criterion %d: %s  %s  (%.1f s)\n", k, ok ? "PASS" : "FAIL", what.c_str(),
                    seconds);
        std::fflush(stdout);
        all_ = all_ && ok;
        return ok;
    }
    [[nodiscard]] bool all() const { return all_; }

private:
    bool all_ = true;
};

template <class F>
void timed(Report& r, int k, const std::string& what, F body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = body();
    } catch (const std::exception& e) {
        r.detail(std::string("exception: ") + e.what());
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    r.verdict(k, what, ok, dt.count());
}

std::string fmt(const char* f, auto... xs) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, xs...);
    return buf;
}

// ---- 1 ----

bool anchor(Report& r) {
    const auto p = expo(1, 1, 6);
    const auto table = exponential_table(p);
    const double lin = mttf_linear_system(table).value.value();
    const double rec = mttf_general_recursion(table).value.value();
    const double closed = mttf_exponential_closed_form(p).value.value();
    bool ok = std::abs(lin - kAnchor) <= kAnchorTol && std::abs(rec - kAnchor) <= kAnchorTol &&
              std::abs(closed - kAnchor) <= kAnchorTol;
    r.detail(fmt("linear %.12f recursion %.12f closed %.12f", lin, rec, closed));

    SimConfig sc;
    sc.n = 1;
    sc.lambda_z = Rate{1};
    sc.recruitment = RecruitmentLaw::exponential(Rate{6});
    sc.trials = kTrials;
    sc.master_seed = 101;
    sc.threads = 0;
    const auto s = smttf(sc);
    const double z = (s.mean - kAnchor) / s.se;
    r.detail(fmt("smttf %.5f se %.5f z %.2f truncated %llu", s.mean, s.se, z,
                 static_cast<unsigned long long>(s.truncated)));
    return ok && std::abs(z) <= kSigmas && s.truncated == 0;
}

// ---- 2 ----

bool grid_match(Report& r) {
    bool ok = true;
    std::uint64_t seed = 200;
    double prev = 0;
    for (const auto& pt : reference_grid()) {
        const double pm = mttf_linear_system(exponential_table(expo(pt.n, pt.lz, pt.lu))).value.value();
        if (pt.n > 1 && !(pm < prev)) {
            r.detail(fmt("pmttf not decreasing at n=%d lz=%g lu=%g", pt.n, pt.lz, pt.lu));
            ok = false;
        }
        prev = pm;
        SimConfig sc;
        sc.n = pt.n;
        sc.lambda_z = Rate{pt.lz};
        sc.recruitment = RecruitmentLaw::exponential(Rate{pt.lu});
        sc.trials = kTrials;
        sc.master_seed = seed++;
        sc.threads = 0;
        const auto s = smttf(sc);
        const double z = (s.mean - pm) / s.se;
        const bool hit = std::abs(z) <= kSigmas && s.truncated == 0;
        r.detail(fmt("n=%d lz=%.4f lu=%g pmttf %.5f smttf %.5f se %.5f z %+.2f%s", pt.n, pt.lz,
                     pt.lu, pm, s.mean, s.se, z, hit ? "" : "  <-- outside"));
        ok = ok && hit;
    }
    return ok;
}

// ---- 3 ----

DsmpTable random_table(int n, std::mt19937_64& g) {
    std::uniform_real_distribution<double> w(0.05, 1.0), soj(0.05, 3.0);
    DsmpTable t(n);
    for (auto& row : t.rows()) {
        const int i = row.state.i;
        std::vector<double> raw(static_cast<std::size_t>(i));
        for (auto& x : raw) x = w(g);
        const double q = i < n ? w(g) : 0.0;
        const double b = i > 0 ? w(g) : 0.0;
        double sum = q + b;
        for (double x : raw) sum += x;
        row.probs.p.clear();
        for (double x : raw) row.probs.p.push_back(x / sum);
        row.probs.q = q / sum;
        row.probs.b = b / sum;
        row.sojourn = soj(g);
    }
    return t;
}

bool solvers(Report& r) {
    std::mt19937_64 g(300);
    double worst = 0;
    for (int k = 0; k < kRandomTables; ++k) {
        const int n = 1 + k % 5;
        const auto t = random_table(n, g);
        worst = std::max(worst, rel(mttf_general_recursion(t).value.value(),
                                    mttf_linear_system(t).value.value()));
    }
    r.detail(fmt("recursion vs linear, worst relative gap %.3g over %d tables", worst, kRandomTables));
    double worst_closed = 0;
    for (const auto& pt : reference_grid()) {
        const auto p = expo(pt.n, pt.lz, pt.lu);
        worst_closed = std::max(worst_closed, rel(mttf_exponential_closed_form(p).value.value(),
                                                  mttf_linear_system(exponential_table(p)).value.value()));
    }
    r.detail(fmt("closed form vs linear, worst relative gap %.3g over the grid", worst_closed));
    return worst <= kRecursionTol && worst_closed <= kClosedTol;
}

// ---- 4 ----

bool conformance(Report& r) {
    bool ok = true;
    int compared = 0;
    for (int n = 1; n <= 3; ++n) {
        const auto params = expo(n, 1, 6);
        SimConfig sc;
        sc.n = n;
        sc.lambda_z = params.lambda_z;
        sc.recruitment = params.recruitment;
        sc.trials = kTrials;
        sc.master_seed = 400 + static_cast<std::uint64_t>(n);
        sc.threads = 0;
        const auto stats = empirical_state_stats(sc);
        for (const auto& [label, st] : stats) {
            const auto exits = st.visits - st.censored;
            if (exits == 0) continue;
            const auto want = transition_probs_exponential(params, label.i);
            auto check = [&](const std::string& what, std::uint64_t count, double e) {
                const double f = st.frequency(count);
                const double sigma = std::sqrt(e * (1 - e) / static_cast<double>(exits));
                const bool hit = sigma == 0 ? std::abs(f - e) <= 1e-12
                                            : std::abs(f - e) <= kSigmas * sigma;
                ++compared;
                if (!hit) {
                    r.detail(fmt("n=%d %s %s: %.5f vs %.5f (sigma %.2g)", n, label.str().c_str(),
                                 what.c_str(), f, e, sigma));
                    ok = false;
                }
            };
            for (std::size_t k = 0; k < want.p.size(); ++k)
                check("p" + std::to_string(k + 1), st.down.at(k), want.p[k]);
            check("q", st.up, want.q);
            check("b", st.fail, want.b);
            const double dwell = expected_sojourn_exponential(params, label.i).value();
            const double se = st.dwell.stderr_of_mean();
            ++compared;
            if (!(std::abs(st.dwell.mean() - dwell) <= kSigmas * se)) {
                r.detail(fmt("n=%d %s dwell %.5f vs %.5f (se %.2g)", n, label.str().c_str(),
                             st.dwell.mean(), dwell, se));
                ok = false;
            }
        }
    }
    r.detail(fmt("%d comparisons", compared));
    return ok;
}

// ---- 5 ----

bool certification(Report& r) {
    algebra::LawCheckOptions opt;
    opt.samples = kKsSamples;
    opt.significance = kKsAlpha;
    const auto rules = certify_rewrites(Rate{1}, RecruitmentLaw::exponential(Rate{kCertLambdaU}),
                                        opt, kCertSeed);
    bool ok = !rules.empty();
    for (const auto& rule : rules) {
        std::string line = rule.id + (rule.pass ? "  ok" : "  FAILED");
        if (rule.verdict)
            line += fmt("  D=%.5f thr=%.5f acc=%.4f", rule.verdict->statistic,
                        rule.verdict->threshold, rule.verdict->acceptance);
        if (!rule.pass) line += "  " + rule.note;
        r.detail(line);
        ok = ok && rule.pass;
    }
    return ok;
}

// ---- 6 ----

bool closure(Report& r) {
    std::mt19937_64 g(600);
    int states = 0;
    bool ok = true;
    for (int k = 0; k < kSequences && ok; ++k) {
        const int n = 1 + k % 4;
        testing::random_walk(expo(n, 1, 6), 30, g, [&](const HState& h) {
            ++states;
            const auto c = canonical_label(h);
            if (!c || *c != h.label()) {
                r.detail("sequence " + std::to_string(k) + " left the canonical shapes at " +
                         h.label().str());
                ok = false;
            }
        });
    }
    r.detail(fmt("%d states along %d sequences", states, kSequences));

    int events = 0;
    for (int k = 0; k < kReplays && ok; ++k) {
        const int n = 1 + k % 4;
        SimConfig sc;
        sc.n = n;
        sc.lambda_z = Rate{1};
        sc.recruitment = RecruitmentLaw::exponential(Rate{6});
        sc.master_seed = 601;
        Stream rng = trial_stream(sc, static_cast<std::uint64_t>(k));
        const auto out = simulate_ttf(sc, rng, true);
        HState h = HState::initial(expo(n, 1, 6));
        for (const auto& e : out.trace) {
            if (e.kind == SimEventKind::Start || e.kind == SimEventKind::Truncated) continue;
            ++events;
            if (e.kind == SimEventKind::Completion) {
                h = decompose_transition(h, Completion{e.order});
                const auto v = h.vehicles();
                if (std::find(v.begin(), v.end(), e.vehicle) == v.end()) ok = false;
            } else {
                h = decompose_transition(h, Departure{e.vehicle});
            }
            const StateLabel want = e.kind == SimEventKind::Failure ? StateLabel::F() : e.state;
            if (h.label() != want) ok = false;
            if (!ok) {
                r.detail("replay " + std::to_string(k) + " diverged at t=" + std::to_string(e.time));
                break;
            }
        }
    }
    r.detail(fmt("%d simulator events replayed over %d trajectories", events, kReplays));
    return ok;
}

// ---- 7 ----

std::vector<FleetMetrics> fleet_runs(FleetConfig c, const Strategy& s) {
    c.strategy = s;
    std::vector<FleetMetrics> out;
    for (std::uint64_t rep = 0; rep < kFleetReps; ++rep) out.push_back(run_fleet(c, rep));
    return out;
}

double mean_of(const std::vector<FleetMetrics>& m, double (FleetMetrics::*f)() const) {
    double s = 0;
    for (const auto& x : m) s += (x.*f)();
    return s / static_cast<double>(m.size());
}

double paired(const std::vector<FleetMetrics>& a, const std::vector<FleetMetrics>& b,
              double (FleetMetrics::*f)() const) {
    std::vector<double> d;
    for (std::size_t k = 0; k < a.size(); ++k) d.push_back((a[k].*f)() - (b[k].*f)());
    return paired_lower_bound(d, kFleetConfidence);
}

bool fleet(Report& r) {
    FleetConfig base;  // default workload
    base.horizon = Hours{200};
    base.seed = 700;
    bool ok = true;
    const auto j2 = fleet_runs(base, Strategy::j2());
    for (int n = 2; n <= 4; ++n) {
        const auto rp = fleet_runs(base, Strategy::rpvc(n));
        const double lb = paired(rp, j2, &FleetMetrics::ar);
        r.detail(fmt("AR rpvc:%d %.4f vs j2 %.4f, 95%% lower bound of the gap %.4f", n,
                     mean_of(rp, &FleetMetrics::ar), mean_of(j2, &FleetMetrics::ar), lb));
        ok = ok && lb >= 0;
    }
    for (const auto& s : {Strategy::j2(), Strategy::rpvc(2), Strategy::rpvc(3), Strategy::rpvc(4)}) {
        const auto with = s == Strategy::j2() ? j2 : fleet_runs(base, s);
        const auto without = fleet_runs(base, s.without_replicas());
        const double lb = paired(with, without, &FleetMetrics::sr);
        r.detail(fmt("SR %s %.4f vs %s %.4f, 95%% lower bound of the gap %.4f", s.spec().c_str(),
                     mean_of(with, &FleetMetrics::sr), s.without_replicas().spec().c_str(),
                     mean_of(without, &FleetMetrics::sr), lb));
        ok = ok && lb > 0;
    }
    FleetConfig heavy = base;
    heavy.app_req = {27, 37};
    const double j2_heavy = mean_of(fleet_runs(heavy, Strategy::j2()), &FleetMetrics::ar);
    heavy.app_req = {40, 50};
    const double rp3_heavy = mean_of(fleet_runs(heavy, Strategy::rpvc(3)), &FleetMetrics::ar);
    r.detail(fmt("AR j2 at l_a=27 %.4f; AR rpvc:3 at l_a=40 %.4f", j2_heavy, rp3_heavy));
    return ok && j2_heavy <= kJ2Vanishing && rp3_heavy > kRpvc3Floor;
}

// ---- 8 ----

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string run_cli(std::vector<std::string> args, const std::filesystem::path& out) {
    args.push_back("--out");
    args.push_back(out.string());
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    if (code == 1) throw std::runtime_error("cli rejected arguments: " + e.str());
    return slurp(out);
}

bool determinism(Report& r) {
    const auto dir = std::filesystem::temp_directory_path() / "vcr_acceptance";
    std::filesystem::create_directories(dir);
    const std::vector<std::vector<std::string>> artifacts = {
        {"analyze", "--n", "1..4", "--solver", "all"},
        {"analyze", "--n", "1,2", "--recruitment-dist", "det:0.2", "--mc-trials", "20000", "--seed", "8"},
        {"simulate", "--n", "1..3", "--lambda-u", "6,3", "--trials", "20000", "--seed", "81"},
        {"algebra-check", "--samples", "10000", "--seed", "82"},
        {"fleet", "--strategy", "j2,rpvc:3", "--reps", "3", "--seed", "83"},
        {"sweep", "--preset", "fig6", "--trials", "2000", "--seed", "84"},
    };
    bool ok = true;
    int k = 0;
    for (const auto& a : artifacts) {
        const auto first = run_cli(a, dir / fmt("a%d.csv", k));
        auto again = a;
        if (a[0] == "simulate" || a[0] == "sweep") {
            again.push_back("--threads");
            again.push_back("1");
        }
        const auto second = run_cli(again, dir / fmt("b%d.csv", k));
        const bool same = !first.empty() && first == second;
        r.detail(a[0] + (same ? " regenerated bit-identically" : " DIFFERS on regeneration"));
        ok = ok && same;
        ++k;
    }

    // Each simulate row records its own seed; rerunning that point alone must
    // reproduce the row.
    const auto grid = parse_csv(run_cli(artifacts[2], dir / "grid.csv"));
    const auto c_n = grid.column("n"), c_lu = grid.column("lambda_u"), c_seed = grid.column("seed");
    for (const auto& row : grid.rows) {
        const auto one = parse_csv(run_cli({"simulate", "--n", row[c_n], "--lambda-u", row[c_lu],
                                            "--trials", "20000", "--seed", row[c_seed]},
                                           dir / "one.csv"));
        if (one.rows.size() != 1 || one.rows[0] != row) {
            r.detail("row with seed " + row[c_seed] + " not reproduced from its seed");
            ok = false;
        }
    }
    r.detail(fmt("%zu grid rows reproduced from their recorded seeds", grid.rows.size()));

    const auto trace_a = dir / "trace_a.csv", trace_b = dir / "trace_b.csv";
    run_cli({"simulate", "--n", "2", "--trials", "100", "--seed", "85", "--trace", trace_a.string()},
            dir / "t1.csv");
    run_cli({"simulate", "--n", "2", "--trials", "100", "--seed", "85", "--trace", trace_b.string()},
            dir / "t2.csv");
    const bool traces = !slurp(trace_a).empty() && slurp(trace_a) == slurp(trace_b);
    r.detail(traces ? "trace regenerated bit-identically" : "trace DIFFERS on regeneration");
    std::filesystem::remove_all(dir);
    return ok && traces;
}

}  // namespace

int main() {
    Report r;
    timed(r, 1, "n=1 anchor: solvers at 4.5 h, simulation within 3 se", [&] { return anchor(r); });
    timed(r, 2, "54-point grid: simulation within 3 se, analytic MTTF decreasing in n",
          [&] { return grid_match(r); });
    timed(r, 3, "solver equivalence on random tables and the closed form", [&] { return solvers(r); });
    timed(r, 4, "state transition frequencies and dwell means within 3 se", [&] { return conformance(r); });
    timed(r, 5, "event-algebra rewrites certified by conditional KS", [&] { return certification(r); });
    timed(r, 6, "decomposition closure and simulator replay", [&] { return closure(r); });
    timed(r, 7, "fleet acceptance and success trends", [&] { return fleet(r); });
    timed(r, 8, "CSV artifacts regenerate bit-identically from their seeds",
          [&] { return determinism(r); });
    std::cout << (r.all() ? "all criteria passed" : "some criteria failed") << '\n';
    return r.all() ? 0 : 1;
}
