#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>

#include "vcr/certification.hpp"
#include "vcr/cli.hpp"
#include "vcr/csv.hpp"
#include "vcr/dsmp.hpp"
#include "vcr/errors.hpp"
#include "vcr/fleet.hpp"
#include "vcr/simulator.hpp"

namespace vcr::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

// ---- option plumbing ----

struct Command {
    CLI::App* app = nullptr;
    std::string config_path;
    std::map<std::string, std::string> text;  // node-stable storage for CLI11
    std::map<std::string, bool> flags;
    std::vector<std::pair<std::string, CLI::Option*>> bound;
    std::function<int(const Config&, std::ostream&, std::ostream&)> body;
};

std::string flag_name(std::string_view key) {
    std::string f = "--";
    for (char c : key) f += c == '_' ? '-' : c;
    return f;
}

void add(Command& c, std::string_view key, std::string_view def, std::string help) {
    const std::string k(key);
    CLI::Option* o = nullptr;
    if (key_type(key) == ValueType::Bool) {
        o = c.app->add_flag(flag_name(key), c.flags[k], std::move(help));
    } else {
        o = c.app->add_option(flag_name(key), c.text[k], std::move(help));
        if (!def.empty()) o->default_str(std::string(def));
    }
    c.bound.emplace_back(k, o);
}

Config collect(const Command& c) {
    Config cfg = c.config_path.empty() ? Config{} : Config::load(c.config_path);
    for (const auto& [key, opt] : c.bound) {
        if (opt->count() == 0) continue;
        if (key_type(key) == ValueType::Bool)
            cfg.set(key, "true", flag_name(key));
        else
            cfg.set(key, c.text.at(key), flag_name(key));
    }
    return cfg;
}

// ---- typed lookups with defaults ----

std::uint64_t resolve_seed(const Config& cfg) {
    if (auto s = cfg.get_int("seed")) {
        if (*s < 0) throw ConfigError("seed must be non-negative");
        return static_cast<std::uint64_t>(*s);
    }
    if (const char* env = std::getenv("VCR_SEED"); env && *env) {
        Config tmp;
        tmp.set("seed", env, "VCR_SEED");
        return resolve_seed(tmp);
    }
    return kDefaultSeed;
}

std::int64_t int_or(const Config& cfg, std::string_view key, std::int64_t def, std::int64_t min) {
    const auto v = cfg.get_int(key).value_or(def);
    if (v < min)
        throw ConfigError("key '" + std::string(key) + "' must be at least " + std::to_string(min));
    return v;
}

double positive_or(const Config& cfg, std::string_view key, double def) {
    const auto v = cfg.get_double(key).value_or(def);
    if (!(v > 0)) throw ConfigError("key '" + std::string(key) + "' must be positive");
    return v;
}

std::vector<double> rates_or(const Config& cfg, std::string_view key, std::vector<double> def) {
    auto v = cfg.get_doubles(key).value_or(std::move(def));
    for (double x : v)
        if (!(x > 0)) throw ConfigError("key '" + std::string(key) + "' must hold positive values");
    return v;
}

double single_rate(const Config& cfg, std::string_view key, double def) {
    const auto v = rates_or(cfg, key, {def});
    if (v.size() != 1)
        throw ConfigError("key '" + std::string(key) + "' takes a single value here");
    return v.front();
}

std::vector<int> group_counts(const Config& cfg) {
    cfg.require("n");
    const auto ns = *cfg.get_ints("n");
    std::vector<int> out;
    for (auto n : ns) {
        if (n < 1 || n > 64) throw ConfigError("key 'n' must lie in 1..64");
        out.push_back(static_cast<int>(n));
    }
    return out;
}

RecruitmentLaw parse_law(const std::string& spec) {
    try {
        return RecruitmentLaw::parse(spec);
    } catch (const Error& e) {
        throw ConfigError("key 'recruitment_dist': " + std::string(e.what()));
    }
}

// recruitment_dist wins over the lambda_u list when both are present.
std::vector<RecruitmentLaw> laws(const Config& cfg) {
    if (auto d = cfg.get_string("recruitment_dist")) return {parse_law(*d)};
    std::vector<RecruitmentLaw> out;
    for (double r : rates_or(cfg, "lambda_u", {6.0})) out.push_back(RecruitmentLaw::exponential(Rate{r}));
    return out;
}

std::string law_column(const RecruitmentLaw& law) {
    return law.is_exponential() ? format_number(law.exponential_rate()) : law.spec();
}

// The output file is opened before any work so a bad path fails fast.
class Sink {
public:
    Sink(const Config& cfg, std::ostream& fallback) : out_(&fallback) {
        if (auto path = cfg.get_string("out")) {
            file_ = std::make_unique<std::ofstream>(*path, std::ios::binary);
            if (!*file_) throw ConfigError("cannot write output file '" + *path + "'");
            out_ = file_.get();
        }
    }
    std::ostream& stream() { return *out_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* out_;
};

struct Point {
    int n;
    double lambda_z;
    RecruitmentLaw law;
    std::uint64_t seed;
};

// n outermost, then lambda_z, then the recruitment law; point k gets seed + k.
std::vector<Point> grid(const Config& cfg, std::uint64_t seed) {
    const auto ns = group_counts(cfg);
    const auto lzs = rates_or(cfg, "lambda_z", {1.0});
    const auto ls = laws(cfg);
    std::vector<Point> out;
    for (int n : ns)
        for (double lz : lzs)
            for (const auto& l : ls) out.push_back({n, lz, l, seed + out.size()});
    return out;
}

// ---- analyze ----

int analyze(const Config& cfg, std::ostream& out, std::ostream&) {
    const auto points = grid(cfg, resolve_seed(cfg));
    const auto solver = cfg.get_string("solver").value_or("linear");
    std::vector<Solver> solvers;
    if (solver == "linear" || solver == "all") solvers.push_back(Solver::LinearSystem);
    if (solver == "recursion" || solver == "all") solvers.push_back(Solver::GeneralRecursion);
    if (solver == "closed" || solver == "all") solvers.push_back(Solver::ExponentialClosedForm);
    if (solvers.empty())
        throw ConfigError("key 'solver' must be linear, recursion, closed or all; got '" + solver + "'");
    const bool per_state = cfg.get_bool("per_state").value_or(false);
    const auto mc_trials = static_cast<std::size_t>(int_or(cfg, "mc_trials", 100000, 10000));
    for (const auto& p : points) {
        if (!p.law.is_exponential() && solver != "linear" && solver != "recursion")
            throw ConfigError("the closed solver needs exponential recruitment");
        DsmpParams{p.n, Rate{p.lambda_z}, p.law}.validate();
    }

    Sink sink(cfg, out);
    std::unique_ptr<CsvWriter> w;
    if (per_state)
        w = std::make_unique<CsvWriter>(
            sink.stream(), std::vector<std::string>{"n", "lambda_z", "lambda_u", "solver", "i", "j",
                                                    "expected_sojourn", "expected_time_to_failure",
                                                    "seed"});
    else
        w = std::make_unique<CsvWriter>(
            sink.stream(), std::vector<std::string>{"n", "lambda_z", "lambda_u", "mttf_hours",
                                                    "solver", "grouping", "seed"});

    for (const auto& p : points) {
        const DsmpParams params{p.n, Rate{p.lambda_z}, p.law};
        const DsmpTable table = p.law.is_exponential() ? exponential_table(params)
                                                       : mc_table(params, mc_trials, p.seed);
        for (Solver s : solvers) {
            MttfReport r = s == Solver::LinearSystem       ? mttf_linear_system(table)
                           : s == Solver::GeneralRecursion ? mttf_general_recursion(table)
                                                           : mttf_exponential_closed_form(params);
            if (per_state) {
                for (const auto& st : r.states) {
                    auto row = w->row();
                    row << p.n << p.lambda_z << law_column(p.law) << to_string(s) << st.state.i
                        << st.state.j << st.sojourn;
                    if (st.time_to_failure)
                        row << *st.time_to_failure;
                    else
                        row << "";
                    row << p.seed;
                }
                continue;
            }
            std::string grouping;
            for (auto g : r.matched) grouping += (grouping.empty() ? "" : "+") + to_string(g);
            w->row() << p.n << p.lambda_z << law_column(p.law) << r.value.value() << to_string(s)
                     << grouping << p.seed;
        }
    }
    return 0;
}

// ---- simulate ----

SimConfig sim_config(const Config& cfg, const Point& p) {
    SimConfig sc;
    sc.n = p.n;
    sc.lambda_z = Rate{p.lambda_z};
    sc.recruitment = p.law;
    sc.trials = static_cast<std::uint64_t>(int_or(cfg, "trials", 100000, 1));
    sc.master_seed = p.seed;
    sc.max_time = Hours{positive_or(cfg, "max_time", 1e4)};
    sc.threads = static_cast<unsigned>(int_or(cfg, "threads", 0, 0));
    sc.validate();
    return sc;
}

int simulate(const Config& cfg, std::ostream& out, std::ostream&) {
    const auto points = grid(cfg, resolve_seed(cfg));
    std::vector<SimConfig> configs;
    for (const auto& p : points) configs.push_back(sim_config(cfg, p));
    const auto trace = cfg.get_string("trace");
    if (trace && points.size() != 1)
        throw ConfigError("key 'trace' needs a single-point grid");
    const auto trace_trials = static_cast<std::uint64_t>(int_or(cfg, "trace_trials", 10, 1));

    Sink sink(cfg, out);
    CsvWriter w(sink.stream(), {"n", "lambda_z", "lambda_u", "smttf", "stderr", "trials",
                                "truncated", "seed"});
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto r = smttf(configs[k]);
        w.row() << points[k].n << points[k].lambda_z << law_column(points[k].law) << r.mean
                << r.se << r.trials << r.truncated << points[k].seed;
    }
    if (trace) {
        std::ofstream f(*trace, std::ios::binary);
        if (!f) throw ConfigError("cannot write trace file '" + *trace + "'");
        write_trace_csv(configs.front(), trace_trials, f);
    }
    return 0;
}

// ---- algebra-check ----

int algebra_check(const Config& cfg, std::ostream& out, std::ostream& err) {
    const double lz = single_rate(cfg, "lambda_z", 1.0);
    const auto law = cfg.get_string("recruitment_dist")
                         ? parse_law(*cfg.get_string("recruitment_dist"))
                         : RecruitmentLaw::exponential(Rate{single_rate(cfg, "lambda_u", 2.0)});
    algebra::LawCheckOptions opt;
    opt.samples = static_cast<std::size_t>(int_or(cfg, "samples", 100000, 10000));
    opt.significance = cfg.get_double("significance").value_or(0.01);
    if (!(opt.significance > 0 && opt.significance < 1))
        throw ConfigError("key 'significance' must lie in (0,1)");
    const auto seed = resolve_seed(cfg);

    Sink sink(cfg, out);
    const auto rules = certify_rewrites(Rate{lz}, law, opt, seed);
    CsvWriter w(sink.stream(),
                {"rule", "shape_ok", "statistic", "threshold", "pass", "acceptance", "seed"});
    std::size_t failed = 0;
    for (const auto& r : rules) {
        auto row = w.row();
        row << r.id << (r.shape_ok ? "true" : "false");
        if (r.verdict)
            row << r.verdict->statistic << r.verdict->threshold;
        else
            row << "" << "";
        row << (r.pass ? "true" : "false");
        if (r.verdict)
            row << r.verdict->acceptance;
        else
            row << "";
        row << seed;
        if (!r.pass) {
            ++failed;
            err << r.id << ": " << r.claim << " [" << r.note << "]\n";
        }
    }
    if (failed) {
        err << failed << " of " << rules.size() << " rules failed\n";
        return 2;
    }
    return 0;
}

// ---- fleet ----

int fleet(const Config& cfg, std::ostream& out, std::ostream&) {
    FleetConfig base;
    base.lambda_ve = Rate{positive_or(cfg, "lambda_ve", 20)};
    base.lambda_app = Rate{positive_or(cfg, "lambda_app", 2)};
    base.lambda_d = Rate{positive_or(cfg, "lambda_d", 1)};
    base.lambda_z = Rate{single_rate(cfg, "lambda_z", 1)};
    base.lambda_u = Rate{single_rate(cfg, "lambda_u", 6)};
    base.app_req = {cfg.get_double("l_a").value_or(20), cfg.get_double("h_a").value_or(30)};
    base.veh_cap = {cfg.get_double("l_v").value_or(20), cfg.get_double("h_v").value_or(26)};
    base.horizon = Hours{positive_or(cfg, "horizon", 200)};
    base.max_groups_per_vehicle = static_cast<int>(int_or(cfg, "max_groups", 1, 1));
    base.seed = resolve_seed(cfg);
    const auto reps = static_cast<std::uint64_t>(int_or(cfg, "reps", 20, 1));

    std::vector<FleetConfig> runs;
    const auto strategies =
        cfg.get_strings("strategy").value_or(std::vector<std::string>{"rpvc:2"});
    for (const auto& s : strategies) {
        FleetConfig c = base;
        c.strategy = Strategy::parse(s);
        try {
            c.validate();
        } catch (const ModelError& e) {
            throw ConfigError(e.what());
        }
        runs.push_back(c);
    }

    Sink sink(cfg, out);
    CsvWriter w(sink.stream(),
                {"rep", "strategy", "accepted", "succeeded", "total", "ar", "sr", "seed"});
    for (const auto& c : runs)
        for (std::uint64_t rep = 0; rep < reps; ++rep) {
            const auto m = run_fleet(c, rep);
            w.row() << rep << c.strategy.spec() << m.accepted << m.succeeded << m.total << m.ar()
                    << m.sr() << c.seed;
        }
    return 0;
}

// ---- sweep ----

int sweep(const Config& cfg, std::ostream& out, std::ostream&) {
    Config c = cfg;
    const auto preset = cfg.get_string("preset").value_or("none");
    auto preset_default = [&](std::string_view key, std::string_view value) {
        if (!c.has(key)) c.set(key, value, "preset " + preset);
    };
    if (preset == "fig5") {
        preset_default("n", "1..6");
        preset_default("lambda_z", "1, 0.5, 0.3333333333333333");
        preset_default("lambda_u", "6, 4, 3");
    } else if (preset == "fig6") {
        preset_default("n", "1..4");
        preset_default("lambda_z", "1");
        preset_default("lambda_u", "6");
        preset_default("alpha", "1, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3");
    } else if (preset != "none") {
        throw ConfigError("key 'preset' must be fig5, fig6 or none; got '" + preset + "'");
    }
    const auto mode = c.get_string("mode").value_or("both");
    if (mode != "both" && mode != "analyze" && mode != "simulate")
        throw ConfigError("key 'mode' must be both, analyze or simulate; got '" + mode + "'");
    const bool do_analyze = mode != "simulate", do_simulate = mode != "analyze";

    const auto ns = group_counts(c);
    const auto lzs = rates_or(c, "lambda_z", {1.0});
    const auto lus = rates_or(c, "lambda_u", {6.0});
    const auto alphas = rates_or(c, "alpha", {1.0});
    const auto seed = resolve_seed(c);

    // lambda_z, lambda_u, n, alpha from outermost to innermost.
    std::vector<Point> points;
    for (double lz : lzs)
        for (double lu : lus)
            for (int n : ns)
                for (double a : alphas)
                    points.push_back({n, lz, RecruitmentLaw::exponential(Rate{lu * a}),
                                      seed + points.size()});
    std::vector<SimConfig> configs;
    for (const auto& p : points) configs.push_back(sim_config(c, p));

    Sink sink(c, out);
    CsvWriter w(sink.stream(),
                {"n", "lambda_z", "lambda_u", "pmttf", "smttf", "stderr", "trials", "seed"});
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto& p = points[k];
        auto row = w.row();
        row << p.n << p.lambda_z << law_column(p.law);
        if (do_analyze)
            row << mttf_linear_system(exponential_table({p.n, Rate{p.lambda_z}, p.law})).value.value();
        else
            row << "";
        if (do_simulate) {
            const auto r = smttf(configs[k]);
            row << r.mean << r.se << r.trials;
        } else {
            row << "" << "" << "";
        }
        row << p.seed;
    }
    return 0;
}

void common_options(Command& c, bool grid_keys) {
    c.app->add_option("--config", c.config_path, "flat key = value file; flags override it");
    add(c, "seed", "1", "master seed (falls back to VCR_SEED)");
    add(c, "out", "", "CSV output path (default stdout)");
    if (grid_keys) {
        add(c, "n", "", "number of groups; list or range such as 1..6 (required)");
        add(c, "lambda_z", "1", "vehicle departure rate per hour; list");
        add(c, "lambda_u", "6", "recruitment rate per hour; list");
        add(c, "recruitment_dist", "", "recruitment law: exp:R, det:H, uniform:A,B, erlang:K,R, never");
    }
}

void sim_options(Command& c) {
    add(c, "trials", "100000", "Monte Carlo trials per grid point");
    add(c, "threads", "0", "worker threads (0 = all cores)");
    add(c, "max_time", "10000", "trajectory truncation in hours");
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Reliability of replicated, partitioned applications on a vehicular cloud"};
    app.name("vcr");
    app.require_subcommand(1, 1);

    std::vector<std::unique_ptr<Command>> commands;
    auto make = [&](std::string name, std::string about, auto body) -> Command& {
        auto c = std::make_unique<Command>();
        c->app = app.add_subcommand(std::move(name), std::move(about));
        c->body = body;
        commands.push_back(std::move(c));
        return *commands.back();
    };

    {
        auto& c = make("analyze", "analytic C-MTTF over a parameter grid", analyze);
        common_options(c, true);
        add(c, "solver", "linear", "linear, recursion, closed or all");
        add(c, "per_state", "", "emit per-state sojourns and times to failure");
        add(c, "mc_trials", "100000", "Monte Carlo trials per state for non-exponential laws");
    }
    {
        auto& c = make("simulate", "Monte Carlo MTTF over a parameter grid", simulate);
        common_options(c, true);
        sim_options(c);
        add(c, "trace", "", "also write event traces of a single-point grid here");
        add(c, "trace_trials", "10", "trials included in the trace");
    }
    {
        auto& c = make("algebra-check", "certify the residual-law rewrites by conditional KS tests",
                       algebra_check);
        common_options(c, false);
        add(c, "lambda_z", "1", "vehicle departure rate per hour");
        add(c, "lambda_u", "2", "recruitment rate per hour");
        add(c, "recruitment_dist", "", "recruitment law instead of lambda_u");
        add(c, "samples", "100000", "accepted samples per side");
        add(c, "significance", "0.01", "KS significance level per rule");
    }
    {
        auto& c = make("fleet", "workload simulation of replication strategies", fleet);
        common_options(c, false);
        add(c, "strategy", "rpvc:2", "j2, rpvc:N, nor-j2 or nor-rpvc:N; list");
        add(c, "reps", "20", "repetitions per strategy");
        add(c, "horizon", "200", "simulated hours per repetition");
        add(c, "lambda_ve", "20", "vehicle arrival rate per hour");
        add(c, "lambda_app", "2", "application arrival rate per hour");
        add(c, "lambda_d", "1", "application completion rate per hour");
        add(c, "lambda_z", "1", "vehicle departure rate per hour");
        add(c, "lambda_u", "6", "recruitment rate per hour");
        add(c, "l_a", "20", "lowest application requirement");
        add(c, "h_a", "30", "highest application requirement");
        add(c, "l_v", "20", "lowest vehicle capacity");
        add(c, "h_v", "26", "highest vehicle capacity");
        add(c, "max_groups", "1", "groups a vehicle may host at once");
    }
    {
        auto& c = make("sweep", "analytic and simulated MTTF side by side", sweep);
        common_options(c, false);
        add(c, "preset", "none", "fig5 (n 1..6, lambda_z 1,1/2,1/3, lambda_u 6,4,3) or fig6 "
                                 "(n 1..4, lambda_u 6 scaled by alpha 1..0.3)");
        add(c, "n", "", "number of groups; list or range (required without a preset)");
        add(c, "lambda_z", "1", "vehicle departure rate per hour; list");
        add(c, "lambda_u", "6", "recruitment rate per hour; list");
        add(c, "alpha", "1", "decline factors applied to lambda_u; list");
        add(c, "mode", "both", "both, analyze or simulate");
        sim_options(c);
    }

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    for (const auto& c : commands) {
        if (!c->app->parsed()) continue;
        try {
            return c->body(collect(*c), out, err);
        } catch (const ConfigError& e) {
            err << "error: " << e.what() << '\n';
            return 1;
        } catch (const ModelError& e) {
            err << "error: " << e.what() << '\n';
            return 1;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return 2;
        }
    }
    return 1;
}

}  // namespace vcr::cli
