#pragma once

// Decomposed semi-Markov process for n replicated groups. States S(i,j): i
// groups are recruiting, j is the start-order of the recruiter whose
// completion led here (0 after a departure). F is absorbing.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vcr/event_algebra.hpp"
#include "vcr/recruitment.hpp"
#include "vcr/rng.hpp"
#include "vcr/units.hpp"

namespace vcr {

struct StateLabel {
    int i = 0;
    int j = 0;
    bool failed = false;

    static StateLabel F() { return {0, 0, true}; }
    auto operator<=>(const StateLabel&) const = default;
    [[nodiscard]] std::string str() const;
};

struct DsmpParams {
    int n = 1;
    Rate lambda_z{1.0};
    RecruitmentLaw recruitment;

    void validate() const;  // throws ModelError
};

// Transient labels in a fixed order: (0,0) (0,1) (1,0) (1,1) (1,2) ... (n,0).
std::vector<StateLabel> state_labels(int n);
// Position of a transient label in state_labels(n); throws for F or a label
// that does not exist for this n.
std::size_t state_index(int n, StateLabel s);
inline std::size_t state_count(int n) {  // including F
    return static_cast<std::size_t>((n + 1) * (n + 2) / 2 + 1);
}

struct Departure {
    std::uint64_t vehicle;  // 0..2n-1 initially (group = id/2), then 2n, 2n+1, ... per recruit
};
struct Completion {
    int order;  // 1-based rank among active recruiters by start time
};
using DsmpEvent = std::variant<Departure, Completion>;

// A symbolic H-state: residual sojourns of the attached vehicles and residual
// recruitment durations, as event-algebra lists. Copies share the atom
// universe, so an HState and its successors must stay on one thread.
class HState {
public:
    static HState initial(const DsmpParams& params);
    static HState failure(const DsmpParams& params);

    [[nodiscard]] StateLabel label() const { return label_; }
    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] const algebra::UniversePtr& universe() const { return u_; }
    [[nodiscard]] const algebra::Edl& sojourns() const { return sojourns_; }
    [[nodiscard]] const algebra::Edl& recruiters() const { return recruiters_; }
    [[nodiscard]] std::span<const std::uint64_t> vehicles() const { return vehicles_; }
    [[nodiscard]] std::span<const int> vehicle_groups() const { return vehicle_group_; }
    [[nodiscard]] std::span<const int> recruiter_groups() const { return recruiter_group_; }
    [[nodiscard]] std::span<const DsmpEvent> path() const { return path_; }
    [[nodiscard]] bool is_recruiting(int group) const;

private:
    friend HState decompose_transition(const HState&, const DsmpEvent&);
    HState() = default;

    StateLabel label_;
    int n_ = 0;
    algebra::UniversePtr u_;
    algebra::Edl sojourns_;
    std::vector<std::uint64_t> vehicles_;
    std::vector<int> vehicle_group_;
    algebra::Edl recruiters_;
    std::vector<int> recruiter_group_;
    std::vector<DsmpEvent> path_;
    std::uint64_t next_vehicle_ = 0;
};

// Applies one event through the list algebra. Throws ModelError when the
// event names a vehicle or recruiter that is not present, or the state is F.
HState decompose_transition(const HState& s, const DsmpEvent& e);

// The (i,j) whose list shapes the state carries, read off the lists alone;
// nullopt when they match no canonical shape.
std::optional<StateLabel> canonical_label(const HState& s);

// Reached from S(0,0) along the shortest canonical path.
HState canonical_state(const DsmpParams& params, StateLabel s);
// Every transient state followed by F.
std::vector<HState> enumerate_states(const DsmpParams& params);

// ---- transition tables ----

struct TransitionTriple {
    std::vector<double> p;  // p[k-1]: recruiter of order k completes first
    double q = 0;           // a paired vehicle departs
    double b = 0;           // a recruiter departs
    [[nodiscard]] double total() const;
};

struct StateRow {
    StateLabel state;
    TransitionTriple probs;
    double sojourn = 0;  // E[W], hours
};

class DsmpTable {
public:
    explicit DsmpTable(int n);
    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] StateRow& at(StateLabel s) { return rows_.at(state_index(n_, s)); }
    [[nodiscard]] const StateRow& at(StateLabel s) const { return rows_.at(state_index(n_, s)); }
    [[nodiscard]] std::span<const StateRow> rows() const { return rows_; }
    [[nodiscard]] std::span<StateRow> rows() { return rows_; }
    // Entries in [0,1], p sized i, closure within tol. Throws ModelError.
    void validate(double tol = 1e-12) const;

private:
    int n_;
    std::vector<StateRow> rows_;
};

TransitionTriple transition_probs_exponential(const DsmpParams& params, int i);
Hours expected_sojourn_exponential(const DsmpParams& params, int i);
DsmpTable exponential_table(const DsmpParams& params);

// ---- Monte Carlo estimates for general recruitment laws ----

struct Estimate {
    double value = 0;
    double se = 0;  // standard error
};

struct StateEstimate {
    std::vector<Estimate> p;
    Estimate q, b, sojourn;
    double ess_fraction = 1;  // effective sample size over trials
    std::size_t trials = 0;
};

// Sequential importance sampling along the state's path from S(0,0): each
// path step is forced and weighted by its probability, then the race out of
// the state is run. Sojourns are memoryless, so only recruitment residuals
// carry history. Throws InsufficientConditioning when the effective sample
// size falls under 1e-3 of the trials.
StateEstimate estimate_state_mc(const DsmpParams& params, const HState& s, std::size_t trials,
                                Stream& rng);
// Rejection sampling on the state's symbolic constraint set; exact but only
// usable while the conditioning event is not too rare.
StateEstimate estimate_state_rejection(const HState& s, std::size_t trials, Stream& rng);

struct TransitionEstimate {
    TransitionTriple probs;
    std::vector<double> p_se;
    double q_se = 0, b_se = 0;
};
TransitionEstimate transition_probs_mc(const DsmpParams& params, const HState& s,
                                       std::size_t trials, Stream& rng);
Estimate expected_sojourn_mc(const DsmpParams& params, const HState& s, std::size_t trials,
                             Stream& rng);

// One estimate per transient state, each on its own stream (master, index).
DsmpTable mc_table(const DsmpParams& params, std::size_t trials, std::uint64_t master_seed);

// ---- solvers ----

enum class Solver { LinearSystem, GeneralRecursion, ExponentialClosedForm };
std::string to_string(Solver s);

enum class Grouping {
    ProofLine,  // (i+1) multiplies only the beta(i+1) A'(i+2) term
    Statement,  // (i+1) multiplies the whole bracket
};
std::string to_string(Grouping g);

struct StateValue {
    StateLabel state;
    double sojourn = 0;
    std::optional<double> time_to_failure;  // E[Q], when the solver yields it
};

struct MttfReport {
    Hours value;
    Solver solver = Solver::LinearSystem;
    std::vector<StateValue> states;
    std::vector<Grouping> matched;  // closed form only; both when indistinguishable
};

MttfReport mttf_linear_system(const DsmpTable& t);
MttfReport mttf_general_recursion(const DsmpTable& t);
// Evaluates both groupings and keeps those agreeing with the linear system to
// 1e-6 relative; FormulaDiscrepancy when neither does.
MttfReport mttf_exponential_closed_form(const DsmpParams& params);

struct ClosedFormCandidates {
    double proof_line = 0;
    double statement = 0;
};
ClosedFormCandidates closed_form_candidates(const DsmpParams& params);

}  // namespace vcr
