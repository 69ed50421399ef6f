#pragma once

// Symbolic residual-time algebra. An EDV is a tree over random atoms (vehicle
// sojourns Z and recruitment durations U) together with the positivity
// constraints that the event history imposed on it. Subtraction always
// produces the canonical two-level shape, so the residual laws reduce to a
// finite pattern match and can be certified by conditional sampling.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vcr/recruitment.hpp"
#include "vcr/rng.hpp"
#include "vcr/units.hpp"

namespace vcr::algebra {

enum class AtomLaw { Sojourn, Recruitment };

struct AtomId {
    std::uint32_t index = 0;
    auto operator<=>(const AtomId&) const = default;
};

// Integer combination of atoms; the normal form used for all equality tests.
class LinearForm {
public:
    LinearForm() = default;
    static LinearForm of(AtomId a);

    LinearForm operator+(const LinearForm& o) const;
    LinearForm operator-(const LinearForm& o) const;
    bool operator==(const LinearForm&) const = default;

    [[nodiscard]] bool is_zero() const { return terms_.empty(); }
    [[nodiscard]] bool nonnegative() const;  // every coefficient > 0 (or empty)
    [[nodiscard]] double evaluate(std::span<const double> atom_values) const;
    [[nodiscard]] std::span<const std::pair<AtomId, int>> terms() const { return terms_; }

private:
    std::vector<std::pair<AtomId, int>> terms_;  // sorted by atom, no zero coefficients
};

// Atoms plus the registry of event times seen so far. Event times are
// registered in the order the events happen, and that order is what pivots
// are compared by.
class Universe {
public:
    Universe(Rate lambda_z, RecruitmentLaw recruitment);

    AtomId add(AtomLaw law, std::string name = {});  // default names Z1.., U1..
    [[nodiscard]] AtomLaw law(AtomId a) const { return atoms_.at(a.index).law; }
    [[nodiscard]] const std::string& name(AtomId a) const { return atoms_.at(a.index).name; }
    [[nodiscard]] std::size_t size() const { return atoms_.size(); }
    [[nodiscard]] Rate lambda_z() const { return lambda_z_; }
    [[nodiscard]] const RecruitmentLaw& recruitment() const { return recruitment_; }

    // Idempotent; returns the epoch rank. The zero time is always rank 0.
    std::size_t register_epoch(const LinearForm& t);
    // Throws OrderingError if t was never registered.
    [[nodiscard]] std::size_t epoch_rank(const LinearForm& t) const;

    double draw(AtomId a, Stream& s) const;

private:
    struct AtomInfo {
        AtomLaw law;
        std::string name;
    };
    Rate lambda_z_;
    RecruitmentLaw recruitment_;
    std::vector<AtomInfo> atoms_;
    std::vector<LinearForm> epochs_;
    int sojourns_ = 0, recruitments_ = 0;
};

using UniversePtr = std::shared_ptr<Universe>;

// Immutable expression tree. Shares subtrees; copying is cheap.
class Term {
public:
    enum class Kind { Zero, Atom, Plus, Minus };

    static Term zero();
    static Term atom(AtomId a);
    static Term plus(Term a, Term b);
    static Term minus(Term a, Term b);
    // Left-leaning sum of the atoms of a form with positive coefficients.
    static Term sum_of(const LinearForm& f);

    [[nodiscard]] Kind kind() const;
    [[nodiscard]] AtomId atom_id() const;  // only for Kind::Atom
    [[nodiscard]] const Term& lhs() const;
    [[nodiscard]] const Term& rhs() const;
    [[nodiscard]] const LinearForm& form() const;
    [[nodiscard]] bool same_tree(const Term& o) const;
    [[nodiscard]] std::string str(const Universe& u) const;

private:
    struct Node;
    explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

// Structural recursions on raw trees: duration, reducer, pivot.
Term duration(const Term& t);
Term reducer(const Term& t);
Term pivot(const Term& t);

enum class EDistribution { Srv_Exp, Srv_General, DotExp, DdotExp, Phi, Psi, Gamma, Other };
std::string to_string(EDistribution d);

class EdvExpr {
public:
    // A fresh variable: the atom itself, with zero reducer and pivot.
    static EdvExpr srv(UniversePtr u, AtomId a);
    // Residual of atom a once `elapsed` has passed since time zero, given it
    // is still running: a - elapsed with the constraint a > elapsed.
    static EdvExpr residual(UniversePtr u, AtomId a, const Term& elapsed);

    [[nodiscard]] const Term& tree() const { return tree_; }
    [[nodiscard]] const Term& duration() const { return dur_; }
    [[nodiscard]] const Term& reducer() const { return red_; }
    [[nodiscard]] const Term& pivot() const { return piv_; }
    [[nodiscard]] const LinearForm& form() const { return tree_.form(); }
    [[nodiscard]] std::span<const LinearForm> constraints() const { return constraints_; }
    [[nodiscard]] bool is_srv() const;
    [[nodiscard]] const UniversePtr& universe() const { return u_; }
    [[nodiscard]] std::string str() const { return tree_.str(*u_); }

private:
    friend EdvExpr make_edv(UniversePtr, Term, std::vector<LinearForm>);
    EdvExpr(UniversePtr u, Term tree, std::vector<LinearForm> constraints);

    UniversePtr u_;
    Term tree_, dur_, red_, piv_;
    std::vector<LinearForm> constraints_;
};

bool pivotally_leq(const EdvExpr& v1, const EdvExpr& v2);

enum class Difference {
    FirstMinusSecond,  // v1 survives the event v2
    SecondMinusFirst,  // v2 survives the event v1
};

// Canonical difference of v1 and v2, requiring v1 pivotally below v2. A bare
// SRV on the right is read as scheduled at v1's reducer. Pure: nothing is
// recorded in the universe.
EdvExpr subtract_edv(const EdvExpr& v1, const EdvExpr& v2, Difference which);

EDistribution classify(const EdvExpr& v);

// Run-length summary of an EDL's laws: homogeneous when tail_len == 0.
struct EdlTag {
    EDistribution head = EDistribution::Other;
    std::size_t head_len = 0;
    EDistribution tail = EDistribution::Other;
    std::size_t tail_len = 0;
    bool regular = true;  // false when more than two runs occur

    static EdlTag homogeneous(EDistribution a, std::size_t n);
    static EdlTag heterogeneous(EDistribution a, std::size_t n, EDistribution b, std::size_t m);
    bool operator==(const EdlTag&) const = default;
    [[nodiscard]] std::string str() const;
};

class Edl {
public:
    Edl() = default;
    explicit Edl(std::vector<EdvExpr> items);  // throws OrderingError if not pivot-ordered

    [[nodiscard]] std::size_t size() const { return items_.size(); }
    [[nodiscard]] bool empty() const { return items_.empty(); }
    [[nodiscard]] const EdvExpr& operator[](std::size_t k) const { return items_.at(k); }
    [[nodiscard]] std::span<const EdvExpr> items() const { return items_; }
    [[nodiscard]] EdlTag tag() const;

private:
    std::vector<EdvExpr> items_;
};

Edl edl_concat(const Edl& a, const Edl& b);
// Residual list after the event s: s itself is dropped if present. The
// survivors' reducers are recorded as epochs.
Edl edl_subtract(const Edl& l, const EdvExpr& s);

// ---- sampling ----

// Joint draws of several forms under a shared constraint set.
struct ConditionedDraws {
    std::vector<double> values;  // row-major, one row per accepted draw
    std::size_t width = 0;
    double acceptance = 0.0;
};

ConditionedDraws sample_conditioned(const Universe& u, std::span<const LinearForm> forms,
                                    std::span<const LinearForm> constraints, std::size_t count,
                                    Stream& s);

// Closed-form reference used when a claim names an explicit law.
struct ExactLaw {
    std::string name;
    std::function<double(Stream&)> draw;
    static ExactLaw exponential(Rate r);
};

using Reference = std::variant<EDistribution, ExactLaw>;

// Minimal history that produces a fresh variable of law d.
EdvExpr reference_instance(EDistribution d, Rate lambda_z, const RecruitmentLaw& law);

struct LawCheckOptions {
    std::size_t samples = 100000;
    double significance = 0.01;
};

struct LawVerdict {
    double statistic = 0;
    double threshold = 0;
    bool pass = false;
    double acceptance = 0;            // of the expression's conditioning event
    double reference_acceptance = 1;  // of the reference's
};

LawVerdict empirical_law_check(const EdvExpr& expr, const Reference& ref,
                               const LawCheckOptions& opt, Stream& s);

}  // namespace vcr::algebra
