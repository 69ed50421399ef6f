#include "vcr/event_algebra.hpp"

#include <algorithm>
#include <cmath>

#include "vcr/errors.hpp"
#include "vcr/stats.hpp"

namespace vcr::algebra {

// ---- LinearForm ----

LinearForm LinearForm::of(AtomId a) {
    LinearForm f;
    f.terms_.emplace_back(a, 1);
    return f;
}

LinearForm LinearForm::operator+(const LinearForm& o) const {
    LinearForm f;
    auto x = terms(), y = o.terms();
    std::size_t i = 0, j = 0;
    while (i < x.size() || j < y.size()) {
        if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
            f.terms_.push_back(x[i++]);
        } else if (i == x.size() || y[j].first < x[i].first) {
            f.terms_.push_back(y[j++]);
        } else {
            int c = x[i].second + y[j].second;
            if (c != 0) f.terms_.emplace_back(x[i].first, c);
            ++i;
            ++j;
        }
    }
    return f;
}

LinearForm LinearForm::operator-(const LinearForm& o) const {
    LinearForm neg;
    neg.terms_.reserve(o.terms_.size());
    for (auto [a, c] : o.terms_) neg.terms_.emplace_back(a, -c);
    return *this + neg;
}

bool LinearForm::nonnegative() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.second > 0; });
}

double LinearForm::evaluate(std::span<const double> v) const {
    double s = 0;
    for (auto [a, c] : terms_) s += c * v[a.index];
    return s;
}

// ---- Universe ----

Universe::Universe(Rate lambda_z, RecruitmentLaw recruitment)
    : lambda_z_(lambda_z), recruitment_(std::move(recruitment)) {
    if (!(lambda_z.value() > 0)) throw ModelError("sojourn rate must be positive");
    epochs_.emplace_back();  // time zero
}

AtomId Universe::add(AtomLaw law, std::string name) {
    if (name.empty())
        name = law == AtomLaw::Sojourn ? "Z" + std::to_string(++sojourns_)
                                       : "U" + std::to_string(++recruitments_);
    atoms_.push_back({law, std::move(name)});
    return AtomId{static_cast<std::uint32_t>(atoms_.size() - 1)};
}

std::size_t Universe::register_epoch(const LinearForm& t) {
    for (std::size_t k = 0; k < epochs_.size(); ++k)
        if (epochs_[k] == t) return k;
    epochs_.push_back(t);
    return epochs_.size() - 1;
}

std::size_t Universe::epoch_rank(const LinearForm& t) const {
    for (std::size_t k = 0; k < epochs_.size(); ++k)
        if (epochs_[k] == t) return k;
    throw OrderingError("pivot is not a registered event time");
}

double Universe::draw(AtomId a, Stream& s) const {
    return law(a) == AtomLaw::Sojourn ? s.exponential(lambda_z_.value()) : recruitment_.sample(s);
}

// ---- Term ----

struct Term::Node {
    Kind kind;
    AtomId atom;
    std::optional<Term> l, r;
    LinearForm form;
};

Term Term::zero() {
    static const Term z(std::make_shared<const Node>(Node{Kind::Zero, {}, {}, {}, {}}));
    return z;
}

Term Term::atom(AtomId a) {
    return Term(std::make_shared<const Node>(Node{Kind::Atom, a, {}, {}, LinearForm::of(a)}));
}

Term Term::plus(Term a, Term b) {
    auto f = a.form() + b.form();
    return Term(std::make_shared<const Node>(Node{Kind::Plus, {}, std::move(a), std::move(b), f}));
}

Term Term::minus(Term a, Term b) {
    auto f = a.form() - b.form();
    return Term(
        std::make_shared<const Node>(Node{Kind::Minus, {}, std::move(a), std::move(b), f}));
}

Term Term::sum_of(const LinearForm& f) {
    if (!f.nonnegative()) throw StructuralError("time expression has a negative coefficient");
    std::optional<Term> acc;
    for (auto [a, c] : f.terms())
        for (int k = 0; k < c; ++k) acc = acc ? plus(*acc, atom(a)) : atom(a);
    return acc ? *acc : zero();
}

Term::Kind Term::kind() const { return node_->kind; }

AtomId Term::atom_id() const {
    if (node_->kind != Kind::Atom) throw StructuralError("not an atom");
    return node_->atom;
}

const Term& Term::lhs() const {
    if (!node_->l) throw StructuralError("leaf has no operands");
    return *node_->l;
}

const Term& Term::rhs() const {
    if (!node_->r) throw StructuralError("leaf has no operands");
    return *node_->r;
}

const LinearForm& Term::form() const { return node_->form; }

bool Term::same_tree(const Term& o) const {
    if (node_ == o.node_) return true;
    if (kind() != o.kind()) return false;
    switch (kind()) {
        case Kind::Zero: return true;
        case Kind::Atom: return atom_id() == o.atom_id();
        default: return lhs().same_tree(o.lhs()) && rhs().same_tree(o.rhs());
    }
}

std::string Term::str(const Universe& u) const {
    auto wrap = [&](const Term& t) {
        bool binary = t.kind() == Kind::Plus || t.kind() == Kind::Minus;
        return binary ? "(" + t.str(u) + ")" : t.str(u);
    };
    switch (kind()) {
        case Kind::Zero: return "0";
        case Kind::Atom: return u.name(atom_id());
        case Kind::Plus: return lhs().str(u) + " + " + wrap(rhs());
        case Kind::Minus: {
            // A left minus-operand is parenthesised to mirror the canonical shapes.
            auto left = lhs().kind() == Kind::Minus ? wrap(lhs()) : lhs().str(u);
            return left + " - " + wrap(rhs());
        }
    }
    return "?";
}

// ---- structural recursions ----

Term duration(const Term& t) {
    switch (t.kind()) {
        case Term::Kind::Atom: return t;
        case Term::Kind::Minus: return duration(t.lhs());
        default: return Term::zero();
    }
}

namespace {

Term raw_reducer(const Term& t) {
    if (t.kind() != Term::Kind::Minus) return Term::zero();
    return Term::plus(raw_reducer(t.lhs()), Term::plus(t.rhs(), raw_reducer(t.rhs())));
}

Term tidy(const Term& raw) {
    return raw.form().nonnegative() ? Term::sum_of(raw.form()) : raw;
}

bool is_time_term(const Term& t) {
    switch (t.kind()) {
        case Term::Kind::Atom: return true;
        case Term::Kind::Plus:
        case Term::Kind::Minus: return is_time_term(t.lhs()) && is_time_term(t.rhs());
        default: return false;
    }
}

}  // namespace

Term reducer(const Term& t) { return tidy(raw_reducer(t)); }

Term pivot(const Term& t) {
    Term raw = Term::minus(Term::plus(t, raw_reducer(t)), duration(t));
    return tidy(raw);
}

std::string to_string(EDistribution d) {
    switch (d) {
        case EDistribution::Srv_Exp: return "exp";
        case EDistribution::Srv_General: return "R";
        case EDistribution::DotExp: return "exp1";
        case EDistribution::DdotExp: return "exp2";
        case EDistribution::Phi: return "phi";
        case EDistribution::Psi: return "psi";
        case EDistribution::Gamma: return "gamma";
        case EDistribution::Other: return "other";
    }
    return "other";
}

// ---- EdvExpr ----

EdvExpr::EdvExpr(UniversePtr u, Term tree, std::vector<LinearForm> constraints)
    : u_(std::move(u)),
      tree_(std::move(tree)),
      dur_(vcr::algebra::duration(tree_)),
      red_(vcr::algebra::reducer(tree_)),
      piv_(vcr::algebra::pivot(tree_)) {
    if (!u_) throw StructuralError("expression without a universe");
    for (auto& c : constraints)
        if (std::find(constraints_.begin(), constraints_.end(), c) == constraints_.end())
            constraints_.push_back(std::move(c));
}

EdvExpr make_edv(UniversePtr u, Term t, std::vector<LinearForm> c) {
    return EdvExpr(std::move(u), std::move(t), std::move(c));
}

EdvExpr EdvExpr::srv(UniversePtr u, AtomId a) {
    if (!u || a.index >= u->size()) throw StructuralError("atom is not part of the universe");
    return EdvExpr(std::move(u), Term::atom(a), {});
}

EdvExpr EdvExpr::residual(UniversePtr u, AtomId a, const Term& elapsed) {
    if (elapsed.form().is_zero()) return srv(std::move(u), a);
    Term t = Term::minus(Term::atom(a), Term::sum_of(elapsed.form()));
    u->register_epoch(elapsed.form());
    return EdvExpr(std::move(u), t, {t.form()});
}

bool EdvExpr::is_srv() const { return red_.form().is_zero() && piv_.form().is_zero(); }

// ---- ordering and subtraction ----

bool pivotally_leq(const EdvExpr& v1, const EdvExpr& v2) {
    if (v1.universe() != v2.universe())
        throw OrderingError("expressions belong to different universes");
    if (v1.duration().form() == v2.duration().form())
        throw OrderingError("pivotal order undefined for equal durations: " + v1.str() + " vs " +
                            v2.str());
    if (!v1.is_srv() && v2.is_srv()) return true;
    if (!(v1.reducer().form() == v2.reducer().form())) return false;
    if (v1.pivot().form() == v2.pivot().form()) return true;
    const auto& u = *v1.universe();
    return u.epoch_rank(v1.pivot().form()) <= u.epoch_rank(v2.pivot().form());
}

EdvExpr subtract_edv(const EdvExpr& v1, const EdvExpr& v2, Difference which) {
    if (v1.duration().form().is_zero() || v2.duration().form().is_zero())
        throw StructuralError("operand is not an event variable");
    LinearForm xi1, xi2;
    if (v1.is_srv() && v2.is_srv()) {
        if (v1.universe() != v2.universe())
            throw OrderingError("expressions belong to different universes");
        if (v1.duration().form() == v2.duration().form())
            throw OrderingError("cannot subtract a variable from itself");
    } else if (v2.is_srv()) {
        if (v1.universe() != v2.universe())
            throw OrderingError("expressions belong to different universes");
        xi1 = v1.pivot().form();
        xi2 = v1.reducer().form();  // scheduled now
    } else {
        if (!pivotally_leq(v1, v2))
            throw OrderingError("precondition violated: " + v1.str() + " is not pivotally below " +
                                v2.str());
        xi1 = v1.pivot().form();
        xi2 = v2.pivot().form();
    }

    const LinearForm d = xi2 - xi1;
    const Term g1 = v1.duration(), g2 = v2.duration();
    Term adj = g1;
    if (!d.is_zero()) {
        Term dt = xi1.is_zero() ? Term::sum_of(xi2)
                                : Term::minus(Term::sum_of(xi2), Term::sum_of(xi1));
        adj = Term::minus(g1, dt);
    }
    Term t = which == Difference::FirstMinusSecond ? Term::minus(adj, g2) : Term::minus(g2, adj);

    std::vector<LinearForm> cons(v1.constraints().begin(), v1.constraints().end());
    cons.insert(cons.end(), v2.constraints().begin(), v2.constraints().end());
    cons.push_back(t.form());
    if (!d.is_zero() && !d.nonnegative()) cons.push_back(d);

    return make_edv(v1.universe(), t, std::move(cons));
}

// ---- classification ----

namespace {

struct Operand {
    AtomId atom;
    bool adjusted;  // carries a pivot-difference term
};

// Atom, or Atom minus a pure time expression.
std::optional<Operand> operand(const Term& t) {
    if (t.kind() == Term::Kind::Atom) return Operand{t.atom_id(), false};
    if (t.kind() == Term::Kind::Minus && t.lhs().kind() == Term::Kind::Atom &&
        is_time_term(t.rhs()) && !t.rhs().form().is_zero())
        return Operand{t.lhs().atom_id(), true};
    return std::nullopt;
}

EDistribution by_laws(AtomLaw survivor, AtomLaw event, bool survivor_earlier, bool adjusted) {
    using L = AtomLaw;
    if (survivor == L::Sojourn)
        return event == L::Sojourn ? EDistribution::DotExp : EDistribution::DdotExp;
    if (event == L::Sojourn) return EDistribution::Phi;
    if (!adjusted) return EDistribution::Other;  // two recruiters scheduled together
    return survivor_earlier ? EDistribution::Gamma : EDistribution::Psi;
}

}  // namespace

EDistribution classify(const EdvExpr& v) {
    const Term& t = v.tree();
    const Universe& u = *v.universe();
    if (t.kind() == Term::Kind::Atom)
        return u.law(t.atom_id()) == AtomLaw::Sojourn ? EDistribution::Srv_Exp
                                                      : EDistribution::Srv_General;
    if (t.kind() != Term::Kind::Minus) return EDistribution::Other;
    const Term &l = t.lhs(), &r = t.rhs();

    // (survivor - D) - event
    if (r.kind() == Term::Kind::Atom) {
        if (auto s = operand(l))
            return by_laws(u.law(s->atom), u.law(r.atom_id()), true, s->adjusted);
    }
    if (l.kind() == Term::Kind::Atom) {
        // survivor - (event - D)
        if (auto e = operand(r); e && e->adjusted)
            return by_laws(u.law(l.atom_id()), u.law(e->atom), false, true);
        // survivor - (sum of event times): the raw second-order exponential shape
        if (r.kind() == Term::Kind::Plus && is_time_term(r) && r.form().nonnegative() &&
            u.law(l.atom_id()) == AtomLaw::Sojourn) {
            bool has_recruit = std::any_of(r.form().terms().begin(), r.form().terms().end(),
                                           [&](const auto& p) {
                                               return u.law(p.first) == AtomLaw::Recruitment;
                                           });
            return has_recruit ? EDistribution::DdotExp : EDistribution::DotExp;
        }
    }
    return EDistribution::Other;
}

// ---- EDL ----

EdlTag EdlTag::homogeneous(EDistribution a, std::size_t n) { return {a, n, EDistribution::Other, 0, true}; }

EdlTag EdlTag::heterogeneous(EDistribution a, std::size_t n, EDistribution b, std::size_t m) {
    if (m == 0) return homogeneous(a, n);
    if (n == 0) return homogeneous(b, m);
    if (a == b) return homogeneous(a, n + m);
    return {a, n, b, m, true};
}

std::string EdlTag::str() const {
    if (!regular) return "irregular";
    if (tail_len == 0)
        return "L(" + to_string(head) + ")<" + std::to_string(head_len) + ">";
    return "H(" + to_string(head) + ";" + to_string(tail) + ")<" + std::to_string(head_len) + ";" +
           std::to_string(tail_len) + ">";
}

Edl::Edl(std::vector<EdvExpr> items) : items_(std::move(items)) {
    for (std::size_t i = 0; i < items_.size(); ++i)
        for (std::size_t j = i + 1; j < items_.size(); ++j)
            if (!pivotally_leq(items_[i], items_[j]))
                throw OrderingError("list is not pivot-ordered at positions " + std::to_string(i) +
                                    " and " + std::to_string(j));
}

EdlTag Edl::tag() const {
    if (items_.empty()) return EdlTag::homogeneous(EDistribution::Other, 0);
    std::vector<std::pair<EDistribution, std::size_t>> runs;
    for (const auto& v : items_) {
        auto d = classify(v);
        if (runs.empty() || runs.back().first != d)
            runs.emplace_back(d, 1);
        else
            ++runs.back().second;
    }
    if (runs.size() == 1) return EdlTag::homogeneous(runs[0].first, runs[0].second);
    if (runs.size() == 2)
        return EdlTag::heterogeneous(runs[0].first, runs[0].second, runs[1].first, runs[1].second);
    EdlTag t;
    t.regular = false;
    t.head_len = items_.size();
    return t;
}

namespace {

bool all_leq(const Edl& a, const Edl& b) {
    for (const auto& x : a.items())
        for (const auto& y : b.items())
            if (!pivotally_leq(x, y)) return false;
    return true;
}

}  // namespace

Edl edl_concat(const Edl& a, const Edl& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    std::vector<EdvExpr> out;
    if (all_leq(a, b)) {
        out.assign(a.items().begin(), a.items().end());
        out.insert(out.end(), b.items().begin(), b.items().end());
    } else if (all_leq(b, a)) {
        out.assign(b.items().begin(), b.items().end());
        out.insert(out.end(), a.items().begin(), a.items().end());
    } else {
        throw OrderingError("lists are not pivotally comparable");
    }
    return Edl(std::move(out));
}

Edl edl_subtract(const Edl& l, const EdvExpr& s) {
    std::vector<EdvExpr> out;
    out.reserve(l.size());
    for (const auto& x : l.items()) {
        if (x.tree().same_tree(s.tree())) continue;
        if (pivotally_leq(s, x))
            out.push_back(subtract_edv(s, x, Difference::SecondMinusFirst));
        else if (pivotally_leq(x, s))
            out.push_back(subtract_edv(x, s, Difference::FirstMinusSecond));
        else
            throw OrderingError("event " + s.str() + " is not comparable with " + x.str());
    }
    // s has happened, so the survivors' reducers are realized times. Pairwise
    // probes alone never touch the registry.
    for (const auto& x : out) x.universe()->register_epoch(x.reducer().form());
    return Edl(std::move(out));
}

// ---- sampling ----

ConditionedDraws sample_conditioned(const Universe& u, std::span<const LinearForm> forms,
                                    std::span<const LinearForm> constraints, std::size_t count,
                                    Stream& s) {
    std::vector<AtomId> used;
    auto collect = [&](const LinearForm& f) {
        for (auto [a, c] : f.terms()) used.push_back(a);
    };
    for (const auto& f : forms) collect(f);
    for (const auto& f : constraints) collect(f);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());

    ConditionedDraws out;
    out.width = forms.size();
    out.values.reserve(count * forms.size());
    std::vector<double> val(u.size(), 0.0);
    std::uint64_t attempts = 0, accepted = 0;
    constexpr std::uint64_t pilot = 10000;
    constexpr double floor_rate = 1e-3;
    while (accepted < count) {
        ++attempts;
        for (AtomId a : used) val[a.index] = u.draw(a, s);
        bool ok = std::all_of(constraints.begin(), constraints.end(),
                              [&](const LinearForm& c) { return c.evaluate(val) > 0; });
        if (ok) {
            ++accepted;
            for (const auto& f : forms) out.values.push_back(f.evaluate(val));
        }
        if (attempts >= pilot &&
            static_cast<double>(accepted) < floor_rate * static_cast<double>(attempts))
            throw InsufficientConditioning("conditioning event has empirical probability " +
                                           std::to_string(static_cast<double>(accepted) /
                                                          static_cast<double>(attempts)));
    }
    out.acceptance = static_cast<double>(accepted) / static_cast<double>(attempts);
    return out;
}

ExactLaw ExactLaw::exponential(Rate r) {
    double rate = r.value();
    return {"Exp(" + std::to_string(rate) + ")", [rate](Stream& s) { return s.exponential(rate); }};
}

EdvExpr reference_instance(EDistribution d, Rate lambda_z, const RecruitmentLaw& law) {
    auto u = std::make_shared<Universe>(lambda_z, law);
    using D = Difference;
    auto z = [&] { return EdvExpr::srv(u, u->add(AtomLaw::Sojourn)); };
    auto r = [&] { return EdvExpr::srv(u, u->add(AtomLaw::Recruitment)); };
    switch (d) {
        case EDistribution::Srv_Exp: return z();
        case EDistribution::Srv_General: return r();
        case EDistribution::DotExp: {
            auto a = z(), b = z();
            return subtract_edv(a, b, D::FirstMinusSecond);  // b departed first
        }
        case EDistribution::DdotExp: {
            auto x = z(), gone = z();
            auto x1 = subtract_edv(x, gone, D::FirstMinusSecond);
            return subtract_edv(x1, r(), D::FirstMinusSecond);  // recruiter finished first
        }
        case EDistribution::Phi: {
            auto gone = z(), e = z();
            auto rec = r();
            auto e1 = subtract_edv(e, gone, D::FirstMinusSecond);
            return subtract_edv(e1, rec, D::SecondMinusFirst);  // e1 departs
        }
        case EDistribution::Psi:
        case EDistribution::Gamma: {
            auto d1 = z(), d2 = z();
            auto r1 = r();
            auto d2a = subtract_edv(d2, d1, D::FirstMinusSecond);
            auto w1 = subtract_edv(d2a, r1, D::SecondMinusFirst);  // phi after d2 leaves
            auto r2 = r();
            return subtract_edv(w1, r2, d == EDistribution::Psi ? D::SecondMinusFirst
                                                                 : D::FirstMinusSecond);
        }
        case EDistribution::Other: break;
    }
    throw Error("no reference shape for law 'other'");
}

LawVerdict empirical_law_check(const EdvExpr& expr, const Reference& ref,
                               const LawCheckOptions& opt, Stream& s) {
    if (opt.samples < 10000) throw Error("empirical_law_check needs at least 1e4 samples");
    const Universe& u = *expr.universe();
    LinearForm f = expr.form();
    auto mine = sample_conditioned(u, std::span(&f, 1), expr.constraints(), opt.samples, s);

    LawVerdict v;
    v.acceptance = mine.acceptance;
    std::vector<double> other;
    if (auto* shape = std::get_if<EDistribution>(&ref)) {
        auto inst = reference_instance(*shape, u.lambda_z(), u.recruitment());
        LinearForm g = inst.form();
        auto theirs = sample_conditioned(*inst.universe(), std::span(&g, 1), inst.constraints(),
                                         opt.samples, s);
        v.reference_acceptance = theirs.acceptance;
        other = std::move(theirs.values);
    } else {
        const auto& law = std::get<ExactLaw>(ref);
        other.reserve(opt.samples);
        for (std::size_t k = 0; k < opt.samples; ++k) other.push_back(law.draw(s));
    }
    auto ks = ks_two_sample(std::move(mine.values), std::move(other), opt.significance);
    v.statistic = ks.statistic;
    v.threshold = ks.threshold;
    v.pass = ks.pass;
    return v;
}

}  // namespace vcr::algebra
