#include "vcr/certification.hpp"

#include "vcr/dsmp.hpp"
#include "vcr/errors.hpp"

namespace vcr {

using algebra::Difference;
using algebra::EDistribution;
using algebra::EdlTag;
using algebra::EdvExpr;

namespace {

class Suite {
public:
    Suite(Rate lz, const RecruitmentLaw& law, const algebra::LawCheckOptions& opt,
          std::uint64_t seed)
        : lz_(lz), law_(law), opt_(opt), seed_(seed) {}

    // Initial vehicle v belongs to group v/2.
    [[nodiscard]] HState at(int n, StateLabel s) const {
        return canonical_state(DsmpParams{n, lz_, law_}, s);
    }

    void shape(std::string id, std::string claim, const EdvExpr& e, EDistribution want,
               bool extra_ok = true) {
        check(std::move(id), std::move(claim), e, want, want, extra_ok);
    }

    void exact(std::string id, std::string claim, const EdvExpr& e, algebra::ExactLaw ref) {
        check(std::move(id), std::move(claim), e, classify(e), std::move(ref), true);
    }

    void structural(std::string id, std::string claim, bool ok, std::string note) {
        RuleResult r;
        r.id = std::move(id);
        r.claim = std::move(claim);
        r.shape_ok = ok;
        r.pass = ok;
        r.note = std::move(note);
        next_stream();
        out_.push_back(std::move(r));
    }

    std::vector<RuleResult> take() { return std::move(out_); }

private:
    void check(std::string id, std::string claim, const EdvExpr& e, EDistribution want,
               const algebra::Reference& ref, bool extra_ok) {
        RuleResult r;
        r.id = std::move(id);
        r.claim = std::move(claim);
        r.shape_ok = extra_ok && classify(e) == want;
        r.note = e.str();
        Stream s = next_stream();
        try {
            r.verdict = algebra::empirical_law_check(e, ref, opt_, s);
            r.pass = r.shape_ok && r.verdict->pass;
        } catch (const InsufficientConditioning& x) {
            r.note += "; " + std::string(x.what());
        }
        out_.push_back(std::move(r));
    }

    Stream next_stream() { return Stream(seed_, index_++, StreamDomain::Algebra); }

    Rate lz_;
    RecruitmentLaw law_;
    algebra::LawCheckOptions opt_;
    std::uint64_t seed_;
    std::uint64_t index_ = 0;
    std::vector<RuleResult> out_;
};

std::string law_name(EDistribution d) { return algebra::to_string(d); }

}  // namespace

std::vector<RuleResult> certify_rewrites(Rate lambda_z, const RecruitmentLaw& law,
                                         const algebra::LawCheckOptions& opt, std::uint64_t seed) {
    Suite suite(lambda_z, law, opt, seed);
    const HState full = suite.at(3, {3, 0});  // recruiters started in groups 0, 1, 2

    // Closure of pivot-ordered pairs: S1 keeps the earlier-scheduled survivor.
    struct Pair {
        const char* id;
        int completes;  // 0: last event was a departure
        EDistribution v1, v2;
    };
    const Pair pairs[] = {
        {"pair.phi-phi", 0, EDistribution::Phi, EDistribution::Phi},
        {"pair.gamma-gamma", 3, EDistribution::Gamma, EDistribution::Gamma},
        {"pair.psi-psi", 1, EDistribution::Psi, EDistribution::Psi},
        {"pair.gamma-psi", 2, EDistribution::Gamma, EDistribution::Psi},
    };
    for (const auto& p : pairs) {
        HState h = p.completes ? decompose_transition(full, Completion{p.completes}) : full;
        const auto& v1 = h.recruiters()[0];
        const auto& v2 = h.recruiters()[1];
        const bool inputs = classify(v1) == p.v1 && classify(v2) == p.v2;
        suite.shape(std::string(p.id) + ".S1", "V1 - V2 given V1 survives follows gamma",
                    subtract_edv(v1, v2, Difference::FirstMinusSecond), EDistribution::Gamma,
                    inputs);
        suite.shape(std::string(p.id) + ".S2", "V2 - V1 given V2 survives follows psi",
                    subtract_edv(v1, v2, Difference::SecondMinusFirst), EDistribution::Psi,
                    inputs);
    }
    {
        // A psi recruiter started after the one that completed; a gamma one
        // before it. So psi is never pivotally below gamma.
        HState h = decompose_transition(full, Completion{2});
        const auto& g = h.recruiters()[0];
        const auto& s = h.recruiters()[1];
        bool refused = false;
        try {
            (void)subtract_edv(s, g, Difference::FirstMinusSecond);
        } catch (const OrderingError&) {
            refused = true;
        }
        suite.structural("pair.psi-gamma", "a psi-before-gamma pair cannot be formed",
                         refused && classify(g) == EDistribution::Gamma &&
                             classify(s) == EDistribution::Psi,
                         refused ? "ordering error raised" : "subtraction was accepted");
    }

    // A departure turns every recruiter residual into phi; completions turn
    // attached sojourns into second-order exponentials and back. Two groups
    // keep the histories short enough to condition on.
    {
        HState three = decompose_transition(suite.at(3, {2, 0}), Departure{4});
        suite.shape("dep.phi", "phi recruiter outliving an exp1 departure stays phi",
                    three.recruiters()[0], EDistribution::Phi);
    }
    const HState two = suite.at(2, {2, 0});
    {
        HState mid = decompose_transition(two, Completion{2});
        HState h = decompose_transition(mid, Departure{3});
        suite.shape("dep.gamma", "gamma recruiter outliving an exp2 departure becomes phi",
                    h.recruiters()[0], EDistribution::Phi,
                    classify(mid.recruiters()[0]) == EDistribution::Gamma);
        suite.shape("dep.exp2", "exp2 vehicle outliving an exp2 departure becomes exp1",
                    h.sojourns()[0], EDistribution::DotExp,
                    classify(mid.sojourns()[0]) == EDistribution::DdotExp);
        suite.shape("done.exp1", "exp1 vehicle outliving a completion becomes exp2",
                    mid.sojourns()[0], EDistribution::DdotExp,
                    classify(two.sojourns()[0]) == EDistribution::DotExp);
    }
    {
        HState mid = decompose_transition(two, Completion{1});
        HState h = decompose_transition(mid, Departure{1});
        suite.shape("dep.psi", "psi recruiter outliving an exp2 departure becomes phi",
                    h.recruiters()[0], EDistribution::Phi,
                    classify(mid.recruiters()[0]) == EDistribution::Psi);
    }

    // List rewrites.
    for (int i = 1; i <= 3; ++i) {
        HState h = decompose_transition(full, Completion{i});
        const EdlTag want = EdlTag::heterogeneous(EDistribution::Gamma,
                                                  static_cast<std::size_t>(i - 1),
                                                  EDistribution::Psi,
                                                  static_cast<std::size_t>(3 - i));
        const bool tag_ok = h.recruiters().tag() == want;
        for (std::size_t k = 0; k < h.recruiters().size(); ++k) {
            const auto d = k + 1 < static_cast<std::size_t>(i) ? EDistribution::Gamma
                                                               : EDistribution::Psi;
            suite.shape("list.phiR-minus-" + std::to_string(i) + ".e" + std::to_string(k + 1),
                        "H(phi;R)<2;1> minus element " + std::to_string(i) + " is " +
                            want.str() + "; element " + std::to_string(k + 1) + " is " +
                            law_name(d),
                        h.recruiters()[k], d, tag_ok);
        }
    }
    {
        HState h = decompose_transition(suite.at(3, {1, 0}), Departure{2});
        suite.shape("list.exp1-minus-exp1", "L(exp1)<5> minus an element is L(exp1)<4>",
                    h.sojourns()[0], EDistribution::DotExp,
                    h.sojourns().tag() == EdlTag::homogeneous(EDistribution::DotExp, 4));
    }
    {
        HState h = decompose_transition(decompose_transition(full, Completion{1}), Completion{1});
        const auto last = h.sojourns().size() - 1;
        suite.shape("list.exp2-minus-gamma-psi",
                    "L(exp2) minus a gamma/psi element stays L(exp2)", h.sojourns()[last],
                    EDistribution::DdotExp,
                    h.sojourns().tag() == EdlTag::homogeneous(EDistribution::DdotExp, 5));
    }

    // With exponential recruitment every shape collapses to a plain exponential.
    if (law.is_exponential()) {
        const Rate lu{law.exponential_rate()};
        for (auto d : {EDistribution::DotExp, EDistribution::DdotExp}) {
            auto e = algebra::reference_instance(d, lambda_z, law);
            suite.exact("memoryless." + law_name(d), law_name(d) + " is Exp(lambda_z)", e,
                        algebra::ExactLaw::exponential(lambda_z));
        }
        for (auto d : {EDistribution::Phi, EDistribution::Psi, EDistribution::Gamma}) {
            auto e = algebra::reference_instance(d, lambda_z, law);
            suite.exact("memoryless." + law_name(d), law_name(d) + " is Exp(lambda_u)", e,
                        algebra::ExactLaw::exponential(lu));
        }
    }
    return suite.take();
}

}  // namespace vcr
