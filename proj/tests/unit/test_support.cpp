#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "vcr/csv.hpp"
#include "vcr/errors.hpp"
#include "vcr/recruitment.hpp"
#include "vcr/rng.hpp"
#include "vcr/stats.hpp"

using namespace vcr;

TEST_SUITE("support") {
    TEST_CASE("numbers print as the shortest round-trip decimal") {
        for (double v : {0.1, 1.0 / 3.0, 4.5, 1e-300, 123456789.125, -2.5e10}) {
            const auto s = format_number(v);
            CHECK(std::stod(s) == v);
        }
        CHECK(format_number(4.5) == "4.5");
        CHECK(format_number(0.1) == "0.1");
    }

    TEST_CASE("csv writer and reader round trip") {
        std::ostringstream out;
        {
            CsvWriter w(out, {"a", "b", "c"});
            w.row() << 1 << 0.25 << "x";
            w.row() << std::uint64_t{7} << 1.0 / 3.0 << "";
        }
        auto t = parse_csv(out.str());
        REQUIRE(t.rows.size() == 2);
        CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
        CHECK(std::stod(t.rows[1][t.column("b")]) == 1.0 / 3.0);
        CHECK(t.rows[1][2].empty());
        CHECK_THROWS((void)t.column("zzz"));
    }

    TEST_CASE("rows with the wrong width or separators are refused") {
        std::ostringstream out;
        CsvWriter w(out, {"a", "b"});
        CHECK_THROWS(w.row() << 1);
        CHECK_THROWS(w.row() << "x,y" << 2);
    }

    TEST_CASE("accumulator matches direct formulas and merges exactly in order") {
        Accumulator a, b, all;
        std::vector<double> xs{1, 2, 4, 8, 16, 3.5};
        for (std::size_t k = 0; k < xs.size(); ++k) {
            (k < 3 ? a : b).add(xs[k]);
            all.add(xs[k]);
        }
        a.merge(b);
        double mean = 0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double ss = 0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        CHECK(a.count() == 6);
        CHECK(a.mean() == doctest::Approx(mean).epsilon(1e-14));
        CHECK(a.variance() == doctest::Approx(ss / 5).epsilon(1e-13));
        CHECK(a.stderr_of_mean() == doctest::Approx(std::sqrt(ss / 5 / 6)).epsilon(1e-13));
    }

    TEST_CASE("two-sample KS separates rates and accepts equal laws") {
        Stream s(3);
        std::vector<double> a, b, c;
        for (int k = 0; k < 20000; ++k) {
            a.push_back(s.exponential(1));
            b.push_back(s.exponential(1));
            c.push_back(s.exponential(2));
        }
        CHECK(ks_two_sample(a, b, 0.01).pass);
        CHECK_FALSE(ks_two_sample(a, c, 0.01).pass);
        // c(0.01) = 1.6276 for the asymptotic two-sided test.
        CHECK(ks_threshold(0.01, 100, 100) == doctest::Approx(1.6276 * std::sqrt(0.02)).epsilon(1e-3));
        CHECK(ks_statistic({1, 2, 3}, {1, 2, 3}) == 0);
        CHECK(ks_statistic({1, 2}, {3, 4}) == 1);
    }

    TEST_CASE("student t quantiles and paired lower bounds") {
        CHECK(student_t_quantile(0.95, 19) == doctest::Approx(1.729).epsilon(1e-3));
        CHECK(student_t_quantile(0.975, 1e6) == doctest::Approx(1.960).epsilon(1e-3));
        std::vector<double> d{0.1, 0.2, 0.15, 0.05, 0.12};
        double lb = paired_lower_bound(d, 0.95);
        CHECK(lb > 0);
        CHECK(lb < 0.124);
    }

    TEST_CASE("streams are keyed by master, index and domain") {
        Stream a(5, 1, StreamDomain::Trial), b(5, 1, StreamDomain::Trial);
        Stream c(5, 2, StreamDomain::Trial), d(5, 1, StreamDomain::Algebra);
        const auto x = a.bits();
        CHECK(x == b.bits());
        CHECK(x != c.bits());
        CHECK(x != d.bits());
        Stream u(9);
        for (int k = 0; k < 1000; ++k) {
            const double v = u.uniform01();
            CHECK(v > 0);
            CHECK(v < 1);
        }
    }

    TEST_CASE("recruitment laws parse, round trip and sample sensibly") {
        for (const char* spec : {"exp:6", "det:0.25", "uniform:0.1,0.3", "erlang:3,12", "never"}) {
            auto law = RecruitmentLaw::parse(spec);
            CHECK(RecruitmentLaw::parse(law.spec()).spec() == law.spec());
        }
        CHECK(RecruitmentLaw::parse("exp:6").mean() == doctest::Approx(1.0 / 6));
        CHECK(RecruitmentLaw::parse("erlang:3,12").mean() == doctest::Approx(0.25));
        CHECK(RecruitmentLaw::parse("uniform:0.1,0.3").mean() == doctest::Approx(0.2));
        CHECK(std::isinf(RecruitmentLaw::parse("never").mean()));
        CHECK(RecruitmentLaw::parse("det:0.25").cdf(0.2) == 0);
        CHECK(RecruitmentLaw::parse("det:0.25").cdf(0.3) == 1);
        CHECK(RecruitmentLaw::parse("exp:2").cdf(0.5) == doctest::Approx(1 - std::exp(-1.0)));

        Stream s(1);
        Accumulator acc;
        const auto law = RecruitmentLaw::parse("erlang:3,12");
        for (int k = 0; k < 100000; ++k) acc.add(law.sample(s));
        CHECK(std::abs(acc.mean() - 0.25) < 4 * acc.stderr_of_mean());

        CHECK_THROWS_AS(RecruitmentLaw::parse("exp:-1"), ConfigError);
        CHECK_THROWS_AS(RecruitmentLaw::parse("gamma:1"), ConfigError);
        CHECK_THROWS_AS(RecruitmentLaw::parse("uniform:3,1"), ConfigError);
        CHECK_THROWS_AS((void)RecruitmentLaw::parse("det:0.2").exponential_rate(), ConfigError);
    }
}
