#include "vofdi/did.hpp"
#include "vofdi/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

using namespace vofdi;
using namespace vofdi::did;
using panel::PanelConfig;
using panel::PanelData;
using panel::PanelRow;
using doctest::Approx;

namespace {

PanelRow row(const std::string& id, int group, int year, int ofdi) {
    PanelRow r;
    r.firm_id = id;
    r.group = group;
    r.year = year;
    r.ofdi = ofdi;
    return r;
}

PanelData toy_2x2() {
    PanelData p;
    p.rows = {row("ctrl", 0, 2016, 0), row("ctrl", 0, 2017, 0), row("trt", 1, 2016, 0), row("trt", 1, 2017, 1)};
    return p;
}

PanelData balanced(int per_group, std::uint64_t seed, double effect = 0.1639) {
    PanelConfig c;
    c.n_treated = per_group;
    c.n_control = per_group;
    c.attrition_rate = 0.0;
    c.true_effect = effect;
    c.seed = seed;
    return panel::simulate_panel(c);
}

DidSpec spec_at(ControlLevel level = ControlLevel::None) {
    DidSpec s;
    s.control_level = level;
    return s;
}

}  // namespace

TEST_SUITE("did") {

TEST_CASE("control level names round trip") {
    for (const auto level : kAllLevels) CHECK(parse_control_level(to_string(level)) == level);
    CHECK_FALSE(parse_control_level("Everything").has_value());
}

TEST_CASE("design columns") {
    const auto p = panel::simulate_panel(PanelConfig{});
    CHECK(build_design(p, spec_at()).names == std::vector<std::string>{"dP", "dPxdT"});
    const auto full = build_design(p, spec_at(ControlLevel::FullPolynomial));
    CHECK(full.names == std::vector<std::string>{"dP", "dPxdT", "size", "roa", "age", "size^2", "roa^2", "age^2",
                                                 "size*roa", "size*age", "roa*age"});
    CHECK(full.names.size() == 11);

    DidSpec s = spec_at(ControlLevel::Size);
    s.pretrend = PretrendControls{{{"size", SummaryKind::Level}, {"roa", SummaryKind::Change}}, 4};
    const auto pre = build_design(p, s);
    CHECK(pre.names.size() == 3 + 8);
    CHECK(pre.names[3] == "size_level*tau^1");
    CHECK(pre.names[10] == "roa_change*tau^4");

    s.pretrend->summaries = {{"sales", SummaryKind::Level}};
    CHECK_THROWS_AS(build_design(p, s), UnknownColumn);
    s.pretrend->summaries = {{"size", SummaryKind::Level}};
    s.pretrend->degree = 0;
    CHECK_THROWS_AS(build_design(p, s), InvalidArgument);
    DidSpec late = spec_at();
    late.post_year = 2030;
    CHECK_THROWS_AS(build_design(p, late), InvalidArgument);
    CHECK_THROWS_AS(build_design(PanelData{}, spec_at()), RegressionError);
}

TEST_CASE("dP boundary follows include_policy_year") {
    const auto p = panel::simulate_panel(PanelConfig{});
    DidSpec in = spec_at(), out = spec_at();
    out.include_policy_year = false;
    const auto a = build_design(p, in), b = build_design(p, out);
    REQUIRE(a.y.size() == b.y.size());
    for (Eigen::Index i = 0; i < a.y.size(); ++i) {
        const int year = a.years[static_cast<std::size_t>(i)];
        CHECK(a.X(i, 0) == (year >= 2017 ? 1.0 : 0.0));
        CHECK(b.X(i, 0) == (year > 2017 ? 1.0 : 0.0));
        if (year != 2017) CHECK(a.X.row(i) == b.X.row(i));
    }
    // with no policy-year rows the two settings coincide
    PanelData gap = p;
    std::erase_if(gap.rows, [](const PanelRow& r) { return r.year == 2017; });
    CHECK(estimate_did(gap, in).beta2 == estimate_did(gap, out).beta2);
}

TEST_CASE("listwise deletion") {
    const auto p = panel::simulate_panel(PanelConfig{});
    int missing_roa = 0, missing_any = 0;
    for (const auto& r : p.rows) {
        if (!r.roa) ++missing_roa;
        if (!r.roa || !r.age) ++missing_any;
    }
    REQUIRE(missing_roa > 0);
    const auto none = estimate_did(p, spec_at());
    const auto sr = estimate_did(p, spec_at(ControlLevel::SizeRoa));
    const auto sra = estimate_did(p, spec_at(ControlLevel::SizeRoaAge));
    CHECK(none.n_obs == static_cast<int>(p.rows.size()));
    CHECK(none.n_dropped_missing == 0);
    CHECK(sr.n_dropped_missing == missing_roa);
    CHECK(sr.n_obs + sr.n_dropped_missing == none.n_obs);
    CHECK(sra.n_dropped_missing == missing_any);
}

TEST_CASE("toy two-by-two") {
    const auto r = estimate_did(toy_2x2(), spec_at());
    CHECK(r.beta2 == Approx(1.0).epsilon(1e-12));
    CHECK(r.n_obs == 4);
    CHECK(r.n_firms == 2);
}

TEST_CASE("null effect without noise gives zero") {
    PanelConfig c;
    c.true_effect = 0.0;
    const auto r = estimate_did(panel::simulate_panel(c), spec_at());
    CHECK(r.beta2 == 0.0);
    CHECK(r.beta2_se == 0.0);
    CHECK(r.beta2_p == 1.0);
}

TEST_CASE("firm-constant regressors are absorbed") {
    PanelData p = panel::simulate_panel(PanelConfig{});
    std::map<std::string, double> first;
    for (auto& r : p.rows) {
        first.try_emplace(r.firm_id, *r.size);
        r.size = first[r.firm_id];
    }
    const auto base = estimate_did(p, spec_at());
    const auto with = estimate_did(p, spec_at(ControlLevel::Size));
    CHECK(with.dropped_columns == std::vector<std::string>{"size"});
    CHECK(with.beta2 == Approx(base.beta2).epsilon(1e-10));
}

TEST_CASE("estimates do not depend on labels or row order") {
    PanelConfig c;
    c.background_hazard = 0.01;
    const PanelData p = panel::simulate_panel(c);
    PanelData q = p;
    std::mt19937_64 rng(3);
    std::map<std::string, std::string> relabel;
    int k = 0;
    for (auto& r : q.rows) {
        if (!relabel.count(r.firm_id)) relabel[r.firm_id] = "firm-" + std::to_string(997 * (++k) % 1009);
        r.firm_id = relabel[r.firm_id];
    }
    std::shuffle(q.rows.begin(), q.rows.end(), rng);
    DidSpec s = spec_at(ControlLevel::FullPolynomial);
    s.pretrend = PretrendControls{{{"size", SummaryKind::Level}}, 2};
    const auto a = estimate_did(p, s), b = estimate_did(q, s);
    CHECK(a.beta2 == b.beta2);
    CHECK(a.beta2_se == b.beta2_se);
    REQUIRE(a.controls.size() == b.controls.size());
    for (std::size_t i = 0; i < a.controls.size(); ++i) {
        CHECK(a.controls[i].estimate == b.controls[i].estimate);
        CHECK(a.controls[i].se == b.controls[i].se);
    }
    const auto ea = event_study(p, spec_at()), eb = event_study(q, spec_at());
    REQUIRE(ea.terms.size() == eb.terms.size());
    for (std::size_t i = 0; i < ea.terms.size(); ++i) CHECK(ea.terms[i].estimate == eb.terms[i].estimate);
    CHECK(estimate_aggregate(p, spec_at()).beta2 == estimate_aggregate(q, spec_at()).beta2);
}

TEST_CASE("recovery at N = 1000 averaged over seeds") {
    double total = 0.0;
    for (int r = 0; r < 20; ++r) {
        PanelConfig c;
        c.n_treated = 500;
        c.n_control = 500;
        c.seed = numerics::derive_seed(5150, static_cast<std::uint64_t>(r));
        total += estimate_did(panel::simulate_panel(c), spec_at()).beta2;
    }
    CHECK(std::abs(total / 20.0 - 0.1639) <= 0.01);
}

TEST_CASE("confidence interval and inference") {
    const auto r = estimate_did(panel::simulate_panel(PanelConfig{}), spec_at());
    CHECK(r.beta2_se > 0.0);
    CHECK(r.inference_df == 41.0);
    const double c = numerics::critical_value(0.95, 41.0);
    CHECK(r.ci_low == Approx(r.beta2 - c * r.beta2_se).epsilon(1e-12));
    CHECK(r.ci_high == Approx(r.beta2 + c * r.beta2_se).epsilon(1e-12));
    CHECK(r.beta2_p == Approx(numerics::two_sided_p_value(r.beta2 / r.beta2_se, 41.0)).epsilon(1e-12));
    CHECK(r.beta1.has_value());
    CHECK(r.r_squared >= 0.0);
    CHECK(r.r_squared <= 1.0);

    DidSpec hac = spec_at();
    hac.cov_mode = numerics::HacBartlett{2};
    const auto h = estimate_did(panel::simulate_panel(PanelConfig{}), hac);
    CHECK(h.beta2 == r.beta2);
    CHECK(h.beta2_se != r.beta2_se);
}

TEST_CASE("build-up across control levels") {
    const auto cols = build_up(panel::simulate_panel(PanelConfig{}), spec_at());
    REQUIRE(cols.size() == 5);
    double lo = 1e9, hi = -1e9, se = 0.0;
    for (const auto& c : cols) {
        lo = std::min(lo, c.beta2);
        hi = std::max(hi, c.beta2);
        se = std::max(se, c.beta2_se);
    }
    CHECK(hi - lo < 3.0 * se);
    CHECK(cols[0].controls.empty());
    CHECK(cols[4].controls.size() + cols[4].dropped_columns.size() == 9);
}

TEST_CASE("event study") {
    PanelConfig c;
    c.n_treated = 500;
    c.n_control = 500;
    const auto p = panel::simulate_panel(c);
    const auto es = event_study(p, spec_at());
    CHECK(es.base_year == 2000);
    for (const auto& t : es.terms) CHECK(t.year != 2000);
    const auto es2 = event_study(p, spec_at(), 2005);
    for (const auto& t : es2.terms) CHECK(t.year != 2005);
    CHECK_THROWS_AS(event_study(p, spec_at(), 1990), InvalidArgument);

    for (const auto& t : es.terms) {
        if (t.year < 2017) CHECK(std::abs(t.estimate) <= 4.0 * t.se + 1e-12);
    }

    // post-policy coefficients follow the realized effect path
    std::map<int, double> att;
    for (const auto& e : p.metadata.att_path) att[e.year] = e.att;
    int post_terms = 0;
    for (const auto& t : es.terms) {
        if (t.year < 2017) continue;
        ++post_terms;
        CHECK(std::abs(t.estimate - att[t.year]) <= 4.0 * t.se);
    }
    CHECK(post_terms == 7);
    for (std::size_t i = 1; i < es.terms.size(); ++i) {
        if (es.terms[i].year > 2017) CHECK(es.terms[i].estimate >= es.terms[i - 1].estimate - 0.03);
    }
}

TEST_CASE("event study pre-policy test under background adoption") {
    PanelConfig c;
    c.true_effect = 0.0;
    c.background_hazard = 0.01;
    c.n_treated = 200;
    c.n_control = 200;
    const auto es = event_study(panel::simulate_panel(c), spec_at());
    REQUIRE(es.pre_policy_wald.has_value());
    CHECK(es.pre_policy_wald->df == static_cast<int>(es.pre_policy_years.size()));
    for (const int y : es.pre_policy_years) CHECK(y < 2017);
    CHECK(es.pre_policy_wald->p_value >= 0.0);
    CHECK(es.pre_policy_wald->p_value <= 1.0);
}

TEST_CASE("aggregate cells") {
    const auto p = balanced(21, 77);
    const auto cells = aggregate_probability(p);
    CHECK(cells.size() == 48);
    for (const auto& c : cells) {
        CHECK(c.n_firms == 21);
        REQUIRE(c.p_hat.has_value());
        if (c.year < 2017) CHECK(*c.p_hat == 0.0);
        if (c.group == 0) CHECK(*c.p_hat == 0.0);
    }

    PanelData q;
    for (int i = 0; i < 20; ++i) q.rows.push_back(row("f" + std::to_string(i), 1, 2010, i < 5 ? 1 : 0));
    q.rows.push_back(row("g", 0, 2011, 0));
    const auto qc = aggregate_probability(q);
    REQUIRE(qc.size() == 4);
    CHECK(*qc[2].p_hat == 0.25);
    CHECK(qc[2].n_firms == 20);
    CHECK(qc[0].n_firms == 0);
    CHECK_FALSE(qc[0].p_hat.has_value());
    CHECK_THROWS_AS(aggregate_probability(PanelData{}), InvalidArgument);
}

TEST_CASE("aggregate estimator") {
    const auto p = balanced(21, 78);
    const auto firm = estimate_did(p, spec_at());
    const auto agg = estimate_aggregate(p, spec_at());
    CHECK(std::abs(agg.beta2 - firm.beta2) <= 1e-10);
    CHECK(agg.n_obs == 48);
    CHECK(agg.n_units == 2);

    const auto big = estimate_aggregate(balanced(5000, 79), spec_at());
    CHECK(std::abs(big.beta2 - 0.1639) <= 0.01);

    PanelConfig c;
    c.background_hazard = 0.01;
    c.attrition_rate = 0.0;
    c.n_treated = c.n_control = 20;
    const double small = estimate_aggregate(panel::simulate_panel(c), spec_at()).residual_variance;
    c.n_treated = c.n_control = 1000;
    const double large = estimate_aggregate(panel::simulate_panel(c), spec_at()).residual_variance;
    CHECK(large < small);

    const auto with_cov = estimate_aggregate(panel::simulate_panel(PanelConfig{}), spec_at(ControlLevel::SizeRoaAge));
    CHECK(with_cov.n_obs == 48);
}

}  // TEST_SUITE
