#include "vofdi/errors.hpp"
#include "vofdi/numerics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

using namespace vofdi;
using namespace vofdi::numerics;

namespace {

struct Data {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<std::string> names;
    std::vector<long long> units;
    std::vector<int> times;
};

// Balanced panel of `g` units over `t` periods; half the units are treated from period t/2.
Data random_panel(int g, int t, unsigned seed) {
    Rng rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Data d;
    const int n = g * t;
    d.y.resize(n);
    d.X.resize(n, 3);
    d.names = {"post", "post_x_treated", "x"};
    int row = 0;
    for (int u = 0; u < g; ++u) {
        const double fe = z(rng);
        const bool treated = u % 2 == 0;
        for (int s = 0; s < t; ++s) {
            const double post = s >= t / 2 ? 1.0 : 0.0;
            const double x = z(rng) + 0.3 * fe;
            d.X.row(row) << post, post * (treated ? 1.0 : 0.0), x;
            d.y(row) = fe + 0.2 * post + 0.5 * d.X(row, 1) - 0.7 * x + z(rng) * (1.0 + 0.5 * treated);
            d.units.push_back(100 + 7 * u);
            d.times.push_back(2000 + s);
            ++row;
        }
    }
    return d;
}

Eigen::MatrixXd demean(const Eigen::MatrixXd& M, const std::vector<long long>& units) {
    std::map<long long, std::pair<Eigen::RowVectorXd, int>> acc;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        auto [it, fresh] = acc.try_emplace(units[i], Eigen::RowVectorXd::Zero(M.cols()), 0);
        it->second.first += M.row(i);
        it->second.second += 1;
    }
    Eigen::MatrixXd out = M;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        const auto& [sum, count] = acc.at(units[i]);
        out.row(i) -= sum / count;
    }
    return out;
}

// Textbook normal equations and a cluster sandwich with the G/(G-1) (N-1)/(N-K) factor.
void reference_fit(const Data& d, Eigen::VectorXd& beta, Eigen::MatrixXd& cov) {
    const Eigen::MatrixXd Xd = demean(d.X, d.units);
    const Eigen::VectorXd yd = demean(d.y, d.units);
    const Eigen::MatrixXd XtX_inv = (Xd.transpose() * Xd).inverse();
    beta = XtX_inv * Xd.transpose() * yd;
    const Eigen::VectorXd e = yd - Xd * beta;
    std::map<long long, Eigen::VectorXd> score;
    for (Eigen::Index i = 0; i < Xd.rows(); ++i) {
        auto [it, fresh] = score.try_emplace(d.units[i], Eigen::VectorXd::Zero(Xd.cols()));
        it->second += Xd.row(i).transpose() * e(i);
    }
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(Xd.cols(), Xd.cols());
    for (const auto& [u, s] : score) meat += s * s.transpose();
    const double G = static_cast<double>(score.size()), N = static_cast<double>(Xd.rows()),
                 K = static_cast<double>(Xd.cols());
    cov = XtX_inv * meat * XtX_inv * (G / (G - 1.0) * (N - 1.0) / (N - K));
}

RegressionFit fit_of(std::vector<std::string> names, Eigen::VectorXd b, Eigen::MatrixXd V) {
    RegressionFit f;
    f.names = std::move(names);
    f.coefficients = std::move(b);
    f.covariance = std::move(V);
    return f;
}

}  // namespace

TEST_SUITE("fe_ols") {

TEST_CASE("two-by-two difference in differences") {
    Eigen::VectorXd y(4);
    y << 0, 0, 0, 1;  // control pre/post, treated pre/post
    Eigen::MatrixXd X(4, 2);
    X << 0, 0, 1, 0, 0, 0, 1, 1;
    const std::vector<std::string> names{"dP", "dTxdP"};
    const std::vector<long long> units{1, 1, 2, 2};
    const auto fit = fe_ols(y, X, names, units, ClusterByUnit{});
    CHECK(fit.coef("dTxdP") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(fit.coef("dP")) <= 1e-12);
    CHECK(fit.n_units == 2);
    CHECK(fit.n_obs == 4);
}

TEST_CASE("balanced two-group panel reproduces the difference of group-period means") {
    Data d = random_panel(10, 6, 3);
    Eigen::MatrixXd X = d.X.leftCols(2);
    const auto fit = fe_ols(d.y, X, std::vector<std::string>{"post", "did"}, d.units, ClusterByUnit{});
    double m[2][2] = {{0, 0}, {0, 0}};
    int c[2][2] = {{0, 0}, {0, 0}};
    for (Eigen::Index i = 0; i < d.y.size(); ++i) {
        const int g = (d.units[i] - 100) / 7 % 2 == 0 ? 1 : 0;
        const int p = static_cast<int>(d.X(i, 0));
        m[g][p] += d.y(i);
        c[g][p] += 1;
    }
    const double did = (m[1][1] / c[1][1] - m[1][0] / c[1][0]) - (m[0][1] / c[0][1] - m[0][0] / c[0][0]);
    CHECK(std::abs(fit.coef("did") - did) <= 1e-12);
}

TEST_CASE("coefficients and cluster covariance match a textbook reference") {
    const Data d = random_panel(30, 8, 11);
    const auto fit = fe_ols(d.y, d.X, d.names, d.units, ClusterByUnit{});
    Eigen::VectorXd beta;
    Eigen::MatrixXd cov;
    reference_fit(d, beta, cov);
    REQUIRE(fit.names == d.names);
    CHECK((fit.coefficients - beta).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((fit.covariance - cov).cwiseAbs().maxCoeff() <= 1e-10 * cov.cwiseAbs().maxCoeff());
    CHECK(fit.inference_df == 29.0);
    CHECK(fit.r_squared >= 0.0);
    CHECK(fit.r_squared <= 1.0);
}

TEST_CASE("HAC covariance with bandwidth 1 matches a hand-built kernel sum") {
    const Data d = random_panel(12, 6, 21);
    const auto fit = fe_ols(d.y, d.X, d.names, d.units, HacBartlett{1}, d.times);
    const Eigen::MatrixXd Xd = demean(d.X, d.units);
    const Eigen::VectorXd yd = demean(d.y, d.units);
    const Eigen::MatrixXd B = (Xd.transpose() * Xd).inverse();
    const Eigen::VectorXd e = yd - Xd * (B * Xd.transpose() * yd);
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(3, 3);
    for (Eigen::Index i = 0; i < Xd.rows(); ++i) {
        const Eigen::VectorXd si = Xd.row(i).transpose() * e(i);
        meat += si * si.transpose();
        if (i + 1 < Xd.rows() && d.units[i + 1] == d.units[i]) {
            const Eigen::VectorXd sj = Xd.row(i + 1).transpose() * e(i + 1);
            meat += 0.5 * (si * sj.transpose() + sj * si.transpose());
        }
    }
    const double N = 72, K = 3, G = 12;
    const Eigen::MatrixXd V = B * meat * B * (N / (N - K - G));
    CHECK((fit.covariance - V).cwiseAbs().maxCoeff() <= 1e-10 * V.cwiseAbs().maxCoeff());
    CHECK(fit.inference_df == N - K - G);
}

TEST_CASE("default HAC bandwidth") {
    CHECK(default_hac_bandwidth(24) == 2);
    CHECK(default_hac_bandwidth(100) == 4);
    CHECK(default_hac_bandwidth(1) >= 0);
}

TEST_CASE("duplicate column: one copy dropped, the rest unchanged") {
    const Data d = random_panel(20, 6, 5);
    Eigen::MatrixXd X(d.X.rows(), 4);
    X << d.X, d.X.col(2);
    const std::vector<std::string> names{"post", "post_x_treated", "x", "x_copy"};
    const auto fit = fe_ols(d.y, X, names, d.units, ClusterByUnit{});
    const auto base = fe_ols(d.y, d.X, d.names, d.units, ClusterByUnit{});
    REQUIRE(fit.dropped_columns.size() == 1);
    const bool one_of_pair = fit.dropped_columns[0] == "x" || fit.dropped_columns[0] == "x_copy";
    CHECK(one_of_pair);
    for (const auto& n : fit.dropped_columns) CHECK_FALSE(fit.has(n));
    CHECK(fit.coef("post") == doctest::Approx(base.coef("post")).epsilon(1e-10));
    CHECK(fit.coef("post_x_treated") == doctest::Approx(base.coef("post_x_treated")).epsilon(1e-10));
    const std::string kept = fit.has("x") ? "x" : "x_copy";
    CHECK(fit.coef(kept) == doctest::Approx(base.coef("x")).epsilon(1e-10));
}

TEST_CASE("unit-constant columns are absorbed") {
    Data d = random_panel(20, 6, 9);
    Eigen::MatrixXd X(d.X.rows(), 4);
    Eigen::VectorXd constant(d.X.rows());
    for (Eigen::Index i = 0; i < constant.size(); ++i) constant(i) = 0.01 * static_cast<double>(d.units[i]);
    X << constant, d.X;
    const auto fit = fe_ols(d.y, X, std::vector<std::string>{"unit_level", "post", "post_x_treated", "x"}, d.units,
                            ClusterByUnit{});
    CHECK(fit.dropped_columns == std::vector<std::string>{"unit_level"});
}

TEST_CASE("adding unit constants to y or to regressors leaves estimates unchanged") {
    const Data d = random_panel(25, 7, 13);
    const auto base = fe_ols(d.y, d.X, d.names, d.units, ClusterByUnit{});
    Data shifted = d;
    Rng rng(1);
    std::normal_distribution<double> z(0.0, 5.0);
    std::map<long long, Eigen::Vector4d> shift;
    for (auto u : d.units) {
        if (!shift.count(u)) shift[u] = Eigen::Vector4d(z(rng), z(rng), z(rng), z(rng));
    }
    for (Eigen::Index i = 0; i < d.y.size(); ++i) {
        const auto& s = shift[d.units[i]];
        shifted.y(i) += s(0);
        shifted.X(i, 0) += s(1);
        shifted.X(i, 1) += s(2);
        shifted.X(i, 2) += s(3);
    }
    const auto moved = fe_ols(shifted.y, shifted.X, d.names, d.units, ClusterByUnit{});
    CHECK((moved.coefficients - base.coefficients).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("fe_ols errors") {
    const Data d = random_panel(4, 4, 2);
    CHECK_THROWS_AS(fe_ols(d.y, d.X, std::vector<std::string>{"a", "b"}, d.units, ClusterByUnit{}), RegressionError);
    const std::vector<long long> one_unit(d.units.size(), 1);
    CHECK_THROWS_AS(fe_ols(d.y, d.X, d.names, one_unit, ClusterByUnit{}), RegressionError);
    CHECK_THROWS_AS(fe_ols(d.y, d.X, d.names, d.units, HacBartlett{}), RegressionError);
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(d.X.rows(), 1);
    CHECK_THROWS_AS(fe_ols(d.y, zero, std::vector<std::string>{"z"}, d.units, ClusterByUnit{}), RegressionError);
    Eigen::VectorXd bad = d.y;
    bad(0) = std::nan("");
    CHECK_THROWS_AS(fe_ols(bad, d.X, d.names, d.units, ClusterByUnit{}), NonFiniteValue);
    const auto fit = fe_ols(d.y, d.X, d.names, d.units, ClusterByUnit{});
    CHECK_THROWS_AS(fit.coef("nope"), UnknownColumn);
}

TEST_CASE("wald worked values") {
    Eigen::VectorXd b(1);
    b << 2.0;
    const auto single = wald_joint(fit_of({"b"}, b, Eigen::MatrixXd::Identity(1, 1)), std::vector<std::string>{"b"});
    CHECK(single.statistic == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(single.df == 1);
    CHECK(single.p_value == doctest::Approx(0.0455003).epsilon(1e-6));

    const auto zero = wald_joint(fit_of({"a", "b"}, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)),
                                 std::vector<std::string>{"a", "b"});
    CHECK(zero.statistic == 0.0);
    CHECK(zero.p_value == 1.0);
    CHECK(zero.df == 2);
}

TEST_CASE("wald is invariant to the order of the tested columns") {
    const Data d = random_panel(30, 8, 17);
    const auto fit = fe_ols(d.y, d.X, d.names, d.units, ClusterByUnit{});
    const auto a = wald_joint(fit, std::vector<std::string>{"post", "post_x_treated", "x"});
    const auto b = wald_joint(fit, std::vector<std::string>{"x", "post", "post_x_treated"});
    CHECK(a.statistic == doctest::Approx(b.statistic).epsilon(1e-12));
    CHECK(a.p_value == doctest::Approx(b.p_value).epsilon(1e-10));
}

TEST_CASE("wald errors and independent subsets") {
    Eigen::VectorXd b(3);
    b << 1.0, 2.0, 3.0;
    Eigen::MatrixXd V(3, 3);
    V << 1, 1, 0, 1, 1, 0, 0, 0, 2;  // a and b perfectly correlated
    const auto fit = fit_of({"a", "b", "c"}, b, V);
    CHECK_THROWS_AS(wald_joint(fit, std::vector<std::string>{"a", "b"}), SingularCovariance);
    CHECK_THROWS_AS(wald_joint(fit, std::vector<std::string>{"zz"}), UnknownColumn);
    CHECK_THROWS_AS(wald_joint(fit, std::vector<std::string>{}), InvalidArgument);
    CHECK(independent_restrictions(fit, std::vector<std::string>{"a", "b", "c"}) ==
          std::vector<std::string>{"a", "c"});
    CHECK(independent_restrictions(fit, std::vector<std::string>{"b", "a"}) == std::vector<std::string>{"b"});
    CHECK_THROWS_AS(independent_restrictions(fit, std::vector<std::string>{"q"}), UnknownColumn);

    Eigen::MatrixXd V0 = V;
    V0(2, 2) = 0.0;
    V0(0, 0) = V0(1, 1) = 1.0;
    CHECK(independent_restrictions(fit_of({"a", "b", "c"}, b, V0), std::vector<std::string>{"c", "a"}) ==
          std::vector<std::string>{"a"});
}

}  // TEST_SUITE
