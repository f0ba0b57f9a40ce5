#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace vofdi::numerics {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Pareto distribution with scale lambda_m and shape alpha, support [lambda_m, inf).
class ParetoDist {
public:
    ParetoDist(double scale, double shape);

    double scale() const noexcept { return scale_; }
    double shape() const noexcept { return shape_; }

    double cdf(double x) const;
    double density(double x) const;

private:
    double scale_;
    double shape_;
};

/// Integral of lambda^k against the Pareto density over [lower, upper], in closed form.
/// `upper` may be +inf, in which case k < shape is required.
double pareto_partial_moment(const ParetoDist& dist, double k, double lower, double upper = kInf);

/// All randomness flows through an explicit generator; nothing in the library is global.
using Rng = std::mt19937_64;

/// Deterministic per-task seed derived from a root seed (splitmix64 of root + golden-ratio * (index + 1)).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

/// Uniform draw on the open interval (0, 1).
double uniform_open(Rng& rng);

/// Inverse-transform draw lambda_m * u^(-1/alpha).
double pareto_sample(const ParetoDist& dist, Rng& rng);

/// Draw conditional on lambda >= threshold (a Pareto with scale max(threshold, lambda_m)).
double pareto_sample_above(const ParetoDist& dist, double threshold, Rng& rng);

inline constexpr double kDefaultBisectTol = 1e-12;

/// Bisection on a bracket with a sign change. Returns the midpoint of the final bracket,
/// whose width is at most `tol` (or an exact zero if one is hit on the way).
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol = kDefaultBisectTol);

double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

/// Upper tail P(X > x) of the chi-square distribution with `df` degrees of freedom.
double chi2_sf(double x, double df);

/// Two-sided p-value of a t statistic. df <= 0 falls back to the standard normal.
double two_sided_p_value(double t, double df);

/// Critical value c with P(|T| > c) = 1 - level.
double critical_value(double level, double df);

// ---------------------------------------------------------------------------
// Fixed-effects least squares
// ---------------------------------------------------------------------------

struct ClusterByUnit {};

/// Newey-West style Bartlett kernel, lags taken within unit over the time index.
struct HacBartlett {
    std::optional<int> bandwidth;  // default: floor(4 (T/100)^(2/9)), T = distinct periods
};

using CovMode = std::variant<ClusterByUnit, HacBartlett>;

int default_hac_bandwidth(int n_periods);

inline constexpr double kRankTolerance = 1e-10;

struct RegressionFit {
    std::vector<std::string> names;  // retained columns, in input order
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd covariance;
    double r_squared = 0.0;  // within R^2
    std::vector<std::string> dropped_columns;
    int n_obs = 0;
    int n_units = 0;
    /// Degrees of freedom for t inference: G - 1 under clustering, N - K - G under HAC.
    double inference_df = 0.0;
    double residual_variance = 0.0;  // SSR / (N - K - G), 0 when that is not positive

    std::optional<std::size_t> index_of(const std::string& name) const;
    bool has(const std::string& name) const { return index_of(name).has_value(); }
    double coef(const std::string& name) const;
    double se(const std::string& name) const;
};

/// Within-unit demeaned least squares. Columns that are absorbed by the unit effects or are
/// linearly dependent on earlier pivots (pivoted QR, relative tolerance kRankTolerance on
/// equilibrated columns) are dropped and reported by name.
/// `times` is required for HacBartlett and ignored otherwise.
RegressionFit fe_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                     std::span<const std::string> names, std::span<const long long> unit_ids,
                     const CovMode& mode, std::span<const int> times = {});

struct WaldTest {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
};

/// Joint chi-square test that the named coefficients are all zero.
WaldTest wald_joint(const RegressionFit& fit, std::span<const std::string> columns);

/// Largest prefix-greedy subset of `columns` whose covariance sub-block is nonsingular: a column
/// is kept when its variance conditional on the columns already kept exceeds `tol` times its
/// own variance. Restrictions left out are linear combinations of the kept ones under the
/// estimated covariance.
std::vector<std::string> independent_restrictions(const RegressionFit& fit, std::span<const std::string> columns,
                                                  double tol = kRankTolerance);

}  // namespace vofdi::numerics
