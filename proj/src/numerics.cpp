#include "vofdi/numerics.hpp"

#include "vofdi/errors.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>

namespace vofdi::numerics {

ParetoDist::ParetoDist(double scale, double shape) : scale_(scale), shape_(shape) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvalidArgument("Pareto scale must be positive and finite");
    }
    if (!(shape > 0.0) || std::isnan(shape)) {
        throw InvalidArgument("Pareto shape must be positive");
    }
}

double ParetoDist::cdf(double x) const {
    if (x <= scale_) return 0.0;
    return 1.0 - std::pow(scale_ / x, shape_);
}

double ParetoDist::density(double x) const {
    if (x < scale_) return 0.0;
    return shape_ * std::pow(scale_, shape_) * std::pow(x, -shape_ - 1.0);
}

double pareto_partial_moment(const ParetoDist& dist, double k, double lower, double upper) {
    const double alpha = dist.shape();
    const double lm = dist.scale();
    if (lower < lm) throw InvalidArgument("partial moment: lower bound below the Pareto scale");
    if (!(upper > lower)) throw InvalidArgument("partial moment: upper bound must exceed lower");
    const bool infinite = std::isinf(upper);
    if (infinite && k >= alpha) {
        throw DivergentIntegral("partial moment: power k >= shape with an infinite upper bound");
    }
    // alpha * lm^alpha factored as alpha * (lm/a)^alpha * a^... to stay finite for large alpha.
    if (k == alpha) {
        return alpha * std::pow(lm, alpha) * std::log(upper / lower);
    }
    const double lower_term = std::pow(lm / lower, alpha) * std::pow(lower, k);
    const double upper_term = infinite ? 0.0 : std::pow(lm / upper, alpha) * std::pow(upper, k);
    return alpha * (lower_term - upper_term) / (alpha - k);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
    std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform_open(Rng& rng) {
    // 53 random bits mapped to (0, 1): (k + 0.5) / 2^53.
    const std::uint64_t bits = rng() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double pareto_sample(const ParetoDist& dist, Rng& rng) {
    return dist.scale() * std::pow(uniform_open(rng), -1.0 / dist.shape());
}

double pareto_sample_above(const ParetoDist& dist, double threshold, Rng& rng) {
    const double lo = std::max(threshold, dist.scale());
    return lo * std::pow(uniform_open(rng), -1.0 / dist.shape());
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (!(tol > 0.0)) throw InvalidArgument("bisect: tolerance must be positive");
    if (!(lo < hi)) throw InvalidArgument("bisect: require lo < hi");
    double flo = f(lo);
    const double fhi = f(hi);
    if (!std::isfinite(flo) || !std::isfinite(fhi)) {
        throw NonFiniteValue("bisect: non-finite function value at a bracket endpoint");
    }
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) {
        throw NoSignChange("bisect: f(lo) and f(hi) have the same sign");
    }
    while (hi - lo > tol) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;  // bracket at floating-point resolution
        const double fm = f(mid);
        if (!std::isfinite(fm)) throw NonFiniteValue("bisect: non-finite function value");
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return lo + 0.5 * (hi - lo);
}

namespace {

constexpr int kGammaMaxIter = 100000;
constexpr double kGammaEps = 1e-16;
constexpr double kTiny = 1e-300;

double gamma_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < kGammaMaxIter; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kGammaEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kGammaMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kGammaEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0)) throw InvalidArgument("incomplete gamma: a must be positive");
    if (x < 0.0) throw InvalidArgument("incomplete gamma: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return gamma_series(a, x);
    return 1.0 - gamma_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0)) throw InvalidArgument("incomplete gamma: a must be positive");
    if (x < 0.0) throw InvalidArgument("incomplete gamma: x must be nonnegative");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_series(a, x);
    return gamma_continued_fraction(a, x);
}

double chi2_sf(double x, double df) {
    if (!(df > 0.0)) throw InvalidArgument("chi-square: degrees of freedom must be positive");
    if (x <= 0.0) return 1.0;
    return regularized_gamma_q(0.5 * df, 0.5 * x);
}

double two_sided_p_value(double t, double df) {
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    const double at = std::abs(t);
    if (std::isinf(at)) return 0.0;
    if (df > 0.0) {
        const boost::math::students_t dist(df);
        return 2.0 * boost::math::cdf(boost::math::complement(dist, at));
    }
    const boost::math::normal dist;
    return 2.0 * boost::math::cdf(boost::math::complement(dist, at));
}

double critical_value(double level, double df) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must be in (0,1)");
    const double tail = 0.5 * (1.0 - level);
    if (df > 0.0) {
        const boost::math::students_t dist(df);
        return boost::math::quantile(boost::math::complement(dist, tail));
    }
    const boost::math::normal dist;
    return boost::math::quantile(boost::math::complement(dist, tail));
}

int default_hac_bandwidth(int n_periods) {
    if (n_periods <= 0) return 0;
    return static_cast<int>(std::floor(4.0 * std::pow(n_periods / 100.0, 2.0 / 9.0)));
}

}  // namespace vofdi::numerics
