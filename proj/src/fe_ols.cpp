#include "vofdi/errors.hpp"
#include "vofdi/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace vofdi::numerics {

std::optional<std::size_t> RegressionFit::index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
}

double RegressionFit::coef(const std::string& name) const {
    const auto i = index_of(name);
    if (!i) throw UnknownColumn("no retained coefficient named '" + name + "'");
    return coefficients(static_cast<Eigen::Index>(*i));
}

double RegressionFit::se(const std::string& name) const {
    const auto i = index_of(name);
    if (!i) throw UnknownColumn("no retained coefficient named '" + name + "'");
    const auto k = static_cast<Eigen::Index>(*i);
    return std::sqrt(std::max(0.0, covariance(k, k)));
}

namespace {

struct UnitIndex {
    std::vector<int> of_row;
    int count = 0;
};

UnitIndex index_units(std::span<const long long> ids) {
    UnitIndex out;
    out.of_row.resize(ids.size());
    std::unordered_map<long long, int> seen;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto [it, inserted] = seen.emplace(ids[i], out.count);
        if (inserted) ++out.count;
        out.of_row[i] = it->second;
    }
    return out;
}

Eigen::MatrixXd cluster_meat(const Eigen::MatrixXd& Z, const Eigen::VectorXd& e,
                             const UnitIndex& units) {
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(units.count, Z.cols());
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        scores.row(units.of_row[static_cast<std::size_t>(i)]) += Z.row(i) * e(i);
    }
    return scores.transpose() * scores;
}

Eigen::MatrixXd hac_meat(const Eigen::MatrixXd& Z, const Eigen::VectorXd& e, const UnitIndex& units,
                         std::span<const int> times, int bandwidth) {
    const Eigen::Index k = Z.cols();
    std::vector<std::vector<Eigen::Index>> rows_of(static_cast<std::size_t>(units.count));
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        rows_of[static_cast<std::size_t>(units.of_row[static_cast<std::size_t>(i)])].push_back(i);
    }
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (auto& rows : rows_of) {
        std::sort(rows.begin(), rows.end(), [&](Eigen::Index a, Eigen::Index b) {
            return times[static_cast<std::size_t>(a)] < times[static_cast<std::size_t>(b)];
        });
        for (std::size_t a = 0; a < rows.size(); ++a) {
            const Eigen::VectorXd sa = Z.row(rows[a]).transpose() * e(rows[a]);
            meat += sa * sa.transpose();
            for (std::size_t b = a + 1; b < rows.size(); ++b) {
                const int lag = times[static_cast<std::size_t>(rows[b])] -
                                times[static_cast<std::size_t>(rows[a])];
                if (lag == 0) throw RegressionError("HAC covariance: duplicate time within a unit");
                if (lag > bandwidth) break;
                const double w = 1.0 - static_cast<double>(lag) / (bandwidth + 1.0);
                const Eigen::VectorXd sb = Z.row(rows[b]).transpose() * e(rows[b]);
                meat += w * (sa * sb.transpose() + sb * sa.transpose());
            }
        }
    }
    return meat;
}

}  // namespace

RegressionFit fe_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                     std::span<const std::string> names, std::span<const long long> unit_ids,
                     const CovMode& mode, std::span<const int> times) {
    const Eigen::Index n = y.size();
    const Eigen::Index p = X.cols();
    if (X.rows() != n || unit_ids.size() != static_cast<std::size_t>(n) ||
        names.size() != static_cast<std::size_t>(p)) {
        throw RegressionError("fe_ols: dimension mismatch between y, X, names and unit ids");
    }
    const bool hac = std::holds_alternative<HacBartlett>(mode);
    if (hac && times.size() != static_cast<std::size_t>(n)) {
        throw RegressionError("fe_ols: HAC covariance needs one time index per observation");
    }
    if (!y.allFinite() || !X.allFinite()) throw NonFiniteValue("fe_ols: non-finite data");

    const UnitIndex units = index_units(unit_ids);
    if (units.count < 2) throw RegressionError("fe_ols: at least two units are required");

    // Within transformation.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(units.count, p + 1);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(units.count);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int u = units.of_row[static_cast<std::size_t>(i)];
        sums(u, 0) += y(i);
        sums.row(u).tail(p) += X.row(i);
        counts(u) += 1.0;
    }
    Eigen::VectorXd yd(n);
    Eigen::MatrixXd Xd(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int u = units.of_row[static_cast<std::size_t>(i)];
        yd(i) = y(i) - sums(u, 0) / counts(u);
        Xd.row(i) = X.row(i) - sums.row(u).tail(p) / counts(u);
    }

    // Absorbed columns first, then pivoted QR on unit-norm columns for collinearity.
    std::vector<Eigen::Index> candidates;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double raw = X.col(j).norm();
        const double within = Xd.col(j).norm();
        if (raw > 0.0 && within > kRankTolerance * raw) candidates.push_back(j);
    }
    std::vector<Eigen::Index> retained;
    if (!candidates.empty()) {
        Eigen::MatrixXd Z(n, static_cast<Eigen::Index>(candidates.size()));
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            const auto col = Xd.col(candidates[c]);
            Z.col(static_cast<Eigen::Index>(c)) = col / col.norm();
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
        qr.setThreshold(kRankTolerance);
        const auto perm = qr.colsPermutation().indices();
        for (Eigen::Index r = 0; r < qr.rank(); ++r) retained.push_back(candidates[static_cast<std::size_t>(perm(r))]);
        std::sort(retained.begin(), retained.end());
    }

    RegressionFit fit;
    fit.n_obs = static_cast<int>(n);
    fit.n_units = units.count;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (std::binary_search(retained.begin(), retained.end(), j)) {
            fit.names.push_back(names[static_cast<std::size_t>(j)]);
        } else {
            fit.dropped_columns.push_back(names[static_cast<std::size_t>(j)]);
        }
    }
    if (retained.empty()) throw RegressionError("fe_ols: every regressor was dropped");
    const Eigen::Index k = static_cast<Eigen::Index>(retained.size());
    if (n < k) throw RegressionError("fe_ols: fewer observations than retained columns");

    // Solve on equilibrated columns, then undo the scaling.
    Eigen::MatrixXd Zr(n, k);
    Eigen::VectorXd scale(k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const auto col = Xd.col(retained[static_cast<std::size_t>(c)]);
        scale(c) = col.norm();
        Zr.col(c) = col / scale(c);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Zr);
    const Eigen::VectorXd gamma = qr.solve(yd);
    const Eigen::VectorXd resid = yd - Zr * gamma;
    const Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd bread = Rinv * Rinv.transpose();

    const double N = static_cast<double>(n);
    const double K = static_cast<double>(k);
    const double G = static_cast<double>(units.count);
    Eigen::MatrixXd vz;
    if (hac) {
        const auto& opts = std::get<HacBartlett>(mode);
        int bandwidth = 0;
        if (opts.bandwidth) {
            if (*opts.bandwidth < 0) throw InvalidArgument("HAC bandwidth must be nonnegative");
            bandwidth = *opts.bandwidth;
        } else {
            std::vector<int> distinct(times.begin(), times.end());
            std::sort(distinct.begin(), distinct.end());
            distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
            bandwidth = default_hac_bandwidth(static_cast<int>(distinct.size()));
        }
        const double dof = N - K - G;
        if (dof <= 0.0) throw RegressionError("fe_ols: no residual degrees of freedom for HAC");
        vz = bread * hac_meat(Zr, resid, units, times, bandwidth) * bread * (N / dof);
        fit.inference_df = dof;
    } else {
        if (N - K <= 0.0) throw RegressionError("fe_ols: no residual degrees of freedom");
        const double factor = G / (G - 1.0) * (N - 1.0) / (N - K);
        vz = bread * cluster_meat(Zr, resid, units) * bread * factor;
        fit.inference_df = G - 1.0;
    }

    const Eigen::VectorXd inv_scale = scale.cwiseInverse();
    fit.coefficients = gamma.cwiseProduct(inv_scale);
    fit.covariance = inv_scale.asDiagonal() * vz * inv_scale.asDiagonal();
    fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();

    const double ssr = resid.squaredNorm();
    const double sst = yd.squaredNorm();
    fit.r_squared = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 0.0;
    const double dof_resid = N - K - G;
    fit.residual_variance = dof_resid > 0.0 ? ssr / dof_resid : 0.0;
    return fit;
}

WaldTest wald_joint(const RegressionFit& fit, std::span<const std::string> columns) {
    if (columns.empty()) throw InvalidArgument("wald_joint: no columns to test");
    const auto q = static_cast<Eigen::Index>(columns.size());
    Eigen::VectorXd b(q);
    Eigen::MatrixXd V(q, q);
    std::vector<Eigen::Index> idx;
    for (const auto& name : columns) {
        const auto i = fit.index_of(name);
        if (!i) throw UnknownColumn("wald_joint: no retained coefficient named '" + name + "'");
        idx.push_back(static_cast<Eigen::Index>(*i));
    }
    for (Eigen::Index a = 0; a < q; ++a) {
        b(a) = fit.coefficients(idx[static_cast<std::size_t>(a)]);
        for (Eigen::Index c = 0; c < q; ++c) {
            V(a, c) = fit.covariance(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(c)]);
        }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(V);
    const double max_ev = eig.eigenvalues().maxCoeff();
    const double min_ev = eig.eigenvalues().minCoeff();
    if (!(max_ev > 0.0) || min_ev <= 1e-12 * max_ev) {
        throw SingularCovariance("wald_joint: covariance sub-block is singular");
    }
    WaldTest out;
    out.df = static_cast<int>(q);
    out.statistic = std::max(0.0, b.dot(V.ldlt().solve(b)));
    out.p_value = chi2_sf(out.statistic, out.df);
    return out;
}

std::vector<std::string> independent_restrictions(const RegressionFit& fit, std::span<const std::string> columns,
                                                  double tol) {
    std::vector<Eigen::Index> idx;
    double max_var = 0.0;
    for (const auto& name : columns) {
        const auto i = fit.index_of(name);
        if (!i) throw UnknownColumn("no retained coefficient named '" + name + "'");
        idx.push_back(static_cast<Eigen::Index>(*i));
        max_var = std::max(max_var, fit.covariance(idx.back(), idx.back()));
    }
    std::vector<std::string> kept;
    std::vector<Eigen::Index> kept_idx;
    for (std::size_t c = 0; c < idx.size(); ++c) {
        const Eigen::Index j = idx[c];
        const double v = fit.covariance(j, j);
        if (!(v > 1e-12 * max_var)) continue;
        double conditional = v;
        if (!kept_idx.empty()) {
            const auto m = static_cast<Eigen::Index>(kept_idx.size());
            Eigen::MatrixXd S(m, m);
            Eigen::VectorXd s(m);
            for (Eigen::Index a = 0; a < m; ++a) {
                s(a) = fit.covariance(kept_idx[static_cast<std::size_t>(a)], j);
                for (Eigen::Index b = 0; b < m; ++b) {
                    S(a, b) = fit.covariance(kept_idx[static_cast<std::size_t>(a)], kept_idx[static_cast<std::size_t>(b)]);
                }
            }
            conditional = v - s.dot(S.ldlt().solve(s));
        }
        if (conditional > tol * v) {
            kept.push_back(columns[c]);
            kept_idx.push_back(j);
        }
    }
    return kept;
}

}  // namespace vofdi::numerics
