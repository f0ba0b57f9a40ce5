#include "vofdi/validation.hpp"

#include "vofdi/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace vofdi::validation {

namespace {

Replication run_one(const panel::PanelConfig& base, const did::DidSpec& spec, const ValidationOptions& opt,
                    std::uint64_t seed) {
    panel::PanelConfig cfg = base;
    cfg.seed = seed;
    const auto data = panel::simulate_panel(cfg);
    const auto res = did::estimate_did(data, spec);
    Replication r;
    r.seed = seed;
    r.beta2 = res.beta2;
    r.se = res.beta2_se;
    r.p_value = res.beta2_p;
    r.covers = res.ci_low <= base.true_effect && base.true_effect <= res.ci_high;
    if (opt.event_study) {
        try {
            const auto es = did::event_study(data, spec, opt.base_year);
            if (es.pre_policy_wald) r.wald_p = es.pre_policy_wald->p_value;
            for (const auto& t : es.terms) {
                if (spec.is_post(t.year)) continue;
                ++r.pre_terms;
                if (t.p_value < 0.05) ++r.pre_terms_significant;
            }
        } catch (const SingularCovariance&) {
        } catch (const RegressionError&) {
        }
    }
    return r;
}

}  // namespace

ValidationSummary run_validation(const panel::PanelConfig& panel, const did::DidSpec& spec,
                                 const ValidationOptions& options) {
    if (options.reps < 1) throw InvalidArgument("validation needs at least one replication");
    panel.validate();
    const auto reps = static_cast<std::size_t>(options.reps);
    std::vector<Replication> out(reps);

    unsigned n_threads = options.threads > 0 ? static_cast<unsigned>(options.threads)
                                             : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(reps));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t i = next++; i < reps; i = next++) {
            try {
                out[i] = run_one(panel, spec, options, numerics::derive_seed(options.root_seed, i));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    ValidationSummary s;
    s.reps = options.reps;
    s.true_effect = panel.true_effect;
    const double n = static_cast<double>(reps);
    int covered = 0, significant = 0, rejected = 0, pre_terms = 0, pre_sig = 0;
    double sum = 0.0, sum_se = 0.0, sq_err = 0.0;
    for (const auto& r : out) {
        sum += r.beta2;
        sum_se += r.se;
        sq_err += (r.beta2 - panel.true_effect) * (r.beta2 - panel.true_effect);
        covered += r.covers;
        significant += r.p_value < 0.05;
        if (options.event_study) {
            if (r.wald_p) {
                ++s.wald_tested;
                rejected += *r.wald_p < 0.05;
            } else {
                ++s.wald_untestable;
            }
        }
        pre_terms += r.pre_terms;
        pre_sig += r.pre_terms_significant;
    }
    s.mean_beta2 = sum / n;
    s.bias = s.mean_beta2 - panel.true_effect;
    s.rmse = std::sqrt(sq_err / n);
    double var = 0.0;
    for (const auto& r : out) var += (r.beta2 - s.mean_beta2) * (r.beta2 - s.mean_beta2);
    s.sd_beta2 = reps > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    s.mean_se = sum_se / n;
    s.coverage = covered / n;
    s.significance_rate = significant / n;
    s.wald_rejection_rate = s.wald_tested > 0 ? static_cast<double>(rejected) / s.wald_tested : 0.0;
    s.pre_term_insignificant_rate = pre_terms > 0 ? 1.0 - static_cast<double>(pre_sig) / pre_terms : 0.0;
    s.replications = std::move(out);
    return s;
}

}  // namespace vofdi::validation
