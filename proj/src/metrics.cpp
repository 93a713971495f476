#include "authfp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "authfp/errors.hpp"

namespace authfp {

double quantile_higher(std::vector<double> samples, double q) {
    if (samples.empty()) throw InvalidArgumentError("quantile: empty sample set");
    if (q < 0.0 || q > 1.0) throw InvalidArgumentError("quantile: q must be in [0,1]");
    std::sort(samples.begin(), samples.end());
    const auto n = samples.size();
    const auto idx = static_cast<size_t>(std::ceil(q * static_cast<double>(n - 1)));
    return samples[std::min(idx, n - 1)];
}

double auc_from_errors(const std::vector<double>& positive_errors,
                       const std::vector<double>& negative_errors) {
    if (positive_errors.empty() || negative_errors.empty()) {
        throw InvalidArgumentError("auc: both sides need at least one sample");
    }
    // Midrank Mann-Whitney: rank all errors together, sum negative ranks.
    struct Tagged {
        double value;
        bool negative;
    };
    std::vector<Tagged> all;
    all.reserve(positive_errors.size() + negative_errors.size());
    for (double e : positive_errors) all.push_back({e, false});
    for (double e : negative_errors) all.push_back({e, true});
    std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
        return a.value < b.value;
    });
    double rank_sum_neg = 0.0;
    size_t i = 0;
    while (i < all.size()) {
        size_t j = i;
        while (j < all.size() && all[j].value == all[i].value) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based midrank
        for (size_t k = i; k < j; ++k) {
            if (all[k].negative) rank_sum_neg += midrank;
        }
        i = j;
    }
    const double n_neg = static_cast<double>(negative_errors.size());
    const double n_pos = static_cast<double>(positive_errors.size());
    const double u = rank_sum_neg - n_neg * (n_neg + 1.0) / 2.0;
    return u / (n_neg * n_pos);
}

namespace {

double fraction_below(const std::vector<double>& errors, double tau) {
    if (errors.empty()) return 0.0;
    size_t count = 0;
    for (double e : errors) count += (e < tau) ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(errors.size());
}

}  // namespace

EvalReport make_eval_report(std::vector<double> positive_errors,
                            std::vector<double> negative_errors, double target_tpr,
                            double decision_tau) {
    EvalReport report;
    report.target_tpr = target_tpr;
    const double eval_tau = quantile_higher(positive_errors, target_tpr);
    report.fpr_at_target = fraction_below(negative_errors, eval_tau);
    report.auc = auc_from_errors(positive_errors, negative_errors);
    report.tau = decision_tau >= 0.0 ? decision_tau : eval_tau;
    report.tpr = fraction_below(positive_errors, report.tau);
    report.fpr = fraction_below(negative_errors, report.tau);
    report.positive_errors = std::move(positive_errors);
    report.negative_errors = std::move(negative_errors);
    return report;
}

void write_eval_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw PersistenceError("cannot open '" + path + "' for writing");
    out << "# schema: authfp.eval-samples.v1\n";
    out << "side,error\n";
    out.precision(17);
    for (double e : report.positive_errors) out << "positive," << e << "\n";
    for (double e : report.negative_errors) out << "negative," << e << "\n";
}

void write_eval_json(const EvalReport& report, const std::string& path) {
    nlohmann::json j{{"tpr", report.tpr},
                     {"fpr_at_target", report.fpr_at_target},
                     {"auc", report.auc},
                     {"tau", report.tau},
                     {"target_tpr", report.target_tpr},
                     {"n", {{"positive", report.positive_errors.size()},
                            {"negative", report.negative_errors.size()}}}};
    std::ofstream out(path);
    if (!out) throw PersistenceError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

}  // namespace authfp
