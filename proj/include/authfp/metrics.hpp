#pragma once

#include <string>
#include <vector>

namespace authfp {

/// Empirical quantile with "higher" interpolation: sorted[ceil(q*(n-1))].
/// Guarantees at least a q fraction of samples lie at or below the result.
double quantile_higher(std::vector<double> samples, double q);

/// P(negative score > positive score) + 0.5 * P(tie), via midranks.
/// Positives are the low-error side, so perfect separation gives 1.
double auc_from_errors(const std::vector<double>& positive_errors,
                       const std::vector<double>& negative_errors);

/// Detection-error study of one positive/negative pair (the FPR-at-target-TPR
/// protocol): the evaluation threshold is the target-TPR quantile of the
/// positive errors, and FPR is the fraction of negative errors strictly
/// below it.
struct EvalReport {
    std::vector<double> positive_errors;
    std::vector<double> negative_errors;
    double target_tpr = 0.95;
    double tau = 0.0;            // threshold the rates below were computed at
    double tpr = 0.0;            // fraction of positives with error < tau
    double fpr = 0.0;            // fraction of negatives with error < tau
    double fpr_at_target = 0.0;  // fpr at the target-TPR quantile threshold
    double auc = 0.0;
};

/// Builds the report from raw error samples. If `decision_tau` is >= 0 the
/// tpr/fpr fields are computed at that fixed threshold (a deployed
/// detector's tau); otherwise at the evaluation quantile threshold.
EvalReport make_eval_report(std::vector<double> positive_errors,
                            std::vector<double> negative_errors, double target_tpr,
                            double decision_tau = -1.0);

/// One error sample per row: side,error. Side is "positive" or "negative".
void write_eval_csv(const EvalReport& report, const std::string& path);

/// Summary JSON: tpr, fpr_at_target, auc, tau, n.
void write_eval_json(const EvalReport& report, const std::string& path);

}  // namespace authfp
