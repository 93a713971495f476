#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "authfp/errors.hpp"
#include "authfp/metrics.hpp"

using namespace authfp;

TEST_CASE("higher-interpolation quantile: {1..100}/100 at 0.95 gives 0.96") {
    std::vector<double> errors;
    for (int i = 1; i <= 100; ++i) errors.push_back(i / 100.0);
    CHECK(quantile_higher(errors, 0.95) == doctest::Approx(0.96));
}

TEST_CASE("degenerate quantile: identical values return that value") {
    std::vector<double> errors(37, 0.125);
    CHECK(quantile_higher(errors, 0.95) == 0.125);
}

TEST_CASE("quantile bounds") {
    std::vector<double> errors = {3.0, 1.0, 2.0};
    CHECK(quantile_higher(errors, 0.0) == 1.0);
    CHECK(quantile_higher(errors, 1.0) == 3.0);
    CHECK_THROWS_AS((void)quantile_higher({}, 0.5), InvalidArgumentError);
}

TEST_CASE("perfect separation gives FPR 0 and AUC 1") {
    std::vector<double> pos(50, 0.1);
    std::vector<double> neg(50, 0.9);
    EvalReport report = make_eval_report(pos, neg, 0.95);
    CHECK(report.fpr_at_target == 0.0);
    CHECK(report.auc == 1.0);
}

TEST_CASE("two-point distributions with 10% swapped labels give FPR 0.10") {
    std::vector<double> pos, neg;
    for (int i = 0; i < 90; ++i) pos.push_back(0.1);
    for (int i = 0; i < 10; ++i) pos.push_back(0.2);
    for (int i = 0; i < 90; ++i) neg.push_back(0.2);
    for (int i = 0; i < 10; ++i) neg.push_back(0.1);
    EvalReport report = make_eval_report(pos, neg, 0.95);
    // The 0.95 quantile of positives is 0.2; negatives strictly below are
    // exactly the 10% swapped ones.
    CHECK(report.fpr_at_target == doctest::Approx(0.10));
    CHECK(report.auc == doctest::Approx(0.90));
}

TEST_CASE("swapping sides complements AUC") {
    std::vector<double> pos = {0.1, 0.15, 0.2, 0.3, 0.12};
    std::vector<double> neg = {0.25, 0.3, 0.4, 0.1, 0.35};
    EvalReport forward_report = make_eval_report(pos, neg, 0.95);
    EvalReport swapped = make_eval_report(neg, pos, 0.95);
    CHECK(forward_report.auc + swapped.auc == doctest::Approx(1.0));
}

TEST_CASE("identical distributions give FPR near the target TPR") {
    std::vector<double> pos, neg;
    for (int i = 0; i < 2000; ++i) {
        pos.push_back(static_cast<double>((i * 7919) % 2000));
        neg.push_back(static_cast<double>((i * 104729) % 2000));
    }
    EvalReport report = make_eval_report(pos, neg, 0.95);
    CHECK(report.fpr_at_target > 0.92);
    CHECK(report.fpr_at_target < 0.98);
    CHECK(report.auc == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("fixed decision threshold feeds the tpr/fpr fields") {
    std::vector<double> pos = {0.1, 0.2, 0.3, 0.4};
    std::vector<double> neg = {0.25, 0.35, 0.45, 0.55};
    EvalReport report = make_eval_report(pos, neg, 0.5, 0.3);
    CHECK(report.tau == 0.3);
    CHECK(report.tpr == doctest::Approx(0.5));   // 0.1, 0.2 below
    CHECK(report.fpr == doctest::Approx(0.25));  // 0.25 below
}

TEST_CASE("csv and json exports carry the schema and summary") {
    const auto dir = std::filesystem::temp_directory_path() / "authfp_metrics_test";
    std::filesystem::create_directories(dir);
    EvalReport report = make_eval_report({0.1, 0.2}, {0.3, 0.4}, 0.95);
    const std::string csv_path = (dir / "samples.csv").string();
    const std::string json_path = (dir / "summary.json").string();
    write_eval_csv(report, csv_path);
    write_eval_json(report, json_path);

    std::ifstream csv(csv_path);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "# schema: authfp.eval-samples.v1");
    std::getline(csv, line);
    CHECK(line == "side,error");
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == 4);

    std::ifstream json(json_path);
    std::string all((std::istreambuf_iterator<char>(json)), std::istreambuf_iterator<char>());
    CHECK(all.find("fpr_at_target") != std::string::npos);
    CHECK(all.find("auc") != std::string::npos);
    std::filesystem::remove_all(dir);
}
