#pragma once

#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace madegan {

struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScoredSet {
    std::vector<double> scores;
    std::vector<int> labels;  // 0 negative, 1 positive
};

struct CurvePoint {
    double x, y;
};

struct PointMetrics {
    double recall = 0.0;
    double precision = 0.0;
    double f_score = 0.0;
    double accuracy = 0.0;
    bool zero_division = false;
};

// Mann-Whitney rank statistic with tie correction; equals the trapezoidal
// area under the ROC curve.
double auroc(const ScoredSet& set);

// Step-interpolated area under the precision-recall curve (right-continuous
// precision steps, no trapezoids).
double auprc(const ScoredSet& set);

PointMetrics point_metrics(const ScoredSet& set, double threshold);

// Threshold maximizing f-score over the set's distinct scores.
double best_fscore_threshold(const ScoredSet& set);

// rows = true labels, columns = predicted.
std::vector<std::vector<std::size_t>> confusion(const std::vector<int>& truth,
                                                const std::vector<int>& predicted, std::size_t m);

// (FPR, TPR) sweep for plotting.
std::vector<CurvePoint> roc_curve(const ScoredSet& set);
// (recall, precision) sweep.
std::vector<CurvePoint> pr_curve(const ScoredSet& set);
// (FPR, FNR) sweep for log-log plotting.
std::vector<CurvePoint> det_curve(const ScoredSet& set);

struct EvalReport {
    double auroc = 0.0, auprc = 0.0;
    PointMetrics point;
    double threshold = 0.0;
    std::vector<std::vector<std::size_t>> confusion_matrix;
    std::vector<CurvePoint> roc, pr, det;
};

EvalReport evaluate_scored(const ScoredSet& set, double threshold);

void write_report_json(std::ostream& os, const EvalReport& report);
void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve,
                     const std::string& xlabel, const std::string& ylabel);
// Minimal SVG line chart; log-log axes when log_axes is set (DET curves).
void write_curve_svg(std::ostream& os, const std::vector<CurvePoint>& curve,
                     const std::string& title, bool log_axes = false);

// k disjoint (train, test) index splits covering all indices. Stratified
// mode preserves per-class ratios within one sample and requires every
// class to have at least k members.
struct FoldSplit {
    std::vector<std::size_t> train, test;
};
std::vector<FoldSplit> kfold(std::size_t n, std::size_t k, std::mt19937_64& rng);
std::vector<FoldSplit> kfold_stratified(const std::vector<int>& labels, std::size_t k,
                                        std::mt19937_64& rng);

// Per-class recall (or F1) averaged over classes; rows = truth. Classes with
// no positives (or an undefined F1 denominator) count as zero.
double macro_recall(const std::vector<std::vector<std::size_t>>& confusion_matrix);
double macro_f1(const std::vector<std::vector<std::size_t>>& confusion_matrix);

struct MeanStd {
    double mean = 0.0, std = 0.0;
};
MeanStd mean_std(const std::vector<double>& values);

}  // namespace madegan
