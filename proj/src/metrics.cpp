#include "madegan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace madegan {

namespace {

void require_both_classes(const ScoredSet& set, const char* op) {
    if (set.scores.size() != set.labels.size())
        throw MetricError(std::string(op) + ": score/label length mismatch");
    bool pos = false, neg = false;
    for (int l : set.labels) (l ? pos : neg) = true;
    if (!pos || !neg) throw MetricError(std::string(op) + ": needs both classes present");
}

// descending-score sweep shared by the curve functions; emits cumulative
// (tp, fp) after each distinct-score group
template <typename Emit>
void sweep(const ScoredSet& set, Emit emit) {
    std::vector<std::size_t> idx(set.scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return set.scores[a] > set.scores[b]; });
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < idx.size();) {
        double s = set.scores[idx[i]];
        while (i < idx.size() && set.scores[idx[i]] == s) {
            if (set.labels[idx[i]]) ++tp;
            else ++fp;
            ++i;
        }
        emit(tp, fp, s);
    }
}

}  // namespace

double auroc(const ScoredSet& set) {
    require_both_classes(set, "auroc");
    std::size_t n = set.scores.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return set.scores[a] < set.scores[b]; });
    // average ranks over ties (1-based)
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && set.scores[idx[j]] == set.scores[idx[i]]) ++j;
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) rank[idx[t]] = avg;
        i = j;
    }
    double pos_rank_sum = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (set.labels[i]) {
            pos_rank_sum += rank[i];
            ++pos;
        }
    std::size_t neg = n - pos;
    double u = pos_rank_sum - static_cast<double>(pos) * (static_cast<double>(pos) + 1.0) / 2.0;
    return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

double auprc(const ScoredSet& set) {
    if (std::none_of(set.labels.begin(), set.labels.end(), [](int l) { return l == 1; }))
        throw MetricError("auprc: no positives");
    if (set.scores.size() != set.labels.size())
        throw MetricError("auprc: score/label length mismatch");
    std::size_t total_pos = static_cast<std::size_t>(
        std::count(set.labels.begin(), set.labels.end(), 1));
    double area = 0.0, prev_recall = 0.0;
    sweep(set, [&](std::size_t tp, std::size_t fp, double) {
        double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
        double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    });
    return area;
}

PointMetrics point_metrics(const ScoredSet& set, double threshold) {
    if (set.scores.size() != set.labels.size())
        throw MetricError("point_metrics: score/label length mismatch");
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < set.scores.size(); ++i) {
        bool pred = set.scores[i] >= threshold;
        bool truth = set.labels[i] == 1;
        if (pred && truth) ++tp;
        else if (pred) ++fp;
        else if (truth) ++fn;
        else ++tn;
    }
    PointMetrics m;
    if (tp + fn == 0) m.zero_division = true;
    else m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (tp + fp == 0) m.zero_division = true;
    else m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (m.precision + m.recall > 0.0)
        m.f_score = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    else m.zero_division = true;
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(set.scores.size());
    return m;
}

double best_fscore_threshold(const ScoredSet& set) {
    require_both_classes(set, "best_fscore_threshold");
    std::vector<double> distinct = set.scores;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    double best_t = distinct.front(), best_f = -1.0;
    for (double t : distinct) {
        PointMetrics m = point_metrics(set, t);
        if (m.f_score > best_f) {
            best_f = m.f_score;
            best_t = t;
        }
    }
    return best_t;
}

std::vector<std::vector<std::size_t>> confusion(const std::vector<int>& truth,
                                                const std::vector<int>& predicted, std::size_t m) {
    if (truth.size() != predicted.size())
        throw MetricError("confusion: label list length mismatch");
    std::vector<std::vector<std::size_t>> cm(m, std::vector<std::size_t>(m, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || predicted[i] < 0 || static_cast<std::size_t>(truth[i]) >= m ||
            static_cast<std::size_t>(predicted[i]) >= m)
            throw MetricError("confusion: label out of range at index " + std::to_string(i));
        ++cm[truth[i]][predicted[i]];
    }
    return cm;
}

std::vector<CurvePoint> roc_curve(const ScoredSet& set) {
    require_both_classes(set, "roc_curve");
    double pos = static_cast<double>(std::count(set.labels.begin(), set.labels.end(), 1));
    double neg = static_cast<double>(set.labels.size()) - pos;
    std::vector<CurvePoint> out{{0.0, 0.0}};
    sweep(set, [&](std::size_t tp, std::size_t fp, double) {
        out.push_back({static_cast<double>(fp) / neg, static_cast<double>(tp) / pos});
    });
    return out;
}

std::vector<CurvePoint> pr_curve(const ScoredSet& set) {
    if (std::none_of(set.labels.begin(), set.labels.end(), [](int l) { return l == 1; }))
        throw MetricError("pr_curve: no positives");
    double pos = static_cast<double>(std::count(set.labels.begin(), set.labels.end(), 1));
    std::vector<CurvePoint> out;
    sweep(set, [&](std::size_t tp, std::size_t fp, double) {
        out.push_back({static_cast<double>(tp) / pos,
                       static_cast<double>(tp) / static_cast<double>(tp + fp)});
    });
    return out;
}

std::vector<CurvePoint> det_curve(const ScoredSet& set) {
    require_both_classes(set, "det_curve");
    auto roc = roc_curve(set);
    std::vector<CurvePoint> out;
    out.reserve(roc.size());
    for (auto& p : roc) out.push_back({p.x, 1.0 - p.y});  // (FPR, FNR)
    return out;
}

EvalReport evaluate_scored(const ScoredSet& set, double threshold) {
    EvalReport r;
    r.auroc = auroc(set);
    r.auprc = auprc(set);
    r.threshold = threshold;
    r.point = point_metrics(set, threshold);
    std::vector<int> pred(set.scores.size());
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = set.scores[i] >= threshold ? 1 : 0;
    r.confusion_matrix = confusion(set.labels, pred, 2);
    r.roc = roc_curve(set);
    r.pr = pr_curve(set);
    r.det = det_curve(set);
    return r;
}

void write_report_json(std::ostream& os, const EvalReport& r) {
    os << std::setprecision(10);
    os << "{\n"
       << "  \"auroc\": " << r.auroc << ",\n"
       << "  \"auprc\": " << r.auprc << ",\n"
       << "  \"threshold\": " << r.threshold << ",\n"
       << "  \"recall\": " << r.point.recall << ",\n"
       << "  \"precision\": " << r.point.precision << ",\n"
       << "  \"f_score\": " << r.point.f_score << ",\n"
       << "  \"accuracy\": " << r.point.accuracy << ",\n"
       << "  \"zero_division\": " << (r.point.zero_division ? "true" : "false") << ",\n"
       << "  \"confusion\": [";
    for (std::size_t i = 0; i < r.confusion_matrix.size(); ++i) {
        os << (i ? ", [" : "[");
        for (std::size_t j = 0; j < r.confusion_matrix[i].size(); ++j)
            os << (j ? ", " : "") << r.confusion_matrix[i][j];
        os << "]";
    }
    os << "]\n}\n";
}

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve,
                     const std::string& xlabel, const std::string& ylabel) {
    os << xlabel << "," << ylabel << "\n" << std::setprecision(10);
    for (auto& p : curve) os << p.x << "," << p.y << "\n";
}

void write_curve_svg(std::ostream& os, const std::vector<CurvePoint>& curve,
                     const std::string& title, bool log_axes) {
    const double w = 480, h = 360, margin = 40;
    auto map_x = [&](double v) {
        if (log_axes) v = (std::log10(std::max(v, 1e-3)) + 3.0) / 3.0;
        return margin + v * (w - 2 * margin);
    };
    auto map_y = [&](double v) {
        if (log_axes) v = (std::log10(std::max(v, 1e-3)) + 3.0) / 3.0;
        return h - margin - v * (h - 2 * margin);
    };
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\">\n";
    os << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
    os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << w - 2 * margin
       << "\" height=\"" << h - 2 * margin << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (auto& p : curve) os << map_x(p.x) << "," << map_y(p.y) << " ";
    os << "\"/>\n</svg>\n";
}

std::vector<FoldSplit> kfold(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    if (k < 2) throw MetricError("kfold: k must be >= 2");
    if (n < k) throw MetricError("kfold: fewer samples than folds");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<FoldSplit> folds(k);
    for (std::size_t i = 0; i < n; ++i) folds[i % k].test.push_back(idx[i]);
    for (std::size_t f = 0; f < k; ++f)
        for (std::size_t i = 0; i < n; ++i)
            if (i % k != f) folds[f].train.push_back(idx[i]);
    return folds;
}

std::vector<FoldSplit> kfold_stratified(const std::vector<int>& labels, std::size_t k,
                                        std::mt19937_64& rng) {
    if (k < 2) throw MetricError("kfold: k must be >= 2");
    int max_label = *std::max_element(labels.begin(), labels.end());
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(max_label) + 1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) throw MetricError("kfold: negative label");
        by_class[labels[i]].push_back(i);
    }
    std::vector<FoldSplit> folds(k);
    for (auto& cls : by_class) {
        if (cls.empty()) continue;
        if (cls.size() < k)
            throw MetricError("kfold: a class has fewer samples than folds under stratification");
        std::shuffle(cls.begin(), cls.end(), rng);
        for (std::size_t i = 0; i < cls.size(); ++i) folds[i % k].test.push_back(cls[i]);
    }
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<bool> in_test(labels.size(), false);
        for (auto i : folds[f].test) in_test[i] = true;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (!in_test[i]) folds[f].train.push_back(i);
    }
    return folds;
}

namespace {

struct ClassTotals {
    double tp, fp, fn;
};

ClassTotals class_totals(const std::vector<std::vector<std::size_t>>& cm, std::size_t c) {
    ClassTotals t{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < cm.size(); ++i) {
        for (std::size_t j = 0; j < cm[i].size(); ++j) {
            double v = static_cast<double>(cm[i][j]);
            if (i == c && j == c) t.tp += v;
            else if (j == c) t.fp += v;
            else if (i == c) t.fn += v;
        }
    }
    return t;
}

}  // namespace

double macro_recall(const std::vector<std::vector<std::size_t>>& confusion_matrix) {
    if (confusion_matrix.empty()) throw MetricError("macro_recall: empty confusion matrix");
    double acc = 0.0;
    for (std::size_t c = 0; c < confusion_matrix.size(); ++c) {
        ClassTotals t = class_totals(confusion_matrix, c);
        if (t.tp + t.fn > 0) acc += t.tp / (t.tp + t.fn);
    }
    return acc / static_cast<double>(confusion_matrix.size());
}

double macro_f1(const std::vector<std::vector<std::size_t>>& confusion_matrix) {
    if (confusion_matrix.empty()) throw MetricError("macro_f1: empty confusion matrix");
    double acc = 0.0;
    for (std::size_t c = 0; c < confusion_matrix.size(); ++c) {
        ClassTotals t = class_totals(confusion_matrix, c);
        double denom = 2.0 * t.tp + t.fp + t.fn;
        if (denom > 0) acc += 2.0 * t.tp / denom;
    }
    return acc / static_cast<double>(confusion_matrix.size());
}

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd r;
    if (values.empty()) return r;
    for (double v : values) r.mean += v;
    r.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double s = 0.0;
        for (double v : values) s += (v - r.mean) * (v - r.mean);
        r.std = std::sqrt(s / static_cast<double>(values.size() - 1));
    }
    return r;
}

}  // namespace madegan
