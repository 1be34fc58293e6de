#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wgfd/dataset.hpp"

namespace wgfd::metrics {

struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// A score at or above the threshold counts as a positive (fake) prediction.
ConfusionMatrix confusion(std::span<const Label> labels, std::span<const double> scores, double threshold = 0.5);

double accuracy(const ConfusionMatrix& cm);
// 2tp / (2tp + fp + fn); 0 when nothing is positive on either side.
double f1(const ConfusionMatrix& cm);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0; // +inf for the (0,0) start point
    std::size_t tp = 0;     // cumulative counts behind the rates
    std::size_t fp = 0;
};

using RocCurve = std::vector<RocPoint>;

// Points after each group of exactly tied scores, from (0,0) to (1,1).
RocCurve roc_curve(std::span<const Label> labels, std::span<const double> scores);

// Trapezoidal area, accumulated on the integer counts and divided once, so
// it equals the Mann-Whitney statistic (ties half credit) exactly.
double auc(const RocCurve& curve);

// Sum over tie groups (in descending score order) of recall increment times
// precision at that cut.
double average_precision(std::span<const Label> labels, std::span<const double> scores);

struct EvalReport {
    double accuracy = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    double average_precision = 0.0;
    ConfusionMatrix confusion;
    RocCurve roc;
    std::size_t n_items = 0;
};

EvalReport evaluate(std::span<const Label> labels, std::span<const double> scores, double threshold = 0.5);

// {"accuracy", "f1", "auc", "ap", "tp", "fp", "tn", "fn", "n"} as pretty JSON.
std::string report_json(const EvalReport& r);
std::string roc_csv(const RocCurve& curve);
// Self-contained SVG of the ROC polyline with the chance diagonal.
std::string roc_svg(const RocCurve& curve, const std::string& title);

void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace wgfd::metrics
