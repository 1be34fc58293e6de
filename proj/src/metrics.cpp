#include "wgfd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "json.hpp"

#include "wgfd/error.hpp"
#include "wgfd/image.hpp"

namespace wgfd::metrics {

namespace {

void check_inputs(std::span<const Label> labels, std::span<const double> scores) {
    if (labels.size() != scores.size()) {
        throw InvalidArgument("length mismatch: " + std::to_string(labels.size()) + " labels vs " +
                              std::to_string(scores.size()) + " scores");
    }
    if (labels.empty()) throw InvalidArgument("empty input");
    for (double s : scores)
        if (std::isnan(s)) throw InvalidArgument("score is NaN");
}

// Indices sorted by descending score; stable so the order is reproducible.
std::vector<std::size_t> rank_desc(std::span<const double> scores) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return idx;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

} // namespace

ConfusionMatrix confusion(std::span<const Label> labels, std::span<const double> scores, double threshold) {
    check_inputs(labels, scores);
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        const bool pos = labels[i] == Label::Fake;
        if (pred && pos) ++cm.tp;
        else if (pred) ++cm.fp;
        else if (pos) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw InvalidArgument("empty confusion matrix");
    return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double f1(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw InvalidArgument("empty confusion matrix");
    const std::size_t denom = 2 * cm.tp + cm.fp + cm.fn;
    return denom == 0 ? 0.0 : static_cast<double>(2 * cm.tp) / static_cast<double>(denom);
}

RocCurve roc_curve(std::span<const Label> labels, std::span<const double> scores) {
    check_inputs(labels, scores);
    std::size_t pos = 0;
    for (auto l : labels) pos += l == Label::Fake;
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw InvalidArgument("ROC needs both classes; got a single-class input");

    const auto idx = rank_desc(scores);
    RocCurve curve;
    curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity(), 0, 0});
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < idx.size();) {
        const double s = scores[idx[i]];
        while (i < idx.size() && scores[idx[i]] == s) {
            if (labels[idx[i]] == Label::Fake) ++tp;
            else ++fp;
            ++i;
        }
        curve.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                         static_cast<double>(tp) / static_cast<double>(pos), s, tp, fp});
    }
    return curve;
}

double auc(const RocCurve& curve) {
    if (curve.size() < 2) throw InvalidArgument("ROC curve needs at least two points");
    const auto& last = curve.back();
    if (last.tp == 0 || last.fp == 0) throw InvalidArgument("ROC curve does not reach (1,1)");
    // Twice the area in count units: sum of dFP * (TP_prev + TP_cur).
    std::uint64_t twice = 0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        twice += static_cast<std::uint64_t>(curve[i].fp - curve[i - 1].fp) * (curve[i - 1].tp + curve[i].tp);
    }
    return static_cast<double>(twice) / (2.0 * static_cast<double>(last.tp) * static_cast<double>(last.fp));
}

double average_precision(std::span<const Label> labels, std::span<const double> scores) {
    check_inputs(labels, scores);
    std::size_t pos = 0;
    for (auto l : labels) pos += l == Label::Fake;
    if (pos == 0) throw InvalidArgument("average precision needs at least one positive label");

    const auto idx = rank_desc(scores);
    double ap = 0.0;
    std::size_t tp = 0, seen = 0;
    for (std::size_t i = 0; i < idx.size();) {
        const double s = scores[idx[i]];
        std::size_t group_tp = 0;
        while (i < idx.size() && scores[idx[i]] == s) {
            group_tp += labels[idx[i]] == Label::Fake;
            ++seen;
            ++i;
        }
        if (group_tp == 0) continue;
        tp += group_tp;
        ap += (static_cast<double>(group_tp) / static_cast<double>(pos)) *
              (static_cast<double>(tp) / static_cast<double>(seen));
    }
    return ap;
}

EvalReport evaluate(std::span<const Label> labels, std::span<const double> scores, double threshold) {
    EvalReport r;
    r.confusion = confusion(labels, scores, threshold);
    r.accuracy = accuracy(r.confusion);
    r.f1 = f1(r.confusion);
    r.roc = roc_curve(labels, scores);
    r.auc = auc(r.roc);
    r.average_precision = average_precision(labels, scores);
    r.n_items = labels.size();
    return r;
}

std::string report_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["accuracy"] = r.accuracy;
    j["f1"] = r.f1;
    j["auc"] = r.auc;
    j["ap"] = r.average_precision;
    j["tp"] = r.confusion.tp;
    j["fp"] = r.confusion.fp;
    j["tn"] = r.confusion.tn;
    j["fn"] = r.confusion.fn;
    j["n"] = r.n_items;
    return j.dump(2) + "\n";
}

std::string roc_csv(const RocCurve& curve) {
    std::string out = "fpr,tpr\n";
    for (const auto& p : curve) out += fmt("%.10g", p.fpr) + "," + fmt("%.10g", p.tpr) + "\n";
    return out;
}

std::string roc_svg(const RocCurve& curve, const std::string& title) {
    constexpr double size = 400.0, margin = 50.0;
    auto X = [&](double v) { return fmt("%.2f", margin + v * size); };
    auto Y = [&](double v) { return fmt("%.2f", margin + (1.0 - v) * size); };
    std::string escaped;
    for (char c : title) {
        if (c == '<') escaped += "&lt;";
        else if (c == '>') escaped += "&gt;";
        else if (c == '&') escaped += "&amp;";
        else escaped += c;
    }
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"500\" height=\"500\" "
                    "font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"500\" height=\"500\" fill=\"white\"/>\n";
    s += "<text x=\"250\" y=\"25\" text-anchor=\"middle\" font-size=\"14\">" + escaped + "</text>\n";
    s += "<rect x=\"50\" y=\"50\" width=\"400\" height=\"400\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double v = 0.2 * i;
        const std::string label = fmt("%.1f", v);
        s += "<line x1=\"" + X(v) + "\" y1=\"450\" x2=\"" + X(v) + "\" y2=\"456\" stroke=\"black\"/>";
        s += "<text x=\"" + X(v) + "\" y=\"470\" text-anchor=\"middle\">" + label + "</text>\n";
        s += "<line x1=\"44\" y1=\"" + Y(v) + "\" x2=\"50\" y2=\"" + Y(v) + "\" stroke=\"black\"/>";
        s += "<text x=\"40\" y=\"" + Y(v) + "\" text-anchor=\"end\" dominant-baseline=\"middle\">" + label +
             "</text>\n";
    }
    s += "<text x=\"250\" y=\"492\" text-anchor=\"middle\">False positive rate</text>\n";
    s += "<text x=\"14\" y=\"250\" text-anchor=\"middle\" transform=\"rotate(-90 14 250)\">True positive rate</text>\n";
    s += "<line x1=\"50\" y1=\"450\" x2=\"450\" y2=\"50\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
    s += "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (i) s += " ";
        s += X(curve[i].fpr) + "," + Y(curve[i].tpr);
    }
    s += "\"/>\n</svg>\n";
    return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace wgfd::metrics
