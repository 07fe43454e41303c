#include "ados/assessment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include <json.hpp>

namespace ados {

using nlohmann::json;

std::string_view ternary_class_name(TernaryClass value) {
    switch (value) {
        case TernaryClass::NonSpectrum: return "non_spectrum";
        case TernaryClass::SpectrumDisorder: return "spectrum_disorder";
        case TernaryClass::Autism: return "autism";
    }
    return "?";
}

int total_score(const ItemScoreSheet& items8, const ClinicianItemSheet& clinician) {
    clinician.validate();
    int total = 0;
    for (ItemId item : kAllItems) {
        const int score = items8[item];
        if (score < 0 || score > 3) {
            throw Error(ErrorKind::ScoreOutOfRange,
                        std::string(item_name(item)) + " = " + std::to_string(score));
        }
        total += std::min(score, 2);
    }
    for (const auto& [label, score] : clinician.scores) {
        total += std::min(score, 2);
    }
    return total;
}

DiagnosisClass classify(int total) {
    if (total < 0 || total > 28) {
        throw Error(ErrorKind::OutOfRangeTotal, std::to_string(total));
    }
    DiagnosisClass out;
    if (total <= 6) {
        out.ternary = TernaryClass::NonSpectrum;
    } else if (total <= 8) {
        out.ternary = TernaryClass::SpectrumDisorder;
    } else {
        out.ternary = TernaryClass::Autism;
    }
    out.binary = out.ternary == TernaryClass::NonSpectrum ? BinaryClass::NonSpectrum
                                                          : BinaryClass::Asd;
    return out;
}

double item_mae(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) {
        throw Error(ErrorKind::LengthMismatch,
                    std::to_string(pred.size()) + " vs " + std::to_string(truth.size()));
    }
    if (pred.empty()) {
        throw Error(ErrorKind::EmptyInput, "item_mae");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        sum += std::abs(pred[i] - truth[i]);
    }
    return sum / static_cast<double>(pred.size());
}

ClassificationMetrics classification_metrics(const std::vector<int>& pred,
                                             const std::vector<int>& truth,
                                             int n_classes) {
    if (pred.size() != truth.size()) {
        throw Error(ErrorKind::LengthMismatch,
                    std::to_string(pred.size()) + " vs " + std::to_string(truth.size()));
    }
    if (pred.empty()) {
        throw Error(ErrorKind::EmptyInput, "classification_metrics");
    }

    ClassificationMetrics out;
    out.confusion.assign(static_cast<std::size_t>(n_classes),
                         std::vector<int>(static_cast<std::size_t>(n_classes), 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] < 0 || pred[i] >= n_classes || truth[i] < 0 || truth[i] >= n_classes) {
            throw Error(ErrorKind::ScoreOutOfRange, "class index");
        }
        out.confusion[static_cast<std::size_t>(truth[i])]
                     [static_cast<std::size_t>(pred[i])]++;
        if (pred[i] == truth[i]) ++correct;
    }
    out.accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());

    double precision_sum = 0.0, f1_sum = 0.0;
    std::size_t class_count = 0;
    for (int c = 0; c < n_classes; ++c) {
        int tp = out.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        int truth_total = 0, pred_total = 0;
        for (int k = 0; k < n_classes; ++k) {
            truth_total += out.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
            pred_total += out.confusion[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
        }
        if (truth_total == 0) continue;  // absent from truth: excluded
        const double precision =
            pred_total == 0 ? 0.0 : static_cast<double>(tp) / pred_total;
        const double recall = static_cast<double>(tp) / truth_total;
        const double f1 = precision + recall == 0.0
                              ? 0.0
                              : 2.0 * precision * recall / (precision + recall);
        precision_sum += precision;
        f1_sum += f1;
        ++class_count;
    }
    if (class_count > 0) {
        out.macro_precision = precision_sum / static_cast<double>(class_count);
        out.macro_f1 = f1_sum / static_cast<double>(class_count);
    }
    return out;
}

namespace {

json metrics_to_json(const ClassificationMetrics& m) {
    return {{"accuracy", m.accuracy},
            {"macro_precision", m.macro_precision},
            {"macro_f1", m.macro_f1},
            {"confusion", m.confusion}};
}

}  // namespace

std::string MetricsReport::to_json() const {
    json doc;
    doc["per_item_mae"] = per_item_mae;
    doc["mean_mae"] = mean_mae;
    doc["binary"] = metrics_to_json(binary);
    doc["ternary"] = metrics_to_json(ternary);
    return doc.dump(2) + "\n";
}

MetricsReport evaluate_source(const PredictionMap& predictions, const LabelMap& labels,
                              const std::string& source_name) {
    if (labels.empty()) {
        throw Error(ErrorKind::EmptyInput, "labels");
    }
    MetricsReport report;
    std::vector<int> pred2, truth2, pred3, truth3;

    // Per-item MAE over the unrounded predictions.
    for (ItemId item : kAllItems) {
        std::vector<double> pred, truth;
        for (const auto& [session_id, label] : labels) {
            auto found = predictions.find(session_id);
            if (found == predictions.end()) {
                throw Error(ErrorKind::MissingPrediction,
                            session_id + " / " + source_name);
            }
            pred.push_back(found->second[item_index(item)]);
            truth.push_back(static_cast<double>(label.items[item]));
        }
        const double mae = item_mae(pred, truth);
        report.per_item_mae[std::string(item_name(item))] = mae;
        report.mean_mae += mae;
    }
    report.mean_mae /= static_cast<double>(kItemCount);

    // Classification path: round, clamp, attach clinician items, classify.
    for (const auto& [session_id, label] : labels) {
        const auto& scores = predictions.at(session_id);
        ItemScoreSheet rounded;
        for (ItemId item : kAllItems) {
            int value = static_cast<int>(std::round(scores[item_index(item)]));
            rounded[item] = std::clamp(value, 0, 3);
        }
        const DiagnosisClass predicted =
            classify(total_score(rounded, label.clinician));
        const DiagnosisClass actual =
            classify(total_score(label.items, label.clinician));
        pred2.push_back(static_cast<int>(predicted.binary));
        truth2.push_back(static_cast<int>(actual.binary));
        pred3.push_back(static_cast<int>(predicted.ternary));
        truth3.push_back(static_cast<int>(actual.ternary));
    }
    report.binary = classification_metrics(pred2, truth2, 2);
    report.ternary = classification_metrics(pred3, truth3, 3);
    return report;
}

std::map<std::string, MetricsReport> evaluate_corpus(
    const std::map<std::string, PredictionMap>& sources, const LabelMap& labels,
    std::uint64_t random_seed) {
    std::map<std::string, MetricsReport> reports;
    for (const auto& [name, predictions] : sources) {
        reports[name] = evaluate_source(predictions, labels, name);
    }

    // Seeded uniform baseline over 0..3 per item, in sorted session order.
    std::mt19937_64 rng(random_seed);
    std::uniform_int_distribution<int> dist(0, 3);
    PredictionMap random_predictions;
    for (const auto& [session_id, label] : labels) {
        std::array<double, kItemCount> scores{};
        for (auto& value : scores) value = static_cast<double>(dist(rng));
        random_predictions[session_id] = scores;
    }
    reports["random"] = evaluate_source(random_predictions, labels, "random");
    return reports;
}

std::string metrics_table(const std::map<std::string, MetricsReport>& reports) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "model";
    for (ItemId item : kAllItems) out << std::right << std::setw(9) << item_name(item);
    for (const char* column :
         {"avg", "2-acc", "2-precision", "2-f1", "3-acc", "3-precision", "3-f1"}) {
        out << std::right << std::setw(13) << column;
    }
    out << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto& [name, report] : reports) {
        out << std::left << std::setw(10) << name;
        for (ItemId item : kAllItems) {
            out << std::right << std::setw(9)
                << report.per_item_mae.at(std::string(item_name(item)));
        }
        out << std::right << std::setw(13) << report.mean_mae;
        out << std::setw(13) << report.binary.accuracy;
        out << std::setw(13) << report.binary.macro_precision;
        out << std::setw(13) << report.binary.macro_f1;
        out << std::setw(13) << report.ternary.accuracy;
        out << std::setw(13) << report.ternary.macro_precision;
        out << std::setw(13) << report.ternary.macro_f1;
        out << '\n';
    }
    return out.str();
}

}  // namespace ados
