#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ados/items.hpp"

namespace ados {

enum class TernaryClass { NonSpectrum, SpectrumDisorder, Autism };
enum class BinaryClass { NonSpectrum, Asd };

struct DiagnosisClass {
    TernaryClass ternary = TernaryClass::NonSpectrum;
    BinaryClass binary = BinaryClass::NonSpectrum;

    bool operator==(const DiagnosisClass&) const = default;
};

std::string_view ternary_class_name(TernaryClass value);

/// Sums the 14 item scores after merging 3 into 2 per item. Range 0..28.
int total_score(const ItemScoreSheet& items8, const ClinicianItemSheet& clinician);

/// Module-3 cutoffs: 0-6 non-spectrum, 7-8 spectrum disorder, >= 9 autism.
DiagnosisClass classify(int total);

double item_mae(const std::vector<double>& pred, const std::vector<double>& truth);

struct ClassificationMetrics {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_f1 = 0.0;
    std::vector<std::vector<int>> confusion;  // confusion[truth][pred]
};

/// Accuracy plus macro precision/F1 over the classes present in truth.
/// Labels are class indexes in [0, n_classes).
ClassificationMetrics classification_metrics(const std::vector<int>& pred,
                                             const std::vector<int>& truth,
                                             int n_classes);

struct MetricsReport {
    std::map<std::string, double> per_item_mae;  // keyed by item name
    double mean_mae = 0.0;
    ClassificationMetrics binary;
    ClassificationMetrics ternary;

    std::string to_json() const;
};

struct SessionLabel {
    ItemScoreSheet items;
    ClinicianItemSheet clinician;
};

using LabelMap = std::map<std::string, SessionLabel>;

/// Real-valued per-item predictions keyed by session; integer sources store
/// their scores exactly, fused sources stay unrounded for the MAE path.
using PredictionMap = std::map<std::string, std::array<double, kItemCount>>;

/// Scores one prediction source: per-item MAE over sessions, plus binary and
/// ternary classification after rounding and attaching clinician items.
MetricsReport evaluate_source(const PredictionMap& predictions, const LabelMap& labels,
                              const std::string& source_name);

/// Evaluates every provided source plus a seeded uniform-random baseline.
std::map<std::string, MetricsReport> evaluate_corpus(
    const std::map<std::string, PredictionMap>& sources, const LabelMap& labels,
    std::uint64_t random_seed);

/// Renders reports as an aligned table: one row per source, columns
/// A4..B11, avg, 2-acc, 2-precision, 2-f1, 3-acc, 3-precision, 3-f1.
std::string metrics_table(const std::map<std::string, MetricsReport>& reports);

}  // namespace ados
