#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ados/features.hpp"
#include "ados/items.hpp"

namespace ados {

enum class RuleDirection { HigherIsWorse, LowerIsWorse };

std::string_view rule_direction_name(RuleDirection direction);
std::optional<RuleDirection> rule_direction_from_name(std::string_view name);

struct RuleTerm {
    std::string feature;  // one of FeatureVector::names()
    double weight = 1.0;

    bool operator==(const RuleTerm&) const = default;
};

/// Threshold ladder mapping a weighted feature sum s to a score in {0,1,2}.
/// HigherIsWorse (t1 <= t2):  0 if s < t1;  1 if t1 <= s < t2;  2 if s >= t2.
/// LowerIsWorse  (t2 <= t1):  0 if s > t1;  1 if t2 < s <= t1;  2 if s <= t2.
/// Boundary values resolve toward the worse score.
struct ItemRule {
    ItemId item = ItemId::A4;
    std::vector<RuleTerm> terms;
    RuleDirection direction = RuleDirection::HigherIsWorse;
    double t1 = 0.0;
    double t2 = 0.0;

    void validate() const;

    bool operator==(const ItemRule&) const = default;
};

/// One rule per item, total over the 8 items.
struct RuleParams {
    std::array<ItemRule, kItemCount> rules{};

    ItemRule& operator[](ItemId item) { return rules[item_index(item)]; }
    const ItemRule& operator[](ItemId item) const { return rules[item_index(item)]; }

    std::string to_json() const;
    static RuleParams from_json(const std::string& text);

    bool operator==(const RuleParams&) const = default;
};

/// Default feature-to-item mapping; thresholds are placeholders until fitted.
RuleParams default_rule_params();

int score_item_rule(const FeatureVector& features, const ItemRule& rule);
ItemScoreSheet score_all_rule(const FeatureVector& features, const RuleParams& params);

struct ThresholdPair {
    double t1 = 0.0;
    double t2 = 0.0;

    bool operator==(const ThresholdPair&) const = default;
};

/// Per-item candidate threshold lists for the grid search.
using ThresholdGrid = std::array<std::vector<ThresholdPair>, kItemCount>;

/// One labeled session ready for fitting: extracted features, ground-truth
/// item scores, and the ternary diagnosis stratum (0 = non-spectrum,
/// 1 = spectrum disorder, 2 = autism).
struct LabeledSession {
    std::string session_id;
    FeatureVector features;
    ItemScoreSheet labels;
    int stratum = 0;
};

struct CandidateResult {
    ThresholdPair thresholds;
    std::array<double, 2> fold_mae{};
    double mean_mae = 0.0;
};

struct FitReport {
    std::array<std::vector<CandidateResult>, kItemCount> candidates{};
    std::array<std::size_t, kItemCount> selected{};  // index into candidates
    std::array<std::vector<std::string>, 2> folds{};  // session ids per fold

    std::string to_json() const;
};

struct FitResult {
    RuleParams params;
    FitReport report;
};

/// Stratified two-fold CV + grid search, per item independently. The split
/// is a deterministic function of (sorted session ids, seed); ties break to
/// the first candidate in grid iteration order.
FitResult fit_params(const std::vector<LabeledSession>& corpus,
                     const RuleParams& rule_template, const ThresholdGrid& grid,
                     std::uint64_t seed);

/// Deterministic stratified two-fold assignment; returns fold index (0/1)
/// aligned with `corpus` order.
std::vector<int> stratified_two_fold(const std::vector<LabeledSession>& corpus,
                                     std::uint64_t seed);

}  // namespace ados
