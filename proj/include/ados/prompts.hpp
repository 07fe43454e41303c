#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ados/transcript.hpp"

namespace ados {

enum class CriteriaMode { Concise, Standard };
enum class ScoringMode { OnlyScoring, ScoreExplainZeroShot, ScoreExplainFewShot };

std::string_view scoring_mode_name(ScoringMode mode);

/// Hospital-level prior statistics injected into the stats prompt block.
struct PriorStats {
    std::map<std::string, double> item_means;  // keyed by item name
    double asd_proportion = 0.571;
    double td_proportion = 0.429;

    void validate() const;
    static PriorStats defaults();
};

struct FewShotExample {
    std::string dialogue;
    std::string response;
};

/// Criteria and procedure text loaded from the assets directory.
struct PromptAssets {
    std::map<ItemId, std::string> criteria;  // full per-item criteria text
    std::string procedures;                  // M3 procedure excerpt
    std::vector<FewShotExample> few_shot;

    static PromptAssets load(const std::string& assets_dir);
};

struct PromptContext {
    CriteriaMode criteria_mode = CriteriaMode::Standard;
    bool include_procedures = false;
    bool include_stats = false;
    PriorStats stats = PriorStats::defaults();
    ScoringMode mode = ScoringMode::ScoreExplainZeroShot;
    std::optional<std::vector<FewShotExample>> few_shot_examples;

    void validate() const;
};

struct PromptBundle {
    std::string system_text;
    std::string user_text;
    std::size_t token_estimate = 0;

    bool operator==(const PromptBundle&) const = default;
};

struct LlmItemResult {
    ItemId item = ItemId::A4;
    int score = 0;  // 0..3
    std::string justification;

    bool operator==(const LlmItemResult&) const = default;
};

struct ExcerptSpan {
    std::string text;
    std::size_t first_index = 0;  // utterance index range, inclusive
    std::size_t last_index = 0;
    bool verified = false;

    bool operator==(const ExcerptSpan&) const = default;
};

struct ExplanationRecord {
    ItemId item = ItemId::A4;
    int confirmed_score = 0;
    std::vector<ExcerptSpan> excerpts;
    std::string rationale;
    bool consistent_with_first_stage = true;

    std::string to_json() const;
};

std::string serialize_dialogue(const SessionTranscript& t);

PromptBundle build_scoring_prompt(const SessionTranscript& t, const PromptContext& ctx,
                                  const PromptAssets& assets);

PromptBundle build_interpretability_prompt(ItemId item, const LlmItemResult& first_stage,
                                           const SessionTranscript& t,
                                           const PromptAssets& assets);

std::vector<LlmItemResult> parse_scoring_response(const std::string& text,
                                                  ScoringMode mode);

/// Canonical one-line-per-item rendering accepted back by the parser.
std::string serialize_scoring_response(const std::vector<LlmItemResult>& results);

ExplanationRecord parse_explanation_response(const std::string& text, ItemId item,
                                             const SessionTranscript& t,
                                             int first_stage_score);

}  // namespace ados
