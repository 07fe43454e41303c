#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ados/assessment.hpp"
#include "ados/features.hpp"
#include "ados/fusion.hpp"
#include "ados/gateway.hpp"
#include "ados/prompts.hpp"
#include "ados/rules.hpp"
#include "ados/synth.hpp"

namespace ados {

/// One JSON configuration document drives every stage; string values may
/// reference environment variables as ${VAR}.
struct PipelineConfig {
    std::string corpus_dir;
    std::string assets_dir;
    std::string lexicon_path;
    std::string run_dir;

    double echolalia_threshold = 0.8;
    std::size_t negation_window = 3;
    bool participation_by_tokens = false;

    std::optional<ThresholdGrid> grid;
    std::optional<std::string> fitted_params_path;

    CriteriaMode criteria_mode = CriteriaMode::Standard;
    bool include_procedures = true;
    bool include_stats = true;
    ScoringMode scoring_mode = ScoringMode::ScoreExplainZeroShot;
    std::optional<PriorStats> stats_override;

    ModelEndpoint endpoint;
    FusionStrategy strategy = FusionStrategy::V4_SoftmaxNegMae;
    std::uint64_t seed = 0;
    int jobs = 1;

    std::string config_digest;  // hash of the raw config bytes

    static PipelineConfig load(const std::string& path);
    static PipelineConfig from_json_text(const std::string& text);

    FeatureConfig feature_config() const;  // loads the lexicon
    PromptContext prompt_context(const PromptAssets& assets) const;
};

struct RunManifest {
    std::string run_id;
    std::string config_digest;
    std::uint64_t seed = 0;
    std::map<std::string, bool> stages;             // stage name -> completed
    std::map<std::string, std::string> artifacts;   // artifact name -> path

    static RunManifest load_or_create(const PipelineConfig& config);
    void save(const std::string& run_dir) const;
};

/// One parsed, normalized corpus: sessions sorted by session_id plus labels
/// when labels.json is present.
struct Corpus {
    std::vector<SessionTranscript> sessions;
    LabelMap labels;  // only sessions listed in labels.json
    std::map<std::string, TernaryClass> diagnosis;

    const SessionTranscript* find(const std::string& session_id) const;
};

Corpus load_corpus(const std::string& directory);

void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// Pipeline stages. Each writes its artifacts under run_dir, records them in
// the manifest, and is a no-op when already complete unless force is set.
void cmd_synth(const GeneratorProfile& profile, const std::string& out_dir);
void cmd_fit(const PipelineConfig& config, bool force = false);
void cmd_score_rule(const PipelineConfig& config, bool force = false);
void cmd_score_llm(const PipelineConfig& config, bool replay, bool force = false);
void cmd_fuse(const PipelineConfig& config, bool force = false);
std::string cmd_evaluate(const PipelineConfig& config, bool force = false);
ExplanationRecord cmd_explain(const PipelineConfig& config,
                              const std::string& session_id, ItemId item,
                              bool replay);

}  // namespace ados
