#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ados/assessment.hpp"
#include "ados/transcript.hpp"

namespace ados {

struct ClassKnobs {
    double echo_prob = 0.0;
    double answer_prob = 1.0;
    double positive_prob = 0.5;
    double suggestion_prob = 0.2;
};

/// Drives the synthetic corpus: class mix mirrors a 28-session clinic sample
/// (12 TD / 4 spectrum / 12 autism) by default.
struct GeneratorProfile {
    std::size_t n_sessions = 28;
    std::array<std::size_t, 3> class_mix = {12, 4, 12};  // td, asd, autism
    std::array<ClassKnobs, 3> knobs = {
        ClassKnobs{0.05, 0.9, 0.6, 0.4},    // typically developing
        ClassKnobs{0.35, 0.65, 0.4, 0.2},   // spectrum disorder
        ClassKnobs{0.7, 0.3, 0.15, 0.05},   // autism
    };
    std::size_t min_turns = 24;
    std::size_t max_turns = 40;
    std::uint64_t seed = 0;
    bool emit_error_fixtures = false;

    void validate() const;
};

struct GeneratedSession {
    SessionTranscript transcript;
    ItemScoreSheet labels;  // ground truth for the 8 language items
    TernaryClass diagnosis = TernaryClass::NonSpectrum;
    /// Canned model responses keyed by fixture name (e.g. the scoring modes
    /// and explain_<item>), for replay-mode testing.
    std::map<std::string, std::string> fixtures;
};

struct GeneratedCorpus {
    std::vector<GeneratedSession> sessions;
};

/// Deterministic per seed; labels follow fixed ladders on the class knobs so
/// they are consistent with the generated behavior by construction.
GeneratedCorpus generate(const GeneratorProfile& profile);

/// Ground-truth item scores implied by a knob set.
ItemScoreSheet labels_from_knobs(const ClassKnobs& knobs);

/// Writes <sid>.jsonl session files, labels.json, and fixtures/<sid>/<name>.txt.
void write_corpus(const GeneratedCorpus& corpus, const std::string& directory);

}  // namespace ados
