#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ados/transcript.hpp"

namespace ados {

/// Decodes UTF-8 into code points; invalid bytes decode as U+FFFD.
std::vector<char32_t> utf8_code_points(const std::string& text);

/// 1 - levenshtein(a, b) / max(|a|, |b|) over code points; 1 when both empty.
double normalized_edit_similarity(const std::string& a, const std::string& b);

std::size_t levenshtein_distance(const std::vector<char32_t>& a,
                                 const std::vector<char32_t>& b);

enum class Polarity { Positive, Negative, Neutral };

/// Pluggable utterance-level sentiment classifier.
class SentimentAnalyzer {
public:
    virtual ~SentimentAnalyzer() = default;
    virtual Polarity classify(const std::string& text) const = 0;
};

/// Lexicon analyzer: token polarity sum with negation flipping. A negation
/// marker flips the polarity of lexicon terms in the next `negation_window`
/// tokens.
class LexiconSentiment final : public SentimentAnalyzer {
public:
    /// Lexicon file: one "term<TAB>+1|-1" entry per line, '#' comments.
    static LexiconSentiment load(const std::string& path,
                                 std::vector<std::string> negation_markers,
                                 std::size_t negation_window);

    LexiconSentiment(std::vector<std::pair<std::string, int>> entries,
                     std::vector<std::string> negation_markers,
                     std::size_t negation_window);

    Polarity classify(const std::string& text) const override;

private:
    std::vector<std::pair<std::string, int>> entries_;  // lowercase term -> +-1
    std::vector<std::string> negation_markers_;
    std::size_t negation_window_;
};

struct FeatureConfig {
    double echolalia_similarity_threshold = 0.8;  // in (0, 1]
    std::shared_ptr<const SentimentAnalyzer> sentiment;
    std::size_t negation_window = 3;
    std::vector<std::string> question_markers = {"?"};
    std::vector<std::string> interrogative_tokens = {
        "what", "why", "how", "when", "where", "who", "which",
        "do", "does", "did", "can", "could", "would", "is", "are",
    };
    std::vector<std::string> suggestion_patterns = {
        "let's", "lets ", "we could", "we should", "how about",
        "do you want to", "shall we", "you can try",
    };
    bool participation_by_tokens = false;

    void validate() const;
};

/// The seven conversational rates; every field lies in [0, 1].
struct FeatureVector {
    double echolalia_rate = 0.0;
    double alternation_rate = 0.0;
    double participation_rate = 0.0;
    double enjoyment_rate = 0.0;
    double passive_rate = 0.0;
    double suggestion_rate = 0.0;
    double response_rate = 0.0;

    double by_name(std::string_view name) const;  // throws UnknownFeatureName
    static const std::vector<std::string>& names();

    bool operator==(const FeatureVector&) const = default;
};

struct FeatureDiagnostics {
    bool no_doctor_questions = false;
};

double echolalia_rate(const SessionTranscript& t, const FeatureConfig& cfg);
double alternation_rate(const SessionTranscript& t);
double participation_rate(const SessionTranscript& t, bool by_tokens = false);
std::pair<double, double> sentiment_rates(const SessionTranscript& t,
                                          const FeatureConfig& cfg);
double suggestion_rate(const SessionTranscript& t, const FeatureConfig& cfg);
double response_rate(const SessionTranscript& t, const FeatureConfig& cfg,
                     FeatureDiagnostics* diag = nullptr);

FeatureVector extract_features(const SessionTranscript& t, const FeatureConfig& cfg,
                               FeatureDiagnostics* diag = nullptr);

}  // namespace ados
