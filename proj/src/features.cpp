#include "ados/features.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace ados {

std::vector<char32_t> utf8_code_points(const std::string& text) {
    std::vector<char32_t> out;
    out.reserve(text.size());
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        char32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (c < 0x80) {
            cp = c;
        } else if ((c & 0xE0) == 0xC0 && i + 1 < n) {
            cp = static_cast<char32_t>(c & 0x1F) << 6 |
                 (static_cast<unsigned char>(text[i + 1]) & 0x3F);
            len = 2;
        } else if ((c & 0xF0) == 0xE0 && i + 2 < n) {
            cp = static_cast<char32_t>(c & 0x0F) << 12 |
                 (static_cast<char32_t>(static_cast<unsigned char>(text[i + 1]) & 0x3F) << 6) |
                 (static_cast<unsigned char>(text[i + 2]) & 0x3F);
            len = 3;
        } else if ((c & 0xF8) == 0xF0 && i + 3 < n) {
            cp = static_cast<char32_t>(c & 0x07) << 18 |
                 (static_cast<char32_t>(static_cast<unsigned char>(text[i + 1]) & 0x3F) << 12) |
                 (static_cast<char32_t>(static_cast<unsigned char>(text[i + 2]) & 0x3F) << 6) |
                 (static_cast<unsigned char>(text[i + 3]) & 0x3F);
            len = 4;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::size_t levenshtein_distance(const std::vector<char32_t>& a,
                                 const std::vector<char32_t>& b) {
    const auto& shorter = a.size() <= b.size() ? a : b;
    const auto& longer = a.size() <= b.size() ? b : a;
    std::vector<std::size_t> row(shorter.size() + 1);
    for (std::size_t i = 0; i <= shorter.size(); ++i) row[i] = i;
    for (std::size_t j = 1; j <= longer.size(); ++j) {
        std::size_t diag = row[0];
        row[0] = j;
        for (std::size_t i = 1; i <= shorter.size(); ++i) {
            std::size_t saved = row[i];
            if (shorter[i - 1] == longer[j - 1]) {
                row[i] = diag;
            } else {
                row[i] = std::min({row[i - 1], row[i], diag}) + 1;
            }
            diag = saved;
        }
    }
    return row[shorter.size()];
}

double normalized_edit_similarity(const std::string& a, const std::string& b) {
    auto ca = utf8_code_points(a);
    auto cb = utf8_code_points(b);
    const std::size_t longest = std::max(ca.size(), cb.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein_distance(ca, cb)) /
                     static_cast<double>(longest);
}

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '\'' || c >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::size_t count_tokens(const std::string& text) { return tokenize(text).size(); }

bool contains_ci(const std::string& haystack_lower, const std::string& needle) {
    return haystack_lower.find(to_lower(needle)) != std::string::npos;
}

}  // namespace

LexiconSentiment::LexiconSentiment(std::vector<std::pair<std::string, int>> entries,
                                   std::vector<std::string> negation_markers,
                                   std::size_t negation_window)
    : entries_(std::move(entries)),
      negation_markers_(std::move(negation_markers)),
      negation_window_(negation_window) {
    for (auto& [term, polarity] : entries_) term = to_lower(term);
    for (auto& marker : negation_markers_) marker = to_lower(marker);
}

LexiconSentiment LexiconSentiment::load(const std::string& path,
                                        std::vector<std::string> negation_markers,
                                        std::size_t negation_window) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::LexiconLoadError, path);
    }
    std::vector<std::pair<std::string, int>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw Error(ErrorKind::LexiconLoadError,
                        path + ":" + std::to_string(line_no));
        }
        std::string term = line.substr(0, tab);
        std::string value = line.substr(tab + 1);
        if (!value.empty() && value.back() == '\r') value.pop_back();
        int polarity;
        if (value == "+1" || value == "1") {
            polarity = 1;
        } else if (value == "-1") {
            polarity = -1;
        } else {
            throw Error(ErrorKind::LexiconLoadError,
                        path + ":" + std::to_string(line_no) + " polarity \"" + value + "\"");
        }
        if (term.empty()) {
            throw Error(ErrorKind::LexiconLoadError,
                        path + ":" + std::to_string(line_no) + " empty term");
        }
        entries.emplace_back(std::move(term), polarity);
    }
    return LexiconSentiment(std::move(entries), std::move(negation_markers),
                            negation_window);
}

Polarity LexiconSentiment::classify(const std::string& text) const {
    auto tokens = tokenize(text);
    int sum = 0;
    std::size_t flip_remaining = 0;
    for (const auto& token : tokens) {
        bool is_negation =
            std::find(negation_markers_.begin(), negation_markers_.end(), token) !=
            negation_markers_.end();
        if (is_negation) {
            flip_remaining = negation_window_;
            continue;
        }
        for (const auto& [term, polarity] : entries_) {
            if (token == term) {
                sum += flip_remaining > 0 ? -polarity : polarity;
                break;
            }
        }
        if (flip_remaining > 0) --flip_remaining;
    }
    if (sum > 0) return Polarity::Positive;
    if (sum < 0) return Polarity::Negative;
    return Polarity::Neutral;
}

void FeatureConfig::validate() const {
    if (!(echolalia_similarity_threshold > 0.0 && echolalia_similarity_threshold <= 1.0)) {
        throw Error(ErrorKind::ConfigError, "echolalia threshold must be in (0,1]");
    }
    if (question_markers.empty() || suggestion_patterns.empty()) {
        throw Error(ErrorKind::ConfigError, "pattern lists must be non-empty");
    }
}

const std::vector<std::string>& FeatureVector::names() {
    static const std::vector<std::string> kNames = {
        "echolalia_rate",     "alternation_rate", "participation_rate",
        "enjoyment_rate",     "passive_rate",     "suggestion_rate",
        "response_rate",
    };
    return kNames;
}

double FeatureVector::by_name(std::string_view name) const {
    if (name == "echolalia_rate") return echolalia_rate;
    if (name == "alternation_rate") return alternation_rate;
    if (name == "participation_rate") return participation_rate;
    if (name == "enjoyment_rate") return enjoyment_rate;
    if (name == "passive_rate") return passive_rate;
    if (name == "suggestion_rate") return suggestion_rate;
    if (name == "response_rate") return response_rate;
    throw Error(ErrorKind::UnknownFeatureName, std::string(name));
}

namespace {

std::size_t require_child_speech(const SessionTranscript& t) {
    std::size_t count = 0;
    for (const auto& utt : t.utterances) {
        if (utt.speaker == Speaker::Child) ++count;
    }
    if (count == 0) {
        throw Error(ErrorKind::NoChildSpeech, t.session_id);
    }
    return count;
}

}  // namespace

double echolalia_rate(const SessionTranscript& t, const FeatureConfig& cfg) {
    const std::size_t child_count = require_child_speech(t);
    const std::string* last_doctor = nullptr;
    std::size_t echoes = 0;
    for (const auto& utt : t.utterances) {
        if (utt.speaker == Speaker::Doctor) {
            last_doctor = &utt.text;
        } else if (utt.speaker == Speaker::Child) {
            if (last_doctor &&
                normalized_edit_similarity(utt.text, *last_doctor) >=
                    cfg.echolalia_similarity_threshold) {
                ++echoes;
            }
        }
    }
    return static_cast<double>(echoes) / static_cast<double>(child_count);
}

double alternation_rate(const SessionTranscript& t) {
    const std::size_t n = t.utterances.size();
    if (n < 2) return 0.0;
    std::size_t switches = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (t.utterances[i].speaker != t.utterances[i - 1].speaker) ++switches;
    }
    return static_cast<double>(switches) / static_cast<double>(n - 1);
}

double participation_rate(const SessionTranscript& t, bool by_tokens) {
    std::size_t child = 0, total = 0;
    for (const auto& utt : t.utterances) {
        const std::size_t unit = by_tokens ? count_tokens(utt.text) : 1;
        total += unit;
        if (utt.speaker == Speaker::Child) child += unit;
    }
    if (total == 0) return 0.0;
    return static_cast<double>(child) / static_cast<double>(total);
}

std::pair<double, double> sentiment_rates(const SessionTranscript& t,
                                          const FeatureConfig& cfg) {
    const std::size_t child_count = require_child_speech(t);
    if (!cfg.sentiment) {
        throw Error(ErrorKind::LexiconLoadError, "no sentiment analyzer configured");
    }
    std::size_t positive = 0, negative = 0;
    for (const auto& utt : t.utterances) {
        if (utt.speaker != Speaker::Child) continue;
        switch (cfg.sentiment->classify(utt.text)) {
            case Polarity::Positive: ++positive; break;
            case Polarity::Negative: ++negative; break;
            case Polarity::Neutral: break;
        }
    }
    const double denom = static_cast<double>(child_count);
    return {static_cast<double>(positive) / denom,
            static_cast<double>(negative) / denom};
}

double suggestion_rate(const SessionTranscript& t, const FeatureConfig& cfg) {
    const std::size_t child_count = require_child_speech(t);
    std::size_t hits = 0;
    for (const auto& utt : t.utterances) {
        if (utt.speaker != Speaker::Child) continue;
        const std::string lower = to_lower(utt.text);
        for (const auto& pattern : cfg.suggestion_patterns) {
            if (contains_ci(lower, pattern)) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(child_count);
}

namespace {

bool is_doctor_question(const Utterance& utt, const FeatureConfig& cfg) {
    for (const auto& marker : cfg.question_markers) {
        if (utt.text.size() >= marker.size() &&
            utt.text.compare(utt.text.size() - marker.size(), marker.size(), marker) == 0) {
            return true;
        }
    }
    auto tokens = tokenize(utt.text);
    if (!tokens.empty()) {
        for (const auto& interrogative : cfg.interrogative_tokens) {
            if (tokens.front() == to_lower(interrogative)) return true;
        }
    }
    return false;
}

}  // namespace

double response_rate(const SessionTranscript& t, const FeatureConfig& cfg,
                     FeatureDiagnostics* diag) {
    std::size_t questions = 0, answered = 0;
    for (std::size_t i = 0; i < t.utterances.size(); ++i) {
        const auto& utt = t.utterances[i];
        if (utt.speaker != Speaker::Doctor || !is_doctor_question(utt, cfg)) continue;
        ++questions;
        if (i + 1 < t.utterances.size() &&
            t.utterances[i + 1].speaker == Speaker::Child) {
            ++answered;
        }
    }
    if (questions == 0) {
        if (diag) diag->no_doctor_questions = true;
        return 0.0;
    }
    return static_cast<double>(answered) / static_cast<double>(questions);
}

FeatureVector extract_features(const SessionTranscript& t, const FeatureConfig& cfg,
                               FeatureDiagnostics* diag) {
    cfg.validate();
    require_child_speech(t);
    FeatureVector v;
    v.echolalia_rate = echolalia_rate(t, cfg);
    v.alternation_rate = alternation_rate(t);
    v.participation_rate = participation_rate(t, cfg.participation_by_tokens);
    std::tie(v.enjoyment_rate, v.passive_rate) = sentiment_rates(t, cfg);
    v.suggestion_rate = suggestion_rate(t, cfg);
    v.response_rate = response_rate(t, cfg, diag);
    return v;
}

}  // namespace ados
