#include "ados/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ados {

using nlohmann::json;

std::string_view scoring_mode_name(ScoringMode mode) {
    switch (mode) {
        case ScoringMode::OnlyScoring: return "only_scoring";
        case ScoringMode::ScoreExplainZeroShot: return "score_explain_zero_shot";
        case ScoringMode::ScoreExplainFewShot: return "score_explain_few_shot";
    }
    return "?";
}

void PriorStats::validate() const {
    if (std::abs(asd_proportion + td_proportion - 1.0) > 1e-9) {
        throw Error(ErrorKind::ConfigError, "class proportions must sum to 1");
    }
    for (const auto& [name, mean] : item_means) {
        if (!item_from_name(name) || mean < 0.0) {
            throw Error(ErrorKind::ConfigError, "item mean for " + name);
        }
    }
}

PriorStats PriorStats::defaults() {
    PriorStats stats;
    // Overall mean total of 7.25 across 14 items, spread uniformly; meant to
    // be overridden with clinic-specific numbers.
    for (ItemId item : kAllItems) {
        stats.item_means[std::string(item_name(item))] = 0.52;
    }
    return stats;
}

void PromptContext::validate() const {
    const bool has_examples =
        few_shot_examples.has_value() && !few_shot_examples->empty();
    if (mode == ScoringMode::ScoreExplainFewShot && !has_examples) {
        throw Error(ErrorKind::MissingFewShot, "few-shot mode without examples");
    }
    if (mode != ScoringMode::ScoreExplainFewShot && few_shot_examples.has_value()) {
        throw Error(ErrorKind::ConfigError, "examples provided outside few-shot mode");
    }
    stats.validate();
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot read " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string item_header(ItemId item) {
    return "## " + std::string(item_name(item)) + " (score 0-3)";
}

std::string format_ratio(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.1f%%", value * 100.0);
    return buffer;
}

std::string format_mean(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.2f", value);
    return buffer;
}

std::string stats_block(const PriorStats& stats) {
    std::string out = "Prior statistics collected at the clinic:\n";
    out += "- Proportion of ASD children: " + format_ratio(stats.asd_proportion) +
           "; TD children: " + format_ratio(stats.td_proportion) + "\n";
    out += "- Mean item scores:";
    for (ItemId item : kAllItems) {
        const std::string name(item_name(item));
        auto found = stats.item_means.find(name);
        if (found == stats.item_means.end()) continue;
        out += " " + name + "=" + format_mean(found->second);
    }
    out += "\n";
    return out;
}

const char* kFormatInstruction =
    "Answer with exactly one line per item, formatted as\n"
    "<Item>: <score> — <justification>\n"
    "using the item names A4, A7, A8, B4, B7, B9, B10, B11 and integer scores 0-3.\n";

const char* kFormatInstructionScoresOnly =
    "Answer with exactly one line per item, formatted as\n"
    "<Item>: <score>\n"
    "using the item names A4, A7, A8, B4, B7, B9, B10, B11 and integer scores 0-3. "
    "Provide scores for the eight items only, with no justification.\n";

}  // namespace

PromptAssets PromptAssets::load(const std::string& assets_dir) {
    PromptAssets assets;
    for (ItemId item : kAllItems) {
        assets.criteria[item] =
            read_file(assets_dir + "/criteria/" + std::string(item_name(item)) + ".txt");
    }
    assets.procedures = read_file(assets_dir + "/procedures_m3.txt");

    const std::string few_shot_path = assets_dir + "/few_shot.json";
    std::ifstream probe(few_shot_path);
    if (probe) {
        json doc = json::parse(read_file(few_shot_path));
        for (const auto& entry : doc) {
            assets.few_shot.push_back({entry.at("dialogue").get<std::string>(),
                                       entry.at("response").get<std::string>()});
        }
    }
    return assets;
}

std::string serialize_dialogue(const SessionTranscript& t) {
    std::string out;
    for (const auto& utt : t.utterances) {
        switch (utt.speaker) {
            case Speaker::Doctor: out += "Doctor: "; break;
            case Speaker::Child: out += "Child: "; break;
            case Speaker::Other: out += "Other: "; break;
        }
        out += utt.text;
        out += '\n';
    }
    return out;
}

PromptBundle build_scoring_prompt(const SessionTranscript& t, const PromptContext& ctx,
                                  const PromptAssets& assets) {
    ctx.validate();

    PromptBundle bundle;
    std::string& sys = bundle.system_text;
    sys = "You are an experienced clinician scoring an ADOS-2 Module 3 "
          "assessment transcript on the eight language-related items.\n\n"
          "# ADOS Scoring Criteria\n";
    for (ItemId item : kAllItems) {
        sys += item_header(item);
        sys += '\n';
        if (ctx.criteria_mode == CriteriaMode::Standard) {
            sys += assets.criteria.at(item);
            if (sys.back() != '\n') sys += '\n';
        }
    }
    if (ctx.include_procedures) {
        sys += "\n# ADOS-2 Module 3 Procedures\n";
        sys += assets.procedures;
        if (sys.back() != '\n') sys += '\n';
    }
    if (ctx.include_stats) {
        sys += "\n# Prior Statistics\n";
        sys += stats_block(ctx.stats);
    }

    std::string& user = bundle.user_text;
    switch (ctx.mode) {
        case ScoringMode::OnlyScoring:
            user = "Score the following dialogue on all eight items.\n";
            user += kFormatInstructionScoresOnly;
            break;
        case ScoringMode::ScoreExplainZeroShot:
            user = "Score the following dialogue on all eight items and justify "
                   "each score with evidence from the dialogue.\n";
            user += kFormatInstruction;
            break;
        case ScoringMode::ScoreExplainFewShot:
            user = "Score the following dialogue on all eight items and justify "
                   "each score with evidence from the dialogue. Worked examples "
                   "follow.\n";
            user += kFormatInstruction;
            for (std::size_t i = 0; i < ctx.few_shot_examples->size(); ++i) {
                const auto& example = (*ctx.few_shot_examples)[i];
                user += "\n# Example " + std::to_string(i + 1) + "\n";
                user += example.dialogue;
                if (user.back() != '\n') user += '\n';
                user += "Expected answer:\n";
                user += example.response;
                if (user.back() != '\n') user += '\n';
            }
            break;
    }
    user += "\n# Dialogue\n";
    user += serialize_dialogue(t);

    bundle.token_estimate = (sys.size() + user.size()) / 4;
    return bundle;
}

PromptBundle build_interpretability_prompt(ItemId item, const LlmItemResult& first_stage,
                                           const SessionTranscript& t,
                                           const PromptAssets& assets) {
    if (first_stage.item != item) {
        throw Error(ErrorKind::MissingItem,
                    "first-stage result is for " +
                        std::string(item_name(first_stage.item)) + ", expected " +
                        std::string(item_name(item)));
    }

    PromptBundle bundle;
    bundle.system_text =
        "You verify ADOS-2 item scores by pointing at the exact dialogue "
        "evidence that supports them.\n";

    std::string& user = bundle.user_text;
    user = "# Criteria for " + std::string(item_name(item)) + "\n";
    user += item_header(item);
    user += '\n';
    user += assets.criteria.at(item);
    if (user.back() != '\n') user += '\n';
    user += "\n# First-stage result\n";
    user += "score: " + std::to_string(first_stage.score) + "\n";
    if (!first_stage.justification.empty()) {
        user += "justification: " + first_stage.justification + "\n";
    }
    user += "\n# Dialogue\n";
    user += serialize_dialogue(t);
    user += "\nConfirm or revise the score, quote the most relevant dialogue "
            "excerpts verbatim, and explain the reasoning. Answer as:\n"
            "score: <0-3>\n"
            "excerpt: \"<verbatim dialogue text>\"   (one line per excerpt)\n"
            "rationale: <reasoning>\n";

    bundle.token_estimate = (bundle.system_text.size() + user.size()) / 4;
    return bundle;
}

namespace {

// Matches "<Item>: <int> [separator justification]" with tolerance for list
// bullets and full-width colons; returns false for plain prose.
bool parse_item_line(const std::string& line, ItemId* item, long* score,
                     std::string* justification) {
    std::size_t pos = 0;
    auto skip_spaces = [&] {
        while (pos < line.size() &&
               std::isspace(static_cast<unsigned char>(line[pos]))) {
            ++pos;
        }
    };
    skip_spaces();
    while (pos < line.size() && (line[pos] == '-' || line[pos] == '*' ||
                                 line[pos] == '#' || line[pos] == '>')) {
        ++pos;
        skip_spaces();
    }

    std::string name;
    while (pos < line.size() &&
           std::isalnum(static_cast<unsigned char>(line[pos]))) {
        name.push_back(line[pos]);
        ++pos;
    }
    auto found = item_from_name(name);
    if (!found) return false;
    skip_spaces();
    if (pos >= line.size()) return false;
    bool separated = false;
    for (const char* separator : {":", "：", "—", "–", "-", "|"}) {
        const std::size_t len = std::char_traits<char>::length(separator);
        if (line.compare(pos, len, separator) == 0) {
            pos += len;
            separated = true;
            break;
        }
    }
    if (!separated) return false;
    skip_spaces();
    if (pos >= line.size() || !std::isdigit(static_cast<unsigned char>(line[pos]))) {
        return false;
    }
    std::size_t digits = 0;
    *score = std::stol(line.substr(pos), &digits);
    pos += digits;
    skip_spaces();
    // Optional separator before the justification.
    for (const char* separator : {"—", "–", "-", ":", "|"}) {
        const std::size_t len = std::char_traits<char>::length(separator);
        if (line.compare(pos, len, separator) == 0) {
            pos += len;
            break;
        }
    }
    skip_spaces();
    *item = *found;
    *justification = line.substr(pos);
    while (!justification->empty() &&
           std::isspace(static_cast<unsigned char>(justification->back()))) {
        justification->pop_back();
    }
    return true;
}

std::vector<LlmItemResult> collect_results(
    const std::array<std::optional<LlmItemResult>, kItemCount>& slots) {
    std::vector<LlmItemResult> out;
    for (ItemId item : kAllItems) {
        const auto& slot = slots[item_index(item)];
        if (!slot) {
            throw Error(ErrorKind::MissingItem, std::string(item_name(item)));
        }
        out.push_back(*slot);
    }
    return out;
}

std::optional<std::vector<LlmItemResult>> try_parse_json_response(
    const std::string& text, ScoringMode mode) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return std::nullopt;

    std::array<std::optional<LlmItemResult>, kItemCount> slots;
    for (const auto& [key, value] : doc.items()) {
        auto item = item_from_name(key);
        if (!item) continue;
        LlmItemResult result;
        result.item = *item;
        long score = -1;
        if (value.is_number_integer()) {
            score = value.get<long>();
        } else if (value.is_object() && value.contains("score")) {
            score = value.at("score").get<long>();
            if (value.contains("justification")) {
                result.justification = value.at("justification").get<std::string>();
            }
        } else {
            throw Error(ErrorKind::Unparseable, "item " + key);
        }
        if (score < 0 || score > 3) {
            throw Error(ErrorKind::ScoreOutOfRange,
                        key + " = " + std::to_string(score));
        }
        result.score = static_cast<int>(score);
        if (mode == ScoringMode::OnlyScoring) result.justification.clear();
        auto& slot = slots[item_index(*item)];
        if (slot) {
            throw Error(ErrorKind::DuplicateItem, key);
        }
        slot = result;
    }
    if (std::none_of(slots.begin(), slots.end(),
                     [](const auto& slot) { return slot.has_value(); })) {
        return std::nullopt;
    }
    return collect_results(slots);
}

}  // namespace

std::vector<LlmItemResult> parse_scoring_response(const std::string& text,
                                                  ScoringMode mode) {
    if (auto from_json = try_parse_json_response(text, mode)) {
        return *from_json;
    }

    std::array<std::optional<LlmItemResult>, kItemCount> slots;
    std::istringstream in(text);
    std::string line;
    bool matched_any = false;
    while (std::getline(in, line)) {
        ItemId item;
        long score;
        std::string justification;
        if (!parse_item_line(line, &item, &score, &justification)) continue;
        matched_any = true;
        if (score < 0 || score > 3) {
            throw Error(ErrorKind::ScoreOutOfRange,
                        std::string(item_name(item)) + " = " + std::to_string(score));
        }
        auto& slot = slots[item_index(item)];
        if (slot) {
            throw Error(ErrorKind::DuplicateItem, std::string(item_name(item)));
        }
        LlmItemResult result;
        result.item = item;
        result.score = static_cast<int>(score);
        result.justification =
            mode == ScoringMode::OnlyScoring ? std::string() : justification;
        slot = result;
    }
    if (!matched_any) {
        throw Error(ErrorKind::Unparseable, "no item lines found");
    }
    return collect_results(slots);
}

std::string serialize_scoring_response(const std::vector<LlmItemResult>& results) {
    std::string out;
    for (const auto& result : results) {
        out += std::string(item_name(result.item)) + ": " +
               std::to_string(result.score);
        if (!result.justification.empty()) {
            out += " — " + result.justification;
        }
        out += '\n';
    }
    return out;
}

namespace {

std::string normalize_for_match(const std::string& text) {
    std::string out;
    bool in_space = true;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out.push_back(' ');
            out.push_back(static_cast<char>(std::tolower(c)));
            in_space = false;
        }
    }
    return out;
}

// Strips a leading "Doctor:" / "Child:" / "Other:" label a model may have
// copied along with the quote.
std::string strip_speaker_label(const std::string& text) {
    for (const char* label : {"doctor:", "child:", "other:"}) {
        const std::size_t len = std::char_traits<char>::length(label);
        if (text.size() > len && text.compare(0, len, label) == 0) {
            std::size_t pos = len;
            while (pos < text.size() && text[pos] == ' ') ++pos;
            return text.substr(pos);
        }
    }
    return text;
}

ExcerptSpan match_excerpt(const std::string& quote, const SessionTranscript& t) {
    ExcerptSpan span;
    span.text = quote;
    const std::string needle = strip_speaker_label(normalize_for_match(quote));
    if (needle.empty()) return span;

    // Try windows of 1..3 consecutive utterances.
    for (std::size_t width = 1; width <= 3 && width <= t.utterances.size(); ++width) {
        for (std::size_t start = 0; start + width <= t.utterances.size(); ++start) {
            std::string window;
            for (std::size_t k = 0; k < width; ++k) {
                if (k > 0) window += ' ';
                window += normalize_for_match(t.utterances[start + k].text);
            }
            if (window.find(needle) != std::string::npos) {
                span.first_index = start;
                span.last_index = start + width - 1;
                span.verified = true;
                return span;
            }
        }
    }
    return span;
}

}  // namespace

ExplanationRecord parse_explanation_response(const std::string& text, ItemId item,
                                             const SessionTranscript& t,
                                             int first_stage_score) {
    ExplanationRecord record;
    record.item = item;

    std::istringstream in(text);
    std::string line;
    bool saw_score = false;
    bool in_rationale = false;
    while (std::getline(in, line)) {
        std::string lower = line;
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) {
            return static_cast<char>(std::tolower(c));
        });
        if (!saw_score && lower.rfind("score:", 0) == 0) {
            const std::string value = line.substr(6);
            std::size_t digits = 0;
            long score = 0;
            try {
                score = std::stol(value, &digits);
            } catch (const std::exception&) {
                throw Error(ErrorKind::Unparseable, "score line: " + line);
            }
            if (score < 0 || score > 3) {
                throw Error(ErrorKind::ScoreOutOfRange, std::to_string(score));
            }
            record.confirmed_score = static_cast<int>(score);
            saw_score = true;
            in_rationale = false;
        } else if (lower.rfind("excerpt:", 0) == 0) {
            std::string quote = line.substr(8);
            // Trim spaces and surrounding quote characters.
            auto first = quote.find_first_not_of(" \t\"“”");
            auto last = quote.find_last_not_of(" \t\"“”");
            if (first == std::string::npos) continue;
            quote = quote.substr(first, last - first + 1);
            record.excerpts.push_back(match_excerpt(quote, t));
            in_rationale = false;
        } else if (lower.rfind("rationale:", 0) == 0) {
            record.rationale = line.substr(10);
            auto first = record.rationale.find_first_not_of(" \t");
            if (first != std::string::npos) {
                record.rationale = record.rationale.substr(first);
            }
            in_rationale = true;
        } else if (in_rationale && !line.empty()) {
            record.rationale += '\n';
            record.rationale += line;
        }
    }
    if (!saw_score) {
        throw Error(ErrorKind::Unparseable, "no score line in explanation response");
    }
    record.consistent_with_first_stage = record.confirmed_score == first_stage_score;
    return record;
}

std::string ExplanationRecord::to_json() const {
    json doc;
    doc["item"] = std::string(item_name(item));
    doc["confirmed_score"] = confirmed_score;
    doc["consistent_with_first_stage"] = consistent_with_first_stage;
    doc["rationale"] = rationale;
    json excerpt_list = json::array();
    for (const auto& span : excerpts) {
        excerpt_list.push_back({{"text", span.text},
                                {"first_index", span.first_index},
                                {"last_index", span.last_index},
                                {"verified", span.verified}});
    }
    doc["excerpts"] = excerpt_list;
    return doc.dump(2) + "\n";
}

}  // namespace ados
