#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ados/items.hpp"

namespace ados {

enum class Speaker { Doctor, Child, Other };

std::string_view speaker_name(Speaker speaker);
std::optional<Speaker> speaker_from_name(std::string_view name);

struct Utterance {
    Speaker speaker = Speaker::Other;
    std::string text;           // non-empty, trimmed, whitespace-collapsed
    std::size_t index = 0;      // 0-based ordinal within the session
    std::optional<double> t0;   // seconds, optional
    std::optional<double> t1;

    bool operator==(const Utterance&) const = default;
};

/// One assessment session: ordered speaker-labeled utterances plus metadata.
/// Immutable after construction; safe to share across workers.
struct SessionTranscript {
    std::string session_id;
    std::vector<Utterance> utterances;
    std::optional<int> age_months;
    std::optional<std::string> gender;  // "m" | "f"
    std::optional<ClinicianItemSheet> clinician_items;

    bool operator==(const SessionTranscript&) const = default;
};

/// Parses the line-delimited JSON session format: a header object on the
/// first line, one utterance object per following line.
SessionTranscript parse_transcript(const std::string& document);

/// Inverse of parse_transcript for valid transcripts.
std::string serialize_transcript(const SessionTranscript& transcript);

/// Collapses whitespace, drops empty utterances, optionally merges adjacent
/// same-speaker utterances, and recomputes indexes. Idempotent.
SessionTranscript normalize(const SessionTranscript& transcript,
                            bool merge_consecutive = false);

/// Collapses internal whitespace runs to single spaces and trims the ends.
std::string collapse_whitespace(const std::string& text);

}  // namespace ados
