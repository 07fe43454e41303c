#include "ados/transcript.hpp"

#include <cctype>
#include <sstream>

#include <json.hpp>

namespace ados {

using nlohmann::json;

std::string_view speaker_name(Speaker speaker) {
    switch (speaker) {
        case Speaker::Doctor: return "doctor";
        case Speaker::Child: return "child";
        case Speaker::Other: return "other";
    }
    return "?";
}

std::optional<Speaker> speaker_from_name(std::string_view name) {
    if (name == "doctor") return Speaker::Doctor;
    if (name == "child") return Speaker::Child;
    if (name == "other") return Speaker::Other;
    return std::nullopt;
}

std::string collapse_whitespace(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_space = true;  // leading spaces dropped
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out.push_back(' ');
            out.push_back(static_cast<char>(c));
            in_space = false;
        }
    }
    return out;
}

namespace {

json parse_json_line(const std::string& line, std::size_t line_no) {
    json value = json::parse(line, nullptr, false);
    if (value.is_discarded() || !value.is_object()) {
        throw Error(ErrorKind::MalformedLine, "line " + std::to_string(line_no));
    }
    return value;
}

ClinicianItemSheet parse_clinician_items(const json& obj, std::size_t line_no) {
    ClinicianItemSheet sheet;
    for (const auto& [label, value] : obj.items()) {
        if (!value.is_number_integer()) {
            throw Error(ErrorKind::MalformedLine,
                        "line " + std::to_string(line_no) + ": clinician item " + label);
        }
        sheet.scores[label] = value.get<int>();
    }
    sheet.validate();
    return sheet;
}

}  // namespace

SessionTranscript parse_transcript(const std::string& document) {
    SessionTranscript transcript;
    std::istringstream in(document);
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (collapse_whitespace(line).empty()) continue;

        json obj = parse_json_line(line, line_no);

        if (obj.contains("session_id")) {
            if (saw_header) {
                throw Error(ErrorKind::DuplicateHeader, "line " + std::to_string(line_no));
            }
            saw_header = true;
            if (!obj["session_id"].is_string()) {
                throw Error(ErrorKind::MalformedLine, "line " + std::to_string(line_no));
            }
            transcript.session_id = obj["session_id"].get<std::string>();
            if (obj.contains("age_months")) {
                int age = obj["age_months"].get<int>();
                if (age <= 0) {
                    throw Error(ErrorKind::MalformedLine,
                                "line " + std::to_string(line_no) + ": age_months");
                }
                transcript.age_months = age;
            }
            if (obj.contains("gender")) {
                std::string g = obj["gender"].get<std::string>();
                if (g != "m" && g != "f") {
                    throw Error(ErrorKind::MalformedLine,
                                "line " + std::to_string(line_no) + ": gender");
                }
                transcript.gender = g;
            }
            if (obj.contains("clinician_items")) {
                transcript.clinician_items =
                    parse_clinician_items(obj["clinician_items"], line_no);
            }
            continue;
        }

        if (!saw_header) {
            throw Error(ErrorKind::MalformedLine,
                        "line " + std::to_string(line_no) + ": utterance before header");
        }
        if (!obj.contains("speaker") || !obj.contains("text") ||
            !obj["speaker"].is_string() || !obj["text"].is_string()) {
            throw Error(ErrorKind::MalformedLine, "line " + std::to_string(line_no));
        }

        Utterance utt;
        std::string label = obj["speaker"].get<std::string>();
        auto speaker = speaker_from_name(label);
        if (!speaker) {
            throw Error(ErrorKind::UnknownSpeaker,
                        "\"" + label + "\" at line " + std::to_string(line_no));
        }
        utt.speaker = *speaker;
        utt.text = collapse_whitespace(obj["text"].get<std::string>());
        if (utt.text.empty()) {
            throw Error(ErrorKind::MalformedLine,
                        "line " + std::to_string(line_no) + ": empty text");
        }
        if (obj.contains("t0")) utt.t0 = obj["t0"].get<double>();
        if (obj.contains("t1")) utt.t1 = obj["t1"].get<double>();
        if ((utt.t0 && *utt.t0 < 0) || (utt.t1 && *utt.t1 < 0) ||
            (utt.t0 && utt.t1 && *utt.t0 > *utt.t1)) {
            throw Error(ErrorKind::MalformedLine,
                        "line " + std::to_string(line_no) + ": bad timestamps");
        }
        utt.index = transcript.utterances.size();
        transcript.utterances.push_back(std::move(utt));
    }

    if (!saw_header) {
        throw Error(ErrorKind::MalformedLine, "missing header line");
    }
    if (transcript.utterances.empty()) {
        throw Error(ErrorKind::EmptySession, transcript.session_id);
    }
    return transcript;
}

std::string serialize_transcript(const SessionTranscript& transcript) {
    std::string out;
    json header;
    header["session_id"] = transcript.session_id;
    if (transcript.age_months) header["age_months"] = *transcript.age_months;
    if (transcript.gender) header["gender"] = *transcript.gender;
    if (transcript.clinician_items) {
        header["clinician_items"] = transcript.clinician_items->scores;
    }
    out += header.dump();
    out += '\n';
    for (const auto& utt : transcript.utterances) {
        json line;
        line["speaker"] = std::string(speaker_name(utt.speaker));
        line["text"] = utt.text;
        if (utt.t0) line["t0"] = *utt.t0;
        if (utt.t1) line["t1"] = *utt.t1;
        out += line.dump();
        out += '\n';
    }
    return out;
}

SessionTranscript normalize(const SessionTranscript& transcript, bool merge_consecutive) {
    SessionTranscript out;
    out.session_id = transcript.session_id;
    out.age_months = transcript.age_months;
    out.gender = transcript.gender;
    out.clinician_items = transcript.clinician_items;

    for (const auto& utt : transcript.utterances) {
        std::string text = collapse_whitespace(utt.text);
        if (text.empty()) continue;
        if (merge_consecutive && !out.utterances.empty() &&
            out.utterances.back().speaker == utt.speaker) {
            auto& prev = out.utterances.back();
            prev.text += ' ';
            prev.text += text;
            if (utt.t1) prev.t1 = utt.t1;
            continue;
        }
        Utterance copy = utt;
        copy.text = std::move(text);
        copy.index = out.utterances.size();
        out.utterances.push_back(std::move(copy));
    }

    if (out.utterances.empty()) {
        throw Error(ErrorKind::EmptySession, out.session_id);
    }
    return out;
}

}  // namespace ados
