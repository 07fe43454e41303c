#include "ados/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "ados/prompts.hpp"

namespace ados {

using nlohmann::json;

void GeneratorProfile::validate() const {
    if (class_mix[0] + class_mix[1] + class_mix[2] != n_sessions) {
        throw Error(ErrorKind::InvalidProfile, "class_mix must sum to n_sessions");
    }
    if (n_sessions == 0 || min_turns < 2 || max_turns < min_turns) {
        throw Error(ErrorKind::InvalidProfile, "bad session/turn counts");
    }
    for (const auto& k : knobs) {
        for (double p : {k.echo_prob, k.answer_prob, k.positive_prob, k.suggestion_prob}) {
            if (p < 0.0 || p > 1.0) {
                throw Error(ErrorKind::InvalidProfile, "probability outside [0,1]");
            }
        }
    }
}

namespace {

int ladder_high(double p, double mid, double high) {
    // Severity grows with p.
    if (p >= high) return 2;
    if (p >= mid) return 1;
    return 0;
}

int ladder_low(double p, double low, double mid) {
    // Severity grows as p falls.
    if (p <= low) return 2;
    if (p <= mid) return 1;
    return 0;
}

const std::vector<std::string>& doctor_questions() {
    static const std::vector<std::string> bank = {
        "What did you do at school today?",
        "Can you tell me about your friends?",
        "How do you feel about that?",
        "Where did you go last weekend?",
        "What is your favorite game?",
        "Who do you like to play with?",
    };
    return bank;
}

const std::vector<std::string>& doctor_statements() {
    static const std::vector<std::string> bank = {
        "That sounds interesting.",
        "Tell me more about it.",
        "I see, thank you for sharing.",
        "Here are some toys for you.",
    };
    return bank;
}

const std::vector<std::string>& neutral_answers() {
    static const std::vector<std::string> bank = {
        "I played with blocks.",
        "We went to the park with my mom.",
        "My teacher read us a story.",
        "I watched a cartoon at home.",
        "There was a dog outside.",
    };
    return bank;
}

const std::vector<std::string>& positive_answers() {
    static const std::vector<std::string> bank = {
        "I love playing with my friends, it makes me happy.",
        "That game is so fun, I really like it.",
        "We had a great time at the zoo.",
    };
    return bank;
}

const std::vector<std::string>& negative_answers() {
    static const std::vector<std::string> bank = {
        "I hate doing homework, it is bad.",
        "I was sad and angry yesterday.",
        "That movie was scary and I did not like it.",
    };
    return bank;
}

const std::vector<std::string>& suggestion_answers() {
    static const std::vector<std::string> bank = {
        "Let's play a game together.",
        "Let's build a big tower with these blocks.",
        "Do you want to draw with me?",
    };
    return bank;
}

template <typename Rng>
const std::string& pick(const std::vector<std::string>& bank, Rng& rng) {
    std::uniform_int_distribution<std::size_t> dist(0, bank.size() - 1);
    return bank[dist(rng)];
}

template <typename Rng>
bool flip(double p, Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

ClinicianItemSheet clinician_for_target(const ItemScoreSheet& labels,
                                        TernaryClass target) {
    int s8 = 0;
    for (ItemId item : kAllItems) s8 += std::min(labels[item], 2);

    int needed = 0;
    switch (target) {
        case TernaryClass::NonSpectrum:
            if (s8 > 6) {
                throw Error(ErrorKind::InvalidProfile,
                            "TD knobs imply total above the non-spectrum cutoff");
            }
            break;
        case TernaryClass::SpectrumDisorder:
            if (s8 > 8) {
                throw Error(ErrorKind::InvalidProfile,
                            "spectrum knobs imply total above the spectrum band");
            }
            needed = std::max(0, 7 - s8);
            break;
        case TernaryClass::Autism:
            needed = std::max(0, 9 - s8);
            break;
    }

    ClinicianItemSheet sheet;
    static const char* kLabels[6] = {"A1", "A2", "B1", "B2", "D1", "D2"};
    for (const char* label : kLabels) {
        const int score = std::min(needed, 2);
        sheet.scores[label] = score;
        needed -= score;
    }
    if (needed > 0) {
        throw Error(ErrorKind::InvalidProfile, "clinician items cannot reach target band");
    }
    return sheet;
}

std::string explain_fixture(ItemId item, int score, const SessionTranscript& t) {
    std::string quoted = "hello";
    for (const auto& utt : t.utterances) {
        if (utt.speaker == Speaker::Child) {
            quoted = utt.text;
            break;
        }
    }
    std::string out = "score: " + std::to_string(score) + "\n";
    out += "excerpt: \"" + quoted + "\"\n";
    out += "rationale: The child's turn above illustrates the behavior scored under " +
           std::string(item_name(item)) + ".\n";
    return out;
}

}  // namespace

ItemScoreSheet labels_from_knobs(const ClassKnobs& knobs) {
    ItemScoreSheet labels;
    labels.source = ScoreSource::Clinician;
    labels[ItemId::A4] = ladder_high(knobs.echo_prob, 0.3, 0.6);
    labels[ItemId::A7] = ladder_low(knobs.answer_prob, 0.4, 0.7);
    labels[ItemId::A8] = ladder_low(knobs.answer_prob, 0.4, 0.7);
    labels[ItemId::B4] = ladder_low(knobs.positive_prob, 0.2, 0.5);
    labels[ItemId::B7] = ladder_low(knobs.suggestion_prob, 0.1, 0.3);
    labels[ItemId::B9] = ladder_low(knobs.answer_prob, 0.4, 0.7);
    labels[ItemId::B10] = ladder_low(knobs.answer_prob, 0.4, 0.7);
    double sum = 0;
    for (ItemId item :
         {ItemId::A4, ItemId::A7, ItemId::A8, ItemId::B4, ItemId::B7, ItemId::B9,
          ItemId::B10}) {
        sum += labels[item];
    }
    labels[ItemId::B11] =
        std::clamp(static_cast<int>(std::round(sum / 7.0)), 0, 2);
    return labels;
}

GeneratedCorpus generate(const GeneratorProfile& profile) {
    profile.validate();
    std::mt19937_64 rng(profile.seed);
    GeneratedCorpus corpus;

    std::size_t session_number = 0;
    for (std::size_t cls = 0; cls < 3; ++cls) {
        const ClassKnobs& knobs = profile.knobs[cls];
        const TernaryClass diagnosis = static_cast<TernaryClass>(cls);
        const ItemScoreSheet labels = labels_from_knobs(knobs);

        for (std::size_t s = 0; s < profile.class_mix[cls]; ++s) {
            GeneratedSession session;
            session.diagnosis = diagnosis;
            session.labels = labels;

            SessionTranscript& t = session.transcript;
            char sid[32];
            std::snprintf(sid, sizeof(sid), "synth-%03zu",
                          session_number++);
            t.session_id = sid;
            t.age_months =
                72 + static_cast<int>(std::uniform_int_distribution<int>(0, 60)(rng));
            t.gender = flip(0.5, rng) ? "m" : "f";
            t.clinician_items = clinician_for_target(labels, diagnosis);

            const std::size_t turns = std::uniform_int_distribution<std::size_t>(
                profile.min_turns, profile.max_turns)(rng);
            for (std::size_t turn = 0; turn < turns; ++turn) {
                Utterance doctor;
                doctor.speaker = Speaker::Doctor;
                doctor.text = flip(0.6, rng) ? pick(doctor_questions(), rng)
                                             : pick(doctor_statements(), rng);
                doctor.index = t.utterances.size();
                t.utterances.push_back(doctor);

                std::string reply;
                if (flip(knobs.echo_prob, rng)) {
                    reply = doctor.text;  // verbatim immediate echo
                } else if (flip(knobs.answer_prob, rng)) {
                    if (flip(knobs.suggestion_prob, rng)) {
                        reply = pick(suggestion_answers(), rng);
                    } else if (flip(knobs.positive_prob, rng)) {
                        reply = pick(positive_answers(), rng);
                    } else if (flip((1.0 - knobs.positive_prob) * 0.4, rng)) {
                        reply = pick(negative_answers(), rng);
                    } else {
                        reply = pick(neutral_answers(), rng);
                    }
                } else {
                    continue;  // child stays silent this turn
                }
                Utterance child;
                child.speaker = Speaker::Child;
                child.text = reply;
                child.index = t.utterances.size();
                t.utterances.push_back(child);
            }

            bool has_child = std::any_of(
                t.utterances.begin(), t.utterances.end(),
                [](const Utterance& u) { return u.speaker == Speaker::Child; });
            if (!has_child) {
                Utterance child;
                child.speaker = Speaker::Child;
                child.text = knobs.echo_prob >= 1.0 ? t.utterances.back().text
                                                    : pick(neutral_answers(), rng);
                child.index = t.utterances.size();
                t.utterances.push_back(child);
            }

            // Canned first-stage responses echo the ground-truth labels so
            // replay runs have a known parse target.
            std::vector<LlmItemResult> results;
            for (ItemId item : kAllItems) {
                results.push_back({item, labels[item],
                                   "behavior consistent with the " +
                                       std::string(item_name(item)) + " criteria"});
            }
            session.fixtures["score_explain_zero_shot"] =
                serialize_scoring_response(results);
            std::vector<LlmItemResult> bare = results;
            for (auto& r : bare) r.justification.clear();
            session.fixtures["only_scoring"] = serialize_scoring_response(bare);
            for (ItemId item : kAllItems) {
                session.fixtures["explain_" + std::string(item_name(item))] =
                    explain_fixture(item, labels[item], t);
            }

            if (profile.emit_error_fixtures) {
                std::vector<LlmItemResult> missing(results.begin(), results.end() - 1);
                std::string text;
                for (const auto& r : missing) {
                    text += std::string(item_name(r.item)) + ": " +
                            std::to_string(r.score) + "\n";
                }
                session.fixtures["score_missing_item"] = text;
                session.fixtures["score_out_of_range"] =
                    "A4: 1\nA7: 5\nA8: 0\nB4: 0\nB7: 1\nB9: 1\nB10: 0\nB11: 1\n";
                session.fixtures["score_duplicate"] =
                    session.fixtures["score_explain_zero_shot"] + "A4: 2 — repeated\n";
                session.fixtures["score_prose_wrapped"] =
                    "Here is my assessment of the child.\n\n" +
                    session.fixtures["score_explain_zero_shot"] +
                    "\nOverall the scores reflect the dialogue above.\n";
            }

            corpus.sessions.push_back(std::move(session));
        }
    }
    return corpus;
}

void write_corpus(const GeneratedCorpus& corpus, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    json labels = json::object();
    for (const auto& session : corpus.sessions) {
        const std::string sid = session.transcript.session_id;
        {
            std::ofstream out(directory + "/" + sid + ".jsonl", std::ios::binary);
            if (!out) {
                throw Error(ErrorKind::IoError, directory + "/" + sid + ".jsonl");
            }
            out << serialize_transcript(session.transcript);
        }
        json items = json::object();
        for (ItemId item : kAllItems) {
            items[std::string(item_name(item))] = session.labels[item];
        }
        labels[sid] = {{"items", items},
                       {"diagnosis", std::string(ternary_class_name(session.diagnosis))}};

        const fs::path fixture_dir = fs::path(directory) / "fixtures" / sid;
        fs::create_directories(fixture_dir);
        for (const auto& [name, text] : session.fixtures) {
            std::ofstream out(fixture_dir / (name + ".txt"), std::ios::binary);
            out << text;
        }
    }
    std::ofstream out(directory + "/labels.json", std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::IoError, directory + "/labels.json");
    }
    out << labels.dump(2) << "\n";
}

}  // namespace ados
