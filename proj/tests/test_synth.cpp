#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ados/features.hpp"
#include "ados/prompts.hpp"
#include "ados/synth.hpp"

using namespace ados;
namespace fs = std::filesystem;

namespace {

GeneratorProfile small_profile(std::uint64_t seed = 1) {
    GeneratorProfile profile;
    profile.n_sessions = 8;
    profile.class_mix = {4, 2, 2};
    profile.seed = seed;
    return profile;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

FeatureConfig plain_config() {
    FeatureConfig cfg;
    cfg.sentiment = std::make_shared<LexiconSentiment>(
        std::vector<std::pair<std::string, int>>{
            {"happy", 1}, {"fun", 1}, {"love", 1}, {"like", 1}, {"great", 1},
            {"sad", -1},  {"bad", -1}, {"angry", -1}, {"hate", -1}, {"scary", -1}},
        std::vector<std::string>{"not"}, 3);
    return cfg;
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
    const GeneratedCorpus a = generate(small_profile(7));
    const GeneratedCorpus b = generate(small_profile(7));
    REQUIRE(a.sessions.size() == b.sessions.size());
    for (std::size_t i = 0; i < a.sessions.size(); ++i) {
        CHECK(serialize_transcript(a.sessions[i].transcript) ==
              serialize_transcript(b.sessions[i].transcript));
        CHECK(a.sessions[i].labels == b.sessions[i].labels);
        CHECK(a.sessions[i].fixtures == b.sessions[i].fixtures);
    }
    const GeneratedCorpus c = generate(small_profile(8));
    bool any_difference = false;
    for (std::size_t i = 0; i < a.sessions.size(); ++i) {
        any_difference = any_difference ||
                         serialize_transcript(a.sessions[i].transcript) !=
                             serialize_transcript(c.sessions[i].transcript);
    }
    CHECK(any_difference);
}

TEST_CASE("the class mix and session ids are honored") {
    GeneratorProfile profile;
    profile.seed = 3;
    const GeneratedCorpus corpus = generate(profile);
    REQUIRE(corpus.sessions.size() == 28);
    int counts[3] = {0, 0, 0};
    for (const auto& session : corpus.sessions) {
        counts[static_cast<int>(session.diagnosis)]++;
    }
    CHECK(counts[0] == 12);
    CHECK(counts[1] == 4);
    CHECK(counts[2] == 12);
    CHECK(corpus.sessions.front().transcript.session_id == "synth-000");
    CHECK(corpus.sessions.back().transcript.session_id == "synth-027");
}

TEST_CASE("labels follow the knob ladders") {
    CHECK(labels_from_knobs({1.0, 1.0, 1.0, 1.0})[ItemId::A4] == 2);
    CHECK(labels_from_knobs({0.45, 1.0, 1.0, 1.0})[ItemId::A4] == 1);
    CHECK(labels_from_knobs({0.0, 1.0, 1.0, 1.0})[ItemId::A4] == 0);
    CHECK(labels_from_knobs({0.0, 0.2, 1.0, 1.0})[ItemId::B9] == 2);
    CHECK(labels_from_knobs({0.0, 0.5, 1.0, 1.0})[ItemId::B9] == 1);
    CHECK(labels_from_knobs({0.0, 1.0, 0.1, 1.0})[ItemId::B4] == 2);
    CHECK(labels_from_knobs({0.0, 1.0, 1.0, 0.05})[ItemId::B7] == 2);
    // B11 is the rounded mean of the other seven.
    const ItemScoreSheet severe = labels_from_knobs({1.0, 0.0, 0.0, 0.0});
    CHECK(severe[ItemId::B11] == 2);
    const ItemScoreSheet mild = labels_from_knobs({0.0, 1.0, 1.0, 1.0});
    CHECK(mild[ItemId::B11] == 0);
}

TEST_CASE("each session's clinician items are consistent with its diagnosis") {
    const GeneratedCorpus corpus = generate(small_profile(11));
    for (const auto& session : corpus.sessions) {
        REQUIRE(session.transcript.clinician_items.has_value());
        session.transcript.clinician_items->validate();
        const int total =
            total_score(session.labels, *session.transcript.clinician_items);
        CHECK(classify(total).ternary == session.diagnosis);
    }
}

TEST_CASE("extreme echo knobs yield saturated echolalia measurements") {
    GeneratorProfile profile = small_profile(5);
    profile.class_mix = {0, 0, 8};
    profile.knobs[2] = {1.0, 0.0, 0.0, 0.0};  // every child turn echoes
    const GeneratedCorpus corpus = generate(profile);
    const FeatureConfig cfg = plain_config();
    for (const auto& session : corpus.sessions) {
        CHECK(echolalia_rate(normalize(session.transcript, true), cfg) == 1.0);
        CHECK(session.labels[ItemId::A4] == 2);
    }
}

TEST_CASE("knob ordering shows up in cohort feature means") {
    GeneratorProfile profile;
    profile.n_sessions = 30;
    profile.class_mix = {10, 10, 10};
    profile.seed = 21;
    const FeatureConfig cfg = plain_config();

    const GeneratedCorpus corpus = generate(profile);
    double echo_mean[3] = {0, 0, 0};
    for (const auto& session : corpus.sessions) {
        const int cls = static_cast<int>(session.diagnosis);
        echo_mean[cls] += echolalia_rate(normalize(session.transcript, true), cfg) / 10.0;
    }
    CHECK(echo_mean[0] < echo_mean[1]);
    CHECK(echo_mean[1] < echo_mean[2]);

    // An echoed question counts as a response, so isolate answer_prob by
    // disabling echoes entirely.
    GeneratorProfile no_echo = profile;
    for (auto& knobs : no_echo.knobs) knobs.echo_prob = 0.0;
    const GeneratedCorpus quiet = generate(no_echo);
    double response_mean[3] = {0, 0, 0};
    for (const auto& session : quiet.sessions) {
        const int cls = static_cast<int>(session.diagnosis);
        response_mean[cls] +=
            response_rate(normalize(session.transcript, true), cfg) / 10.0;
    }
    CHECK(response_mean[0] > response_mean[1]);
    CHECK(response_mean[1] > response_mean[2]);
}

TEST_CASE("fixtures parse back to the ground-truth labels") {
    GeneratorProfile profile = small_profile(13);
    profile.emit_error_fixtures = true;
    const GeneratedCorpus corpus = generate(profile);
    for (const auto& session : corpus.sessions) {
        const auto parsed = parse_scoring_response(
            session.fixtures.at("score_explain_zero_shot"),
            ScoringMode::ScoreExplainZeroShot);
        REQUIRE(parsed.size() == kItemCount);
        for (const auto& result : parsed) {
            CHECK(result.score == session.labels[result.item]);
            CHECK_FALSE(result.justification.empty());
        }
        const auto bare = parse_scoring_response(session.fixtures.at("only_scoring"),
                                                 ScoringMode::OnlyScoring);
        for (const auto& result : bare) {
            CHECK(result.score == session.labels[result.item]);
        }
        for (ItemId item : kAllItems) {
            const std::string name = "explain_" + std::string(item_name(item));
            const ExplanationRecord record = parse_explanation_response(
                session.fixtures.at(name), item,
                normalize(session.transcript, true), session.labels[item]);
            CHECK(record.consistent_with_first_stage);
            REQUIRE(record.excerpts.size() == 1);
            CHECK(record.excerpts[0].verified);
        }
        // Error fixtures must fail in the advertised ways.
        CHECK_THROWS_AS(parse_scoring_response(session.fixtures.at("score_missing_item"),
                                               ScoringMode::OnlyScoring),
                        Error);
        CHECK_THROWS_AS(parse_scoring_response(
                            session.fixtures.at("score_out_of_range"),
                            ScoringMode::OnlyScoring),
                        Error);
        CHECK_THROWS_AS(parse_scoring_response(session.fixtures.at("score_duplicate"),
                                               ScoringMode::OnlyScoring),
                        Error);
        // Prose wrapping alone is recoverable.
        const auto wrapped = parse_scoring_response(
            session.fixtures.at("score_prose_wrapped"),
            ScoringMode::ScoreExplainZeroShot);
        CHECK(wrapped.size() == kItemCount);
    }
}

TEST_CASE("write_corpus emits parseable sessions, labels, and fixtures") {
    const fs::path dir = fs::temp_directory_path() / "ados_synth_out";
    fs::remove_all(dir);
    const GeneratedCorpus corpus = generate(small_profile(2));
    write_corpus(corpus, dir.string());

    REQUIRE(fs::exists(dir / "labels.json"));
    for (const auto& session : corpus.sessions) {
        const std::string sid = session.transcript.session_id;
        const SessionTranscript parsed = parse_transcript(slurp(dir / (sid + ".jsonl")));
        CHECK(parsed.session_id == sid);
        CHECK(parsed.utterances.size() == session.transcript.utterances.size());
        REQUIRE(parsed.clinician_items.has_value());
        CHECK(fs::exists(dir / "fixtures" / sid / "score_explain_zero_shot.txt"));
        CHECK(fs::exists(dir / "fixtures" / sid / "only_scoring.txt"));
        CHECK(fs::exists(dir / "fixtures" / sid / "explain_B9.txt"));
    }
    const std::string labels_text = slurp(dir / "labels.json");
    CHECK(labels_text.find("synth-000") != std::string::npos);
    CHECK(labels_text.find("diagnosis") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("profile validation rejects inconsistent settings") {
    GeneratorProfile bad_mix = small_profile();
    bad_mix.class_mix = {1, 1, 1};  // does not sum to n_sessions
    CHECK_THROWS_AS(generate(bad_mix), Error);

    GeneratorProfile bad_prob = small_profile();
    bad_prob.knobs[0].echo_prob = 1.5;
    CHECK_THROWS_AS(generate(bad_prob), Error);

    GeneratorProfile bad_turns = small_profile();
    bad_turns.min_turns = 10;
    bad_turns.max_turns = 5;
    CHECK_THROWS_AS(generate(bad_turns), Error);
}

TEST_CASE("unreachable diagnosis bands raise InvalidProfile") {
    // Severe knobs for the TD slot push the language total past the
    // non-spectrum cutoff, which no clinician sheet can undo.
    GeneratorProfile impossible = small_profile();
    impossible.knobs[0] = {1.0, 0.0, 0.0, 0.0};
    try {
        generate(impossible);
        FAIL("expected InvalidProfile");
    } catch (const Error& error) {
        CHECK(error.kind() == ErrorKind::InvalidProfile);
    }
}
