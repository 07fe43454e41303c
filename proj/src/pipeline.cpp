#include "ados/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace ados {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot read " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    fs::create_directories(fs::path(path).parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw Error(ErrorKind::IoError, "cannot write " + tmp);
        }
        out << content;
    }
    fs::rename(tmp, path);
}

namespace {

std::string interpolate_env(const std::string& value) {
    std::string out;
    std::size_t pos = 0;
    while (pos < value.size()) {
        auto start = value.find("${", pos);
        if (start == std::string::npos) {
            out += value.substr(pos);
            break;
        }
        auto end = value.find('}', start);
        if (end == std::string::npos) {
            out += value.substr(pos);
            break;
        }
        out += value.substr(pos, start - pos);
        const std::string name = value.substr(start + 2, end - start - 2);
        const char* env = std::getenv(name.c_str());
        if (env) out += env;
        pos = end + 1;
    }
    return out;
}

std::string bytes_digest(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(hash));
    return buffer;
}

// Deterministic chunked parallel map: results land in index order.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const int worker_count = std::min<int>(jobs, static_cast<int>(n));
    for (int w = 0; w < worker_count; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& worker : workers) worker.join();
    if (failure) std::rethrow_exception(failure);
}

json items_to_json(const ItemScoreSheet& sheet) {
    json out = json::object();
    for (ItemId item : kAllItems) {
        out[std::string(item_name(item))] = sheet[item];
    }
    return out;
}

ItemScoreSheet items_from_json(const json& obj, ScoreSource source) {
    ItemScoreSheet sheet;
    sheet.source = source;
    for (ItemId item : kAllItems) {
        sheet[item] = obj.at(std::string(item_name(item))).get<int>();
    }
    return sheet;
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
    return from_json_text(read_file(path));
}

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorKind::ConfigError, "config is not a JSON object");
    }
    PipelineConfig config;
    config.config_digest = bytes_digest(text);

    auto get_string = [&](const json& node, const char* key) {
        return interpolate_env(node.at(key).get<std::string>());
    };

    config.corpus_dir = get_string(doc, "corpus_dir");
    config.assets_dir = get_string(doc, "assets_dir");
    config.lexicon_path = get_string(doc, "lexicon");
    config.run_dir = get_string(doc, "run_dir");
    config.seed = doc.value<std::uint64_t>("seed", 0);
    config.jobs = doc.value("jobs", 1);

    if (doc.contains("features")) {
        const auto& features = doc["features"];
        config.echolalia_threshold =
            features.value("echolalia_threshold", config.echolalia_threshold);
        config.negation_window =
            features.value("negation_window", config.negation_window);
        config.participation_by_tokens =
            features.value("participation_by_tokens", config.participation_by_tokens);
    }

    if (!doc.contains("rules")) {
        throw Error(ErrorKind::ConfigError, "config needs a rules section");
    }
    const auto& rules = doc["rules"];
    if (rules.contains("grid") == rules.contains("params_path")) {
        throw Error(ErrorKind::ConfigError,
                    "rules section needs exactly one of grid / params_path");
    }
    if (rules.contains("grid")) {
        ThresholdGrid grid;
        for (ItemId item : kAllItems) {
            const std::string name(item_name(item));
            if (!rules["grid"].contains(name)) {
                throw Error(ErrorKind::EmptyGrid, name);
            }
            for (const auto& pair : rules["grid"][name]) {
                grid[item_index(item)].push_back(
                    {pair.at(0).get<double>(), pair.at(1).get<double>()});
            }
            if (grid[item_index(item)].empty()) {
                throw Error(ErrorKind::EmptyGrid, name);
            }
        }
        config.grid = grid;
    } else {
        config.fitted_params_path = get_string(rules, "params_path");
    }

    if (doc.contains("prompt")) {
        const auto& prompt = doc["prompt"];
        const std::string mode = prompt.value("criteria_mode", "standard");
        if (mode == "concise") {
            config.criteria_mode = CriteriaMode::Concise;
        } else if (mode == "standard") {
            config.criteria_mode = CriteriaMode::Standard;
        } else {
            throw Error(ErrorKind::ConfigError, "criteria_mode " + mode);
        }
        config.include_procedures =
            prompt.value("include_procedures", config.include_procedures);
        config.include_stats = prompt.value("include_stats", config.include_stats);
        const std::string scoring = prompt.value("mode", "score_explain_zero_shot");
        if (scoring == "only_scoring") {
            config.scoring_mode = ScoringMode::OnlyScoring;
        } else if (scoring == "score_explain_zero_shot") {
            config.scoring_mode = ScoringMode::ScoreExplainZeroShot;
        } else if (scoring == "score_explain_few_shot") {
            config.scoring_mode = ScoringMode::ScoreExplainFewShot;
        } else {
            throw Error(ErrorKind::ConfigError, "scoring mode " + scoring);
        }
        if (prompt.contains("stats")) {
            PriorStats stats;
            stats.asd_proportion = prompt["stats"].value("asd_proportion", 0.571);
            stats.td_proportion = prompt["stats"].value("td_proportion", 0.429);
            if (prompt["stats"].contains("item_means")) {
                for (const auto& [key, value] :
                     prompt["stats"]["item_means"].items()) {
                    stats.item_means[key] = value.get<double>();
                }
            }
            stats.validate();
            config.stats_override = stats;
        }
    }

    if (doc.contains("endpoint")) {
        const auto& endpoint = doc["endpoint"];
        config.endpoint.base_url = interpolate_env(endpoint.value("base_url", ""));
        config.endpoint.path = endpoint.value("path", config.endpoint.path);
        config.endpoint.model_name =
            endpoint.value("model_name", config.endpoint.model_name);
        config.endpoint.api_key_env = endpoint.value("api_key_env", "");
        config.endpoint.timeout_s = endpoint.value("timeout_s", 30.0);
        config.endpoint.max_retries = endpoint.value("max_retries", 3);
        config.endpoint.max_concurrent = endpoint.value("max_concurrent", 4);
        config.endpoint.requests_per_minute =
            endpoint.value("requests_per_minute", 60);
        config.endpoint.backoff_initial_ms =
            endpoint.value("backoff_initial_ms", 500.0);
    }

    if (doc.contains("fusion")) {
        auto strategy = fusion_strategy_from_name(doc["fusion"].get<std::string>());
        if (!strategy) {
            throw Error(ErrorKind::ConfigError,
                        "fusion strategy " + doc["fusion"].get<std::string>());
        }
        config.strategy = *strategy;
    }
    return config;
}

FeatureConfig PipelineConfig::feature_config() const {
    FeatureConfig features;
    features.echolalia_similarity_threshold = echolalia_threshold;
    features.negation_window = negation_window;
    features.participation_by_tokens = participation_by_tokens;
    features.sentiment = std::make_shared<LexiconSentiment>(LexiconSentiment::load(
        lexicon_path,
        {"not", "no", "never", "don't", "doesn't", "didn't", "can't", "won't",
         "isn't", "wasn't"},
        negation_window));
    features.validate();
    return features;
}

PromptContext PipelineConfig::prompt_context(const PromptAssets& assets) const {
    PromptContext ctx;
    ctx.criteria_mode = criteria_mode;
    ctx.include_procedures = include_procedures;
    ctx.include_stats = include_stats;
    if (stats_override) ctx.stats = *stats_override;
    ctx.mode = scoring_mode;
    if (scoring_mode == ScoringMode::ScoreExplainFewShot) {
        if (assets.few_shot.empty()) {
            throw Error(ErrorKind::MissingFewShot,
                        "few-shot mode but assets have no examples");
        }
        ctx.few_shot_examples = assets.few_shot;
    }
    return ctx;
}

RunManifest RunManifest::load_or_create(const PipelineConfig& config) {
    const std::string path = config.run_dir + "/manifest.json";
    RunManifest manifest;
    if (fs::exists(path)) {
        json doc = json::parse(read_file(path));
        manifest.run_id = doc.at("run_id").get<std::string>();
        manifest.config_digest = doc.at("config_digest").get<std::string>();
        manifest.seed = doc.at("seed").get<std::uint64_t>();
        for (const auto& [key, value] : doc.at("stages").items()) {
            manifest.stages[key] = value.get<bool>();
        }
        for (const auto& [key, value] : doc.at("artifacts").items()) {
            manifest.artifacts[key] = value.get<std::string>();
        }
        return manifest;
    }
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    manifest.run_id =
        std::to_string(
            std::chrono::duration_cast<std::chrono::seconds>(now).count()) +
        "-" + std::to_string(config.seed);
    manifest.config_digest = config.config_digest;
    manifest.seed = config.seed;
    return manifest;
}

void RunManifest::save(const std::string& run_dir) const {
    json doc;
    doc["run_id"] = run_id;
    doc["config_digest"] = config_digest;
    doc["seed"] = seed;
    doc["stages"] = stages;
    doc["artifacts"] = artifacts;
    write_file_atomic(run_dir + "/manifest.json", doc.dump(2) + "\n");
}

const SessionTranscript* Corpus::find(const std::string& session_id) const {
    for (const auto& session : sessions) {
        if (session.session_id == session_id) return &session;
    }
    return nullptr;
}

Corpus load_corpus(const std::string& directory) {
    if (!fs::is_directory(directory)) {
        throw Error(ErrorKind::IoError, "corpus directory " + directory);
    }
    Corpus corpus;
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (entry.path().extension() == ".jsonl") {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        SessionTranscript transcript = parse_transcript(read_file(file));
        corpus.sessions.push_back(normalize(transcript, /*merge_consecutive=*/true));
    }
    std::sort(corpus.sessions.begin(), corpus.sessions.end(),
              [](const auto& a, const auto& b) { return a.session_id < b.session_id; });

    const std::string labels_path = directory + "/labels.json";
    if (fs::exists(labels_path)) {
        json doc = json::parse(read_file(labels_path));
        for (const auto& [session_id, entry] : doc.items()) {
            const SessionTranscript* transcript = corpus.find(session_id);
            if (transcript == nullptr) {
                throw Error(ErrorKind::IoError,
                            "labels.json references unknown session " + session_id);
            }
            if (!transcript->clinician_items) {
                throw Error(ErrorKind::MissingItem,
                            session_id + " lacks clinician_items in its header");
            }
            SessionLabel label;
            label.items = items_from_json(entry.at("items"), ScoreSource::Clinician);
            label.clinician = *transcript->clinician_items;
            corpus.labels[session_id] = label;
            const DiagnosisClass diagnosis =
                classify(total_score(label.items, label.clinician));
            corpus.diagnosis[session_id] = diagnosis.ternary;
        }
    }
    return corpus;
}

void cmd_synth(const GeneratorProfile& profile, const std::string& out_dir) {
    write_corpus(generate(profile), out_dir);
}

namespace {

bool stage_done(const RunManifest& manifest, const std::string& stage) {
    auto found = manifest.stages.find(stage);
    return found != manifest.stages.end() && found->second;
}

void finish_stage(RunManifest& manifest, const PipelineConfig& config,
                  const std::string& stage,
                  const std::map<std::string, std::string>& artifacts) {
    manifest.stages[stage] = true;
    for (const auto& [name, path] : artifacts) {
        manifest.artifacts[name] = path;
    }
    manifest.save(config.run_dir);
}

std::vector<LabeledSession> build_labeled_sessions(const Corpus& corpus,
                                                   const PipelineConfig& config) {
    const FeatureConfig features = config.feature_config();
    std::vector<const SessionTranscript*> labeled;
    for (const auto& session : corpus.sessions) {
        if (corpus.labels.count(session.session_id)) labeled.push_back(&session);
    }
    std::vector<LabeledSession> out(labeled.size());
    parallel_for(labeled.size(), config.jobs, [&](std::size_t i) {
        const SessionTranscript& t = *labeled[i];
        LabeledSession entry;
        entry.session_id = t.session_id;
        entry.features = extract_features(t, features);
        entry.labels = corpus.labels.at(t.session_id).items;
        entry.stratum = static_cast<int>(corpus.diagnosis.at(t.session_id));
        out[i] = std::move(entry);
    });
    return out;
}

RuleParams load_params_for_scoring(const PipelineConfig& config) {
    std::string path;
    if (config.fitted_params_path) {
        path = *config.fitted_params_path;
    } else {
        path = config.run_dir + "/params.json";
        if (!fs::exists(path)) {
            throw Error(ErrorKind::MissingStage,
                        "no fitted params at " + path + "; run fit first");
        }
    }
    return RuleParams::from_json(read_file(path));
}

}  // namespace

void cmd_fit(const PipelineConfig& config, bool force) {
    RunManifest manifest = RunManifest::load_or_create(config);
    if (!force && stage_done(manifest, "fit")) return;
    if (!config.grid) {
        throw Error(ErrorKind::ConfigError, "fit requires a rules.grid section");
    }

    Corpus corpus = load_corpus(config.corpus_dir);
    if (corpus.labels.empty()) {
        throw Error(ErrorKind::IoError,
                    "no labels.json in " + config.corpus_dir + "; fit needs labels");
    }
    const auto labeled = build_labeled_sessions(corpus, config);
    FitResult result =
        fit_params(labeled, default_rule_params(), *config.grid, config.seed);

    write_file_atomic(config.run_dir + "/params.json", result.params.to_json());
    write_file_atomic(config.run_dir + "/fit_report.json", result.report.to_json());
    finish_stage(manifest, config, "fit",
                 {{"params", config.run_dir + "/params.json"},
                  {"fit_report", config.run_dir + "/fit_report.json"}});
}

void cmd_score_rule(const PipelineConfig& config, bool force) {
    RunManifest manifest = RunManifest::load_or_create(config);
    if (!force && stage_done(manifest, "score_rule")) return;

    const RuleParams params = load_params_for_scoring(config);
    const FeatureConfig features = config.feature_config();
    Corpus corpus = load_corpus(config.corpus_dir);

    std::vector<ItemScoreSheet> sheets(corpus.sessions.size());
    parallel_for(corpus.sessions.size(), config.jobs, [&](std::size_t i) {
        sheets[i] = score_all_rule(extract_features(corpus.sessions[i], features),
                                   params);
    });

    json doc = json::object();
    for (std::size_t i = 0; i < corpus.sessions.size(); ++i) {
        doc[corpus.sessions[i].session_id] = {{"items", items_to_json(sheets[i])}};
    }
    write_file_atomic(config.run_dir + "/scores_rule.json", doc.dump(2) + "\n");
    finish_stage(manifest, config, "score_rule",
                 {{"scores_rule", config.run_dir + "/scores_rule.json"}});
}

void cmd_score_llm(const PipelineConfig& config, bool replay, bool force) {
    RunManifest manifest = RunManifest::load_or_create(config);
    if (!force && stage_done(manifest, "score_llm")) return;

    const PromptAssets assets = PromptAssets::load(config.assets_dir);
    const PromptContext ctx = config.prompt_context(assets);
    Corpus corpus = load_corpus(config.corpus_dir);

    std::optional<LlmGateway> gateway;
    if (!replay) {
        gateway.emplace(config.endpoint, config.run_dir + "/raw_llm");
    }

    struct SessionResult {
        std::vector<LlmItemResult> results;
        std::optional<std::string> error;
    };
    std::vector<SessionResult> outcomes(corpus.sessions.size());

    parallel_for(corpus.sessions.size(), config.jobs, [&](std::size_t i) {
        const SessionTranscript& t = corpus.sessions[i];
        try {
            std::string response;
            if (replay) {
                const std::string fixture = config.corpus_dir + "/fixtures/" +
                                            t.session_id + "/" +
                                            std::string(scoring_mode_name(ctx.mode)) +
                                            ".txt";
                response = read_file(fixture);
            } else {
                const PromptBundle bundle = build_scoring_prompt(t, ctx, assets);
                response = gateway->complete(bundle, t.session_id + "_score").first;
            }
            outcomes[i].results = parse_scoring_response(response, ctx.mode);
        } catch (const Error& error) {
            outcomes[i].error = error.what();
        }
    });

    json doc = json::object();
    bool any_failed = false;
    std::string first_failure;
    for (std::size_t i = 0; i < corpus.sessions.size(); ++i) {
        const std::string& sid = corpus.sessions[i].session_id;
        if (outcomes[i].error) {
            any_failed = true;
            if (first_failure.empty()) {
                first_failure = sid + ": " + *outcomes[i].error;
            }
            doc[sid] = {{"error", *outcomes[i].error}};
            continue;
        }
        ItemScoreSheet sheet;
        sheet.source = ScoreSource::Llm;
        json justifications = json::object();
        for (const auto& result : outcomes[i].results) {
            sheet[result.item] = result.score;
            justifications[std::string(item_name(result.item))] = result.justification;
        }
        doc[sid] = {{"items", items_to_json(sheet)},
                    {"justifications", justifications}};
    }
    write_file_atomic(config.run_dir + "/scores_llm.json", doc.dump(2) + "\n");
    if (any_failed) {
        throw Error(ErrorKind::MissingPrediction, first_failure);
    }
    finish_stage(manifest, config, "score_llm",
                 {{"scores_llm", config.run_dir + "/scores_llm.json"}});
}

namespace {

std::map<std::string, ItemScoreSheet> load_scores(const std::string& path,
                                                  ScoreSource source,
                                                  const std::string& stage) {
    if (!fs::exists(path)) {
        throw Error(ErrorKind::MissingStage,
                    "missing " + path + "; run " + stage + " first");
    }
    std::map<std::string, ItemScoreSheet> out;
    json doc = json::parse(read_file(path));
    for (const auto& [session_id, entry] : doc.items()) {
        if (!entry.contains("items")) continue;  // per-session failure entry
        out[session_id] = items_from_json(entry.at("items"), source);
    }
    return out;
}

}  // namespace

void cmd_fuse(const PipelineConfig& config, bool force) {
    RunManifest manifest = RunManifest::load_or_create(config);
    if (!force && stage_done(manifest, "fuse")) return;

    Corpus corpus = load_corpus(config.corpus_dir);
    if (corpus.labels.empty()) {
        throw Error(ErrorKind::IoError, "fuse needs labels.json for the MAE table");
    }
    const auto llm =
        load_scores(config.run_dir + "/scores_llm.json", ScoreSource::Llm, "score llm");
    const auto rule = load_scores(config.run_dir + "/scores_rule.json",
                                  ScoreSource::Rule, "score rule");

    // Per-item MAE on the labeled fitting corpus feeds the fusion weights;
    // held-out test sessions must not contribute here.
    MaeTable mae;
    for (ItemId item : kAllItems) {
        std::vector<double> llm_pred, rule_pred, truth;
        for (const auto& [session_id, label] : corpus.labels) {
            auto llm_found = llm.find(session_id);
            auto rule_found = rule.find(session_id);
            if (llm_found == llm.end() || rule_found == rule.end()) {
                throw Error(ErrorKind::MissingPrediction, session_id);
            }
            llm_pred.push_back(llm_found->second[item]);
            rule_pred.push_back(rule_found->second[item]);
            truth.push_back(label.items[item]);
        }
        mae[item] = {item_mae(llm_pred, truth), item_mae(rule_pred, truth)};
    }

    const FusionWeights weights = compute_weights(mae, config.strategy);

    json fused_doc = json::object();
    for (const auto& [session_id, llm_sheet] : llm) {
        auto rule_found = rule.find(session_id);
        if (rule_found == rule.end()) {
            throw Error(ErrorKind::MissingPrediction, session_id + " (rule)");
        }
        const FusedScoreSheet fused = fuse(llm_sheet, rule_found->second, weights);
        const ItemScoreSheet rounded = round_for_totals(fused);
        json real = json::object();
        for (ItemId item : kAllItems) {
            real[std::string(item_name(item))] = fused[item];
        }
        fused_doc[session_id] = {{"items_real", real},
                                 {"items_rounded", items_to_json(rounded)}};
    }

    write_file_atomic(config.run_dir + "/mae_table.json", mae.to_json());
    write_file_atomic(config.run_dir + "/weights.json", weights.to_json());
    write_file_atomic(config.run_dir + "/fused.json", fused_doc.dump(2) + "\n");
    finish_stage(manifest, config, "fuse",
                 {{"mae_table", config.run_dir + "/mae_table.json"},
                  {"weights", config.run_dir + "/weights.json"},
                  {"fused", config.run_dir + "/fused.json"}});
}

std::string cmd_evaluate(const PipelineConfig& config, bool force) {
    RunManifest manifest = RunManifest::load_or_create(config);
    if (!force && stage_done(manifest, "evaluate")) {
        return read_file(config.run_dir + "/metrics_table.txt");
    }

    Corpus corpus = load_corpus(config.corpus_dir);
    if (corpus.labels.empty()) {
        throw Error(ErrorKind::IoError, "evaluate needs labels.json");
    }

    std::map<std::string, PredictionMap> sources;
    auto add_integer_source = [&](const std::string& name, const std::string& path,
                                  ScoreSource source, const std::string& stage) {
        if (!fs::exists(path)) return false;
        PredictionMap predictions;
        for (const auto& [session_id, sheet] : load_scores(path, source, stage)) {
            std::array<double, kItemCount> scores{};
            for (ItemId item : kAllItems) {
                scores[item_index(item)] = static_cast<double>(sheet[item]);
            }
            predictions[session_id] = scores;
        }
        sources[name] = std::move(predictions);
        return true;
    };
    const bool have_rule = add_integer_source(
        "rule", config.run_dir + "/scores_rule.json", ScoreSource::Rule, "score rule");
    const bool have_llm = add_integer_source(
        "llm", config.run_dir + "/scores_llm.json", ScoreSource::Llm, "score llm");
    if (!have_rule && !have_llm) {
        throw Error(ErrorKind::MissingStage, "no score artifacts in " + config.run_dir);
    }

    const std::string fused_path = config.run_dir + "/fused.json";
    if (fs::exists(fused_path)) {
        PredictionMap predictions;
        json doc = json::parse(read_file(fused_path));
        for (const auto& [session_id, entry] : doc.items()) {
            std::array<double, kItemCount> scores{};
            for (ItemId item : kAllItems) {
                scores[item_index(item)] =
                    entry.at("items_real").at(std::string(item_name(item))).get<double>();
            }
            predictions[session_id] = scores;
        }
        sources["fusion"] = std::move(predictions);
    }

    const auto reports = evaluate_corpus(sources, corpus.labels, config.seed);

    json metrics = json::object();
    for (const auto& [name, report] : reports) {
        metrics[name] = json::parse(report.to_json());
    }
    const std::string table = metrics_table(reports);
    write_file_atomic(config.run_dir + "/metrics.json", metrics.dump(2) + "\n");
    write_file_atomic(config.run_dir + "/metrics_table.txt", table);
    finish_stage(manifest, config, "evaluate",
                 {{"metrics", config.run_dir + "/metrics.json"},
                  {"metrics_table", config.run_dir + "/metrics_table.txt"}});
    return table;
}

ExplanationRecord cmd_explain(const PipelineConfig& config,
                              const std::string& session_id, ItemId item,
                              bool replay) {
    Corpus corpus = load_corpus(config.corpus_dir);
    const SessionTranscript* transcript = corpus.find(session_id);
    if (transcript == nullptr) {
        throw Error(ErrorKind::IoError, "unknown session " + session_id);
    }

    // First-stage score comes from the persisted LLM stage.
    const std::string scores_path = config.run_dir + "/scores_llm.json";
    if (!fs::exists(scores_path)) {
        throw Error(ErrorKind::MissingStage,
                    "missing " + scores_path + "; run score llm first");
    }
    json scores_doc = json::parse(read_file(scores_path));
    if (!scores_doc.contains(session_id) ||
        !scores_doc[session_id].contains("items")) {
        throw Error(ErrorKind::MissingPrediction, session_id);
    }
    LlmItemResult first_stage;
    first_stage.item = item;
    first_stage.score =
        scores_doc[session_id]["items"].at(std::string(item_name(item))).get<int>();
    if (scores_doc[session_id].contains("justifications")) {
        first_stage.justification =
            scores_doc[session_id]["justifications"]
                .value(std::string(item_name(item)), "");
    }

    const PromptAssets assets = PromptAssets::load(config.assets_dir);
    std::string response;
    if (replay) {
        response = read_file(config.corpus_dir + "/fixtures/" + session_id +
                             "/explain_" + std::string(item_name(item)) + ".txt");
    } else {
        const PromptBundle bundle =
            build_interpretability_prompt(item, first_stage, *transcript, assets);
        LlmGateway gateway(config.endpoint, config.run_dir + "/raw_llm");
        response = gateway
                       .complete(bundle, session_id + "_explain_" +
                                            std::string(item_name(item)))
                       .first;
    }

    ExplanationRecord record =
        parse_explanation_response(response, item, *transcript, first_stage.score);
    write_file_atomic(config.run_dir + "/explanations/" + session_id + "_" +
                          std::string(item_name(item)) + ".json",
                      record.to_json());
    return record;
}

}  // namespace ados
