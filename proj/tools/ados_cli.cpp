#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ados/pipeline.hpp"

namespace {

ados::PipelineConfig load_config(const std::string& config_path,
                                 const std::string& run_dir_override,
                                 long long seed_override, int jobs_override) {
    ados::PipelineConfig config = ados::PipelineConfig::load(config_path);
    if (!run_dir_override.empty()) config.run_dir = run_dir_override;
    if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);
    if (jobs_override > 0) config.jobs = jobs_override;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ADOS-2 Module-3 transcript scoring pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string run_dir;
    long long seed = -1;
    int jobs = 0;
    bool replay = false;
    bool force = false;
    app.add_option("--config", config_path, "pipeline config JSON");
    app.add_option("--run-dir", run_dir, "override the run directory");
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--jobs", jobs, "worker threads for per-session stages");
    app.add_flag("--replay", replay, "consume fixtures/records instead of the network");
    app.add_flag("--force", force, "re-run stages that are already complete");

    auto* fit = app.add_subcommand("fit", "fit rule thresholds on the labeled corpus");

    auto* score = app.add_subcommand("score", "score sessions with rule and/or llm");
    std::vector<std::string> sources = {"rule", "llm"};
    score->add_option("--sources", sources, "subset of {rule, llm}");

    auto* fuse = app.add_subcommand("fuse", "fuse llm and rule score sheets");
    auto* evaluate = app.add_subcommand("evaluate", "compute the metrics table");

    auto* explain = app.add_subcommand("explain", "second-stage excerpt extraction");
    std::string explain_session, explain_item = "B9";
    explain->add_option("--session", explain_session, "session id")->required();
    explain->add_option("--item", explain_item, "item (A4..B11)");

    auto* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
    std::string synth_out;
    std::size_t synth_sessions = 28;
    std::vector<std::size_t> synth_mix = {12, 4, 12};
    long long synth_seed = 0;
    bool synth_errors = false;
    synth->add_option("--out", synth_out, "output corpus directory")->required();
    synth->add_option("--sessions", synth_sessions, "number of sessions");
    synth->add_option("--mix", synth_mix, "class mix: td asd autism")->expected(3);
    synth->add_option("--synth-seed", synth_seed, "generator seed");
    synth->add_flag("--error-fixtures", synth_errors,
                    "also emit malformed response fixtures");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            ados::GeneratorProfile profile;
            profile.n_sessions = synth_sessions;
            profile.class_mix = {synth_mix[0], synth_mix[1], synth_mix[2]};
            profile.seed = static_cast<std::uint64_t>(synth_seed);
            profile.emit_error_fixtures = synth_errors;
            ados::cmd_synth(profile, synth_out);
            std::cout << "wrote " << profile.n_sessions << " sessions to " << synth_out
                      << "\n";
            return 0;
        }

        if (config_path.empty()) {
            std::cerr << "error: --config is required for this command\n";
            return 2;
        }
        const ados::PipelineConfig config =
            load_config(config_path, run_dir, seed, jobs);

        if (fit->parsed()) {
            ados::cmd_fit(config, force);
            std::cout << "params: " << config.run_dir << "/params.json\n";
        } else if (score->parsed()) {
            for (const auto& source : sources) {
                if (source == "rule") {
                    ados::cmd_score_rule(config, force);
                    std::cout << "scores: " << config.run_dir << "/scores_rule.json\n";
                } else if (source == "llm") {
                    ados::cmd_score_llm(config, replay, force);
                    std::cout << "scores: " << config.run_dir << "/scores_llm.json\n";
                } else {
                    std::cerr << "error: unknown source " << source << "\n";
                    return 2;
                }
            }
        } else if (fuse->parsed()) {
            ados::cmd_fuse(config, force);
            std::cout << "fused: " << config.run_dir << "/fused.json\n";
        } else if (evaluate->parsed()) {
            std::cout << ados::cmd_evaluate(config, force);
        } else if (explain->parsed()) {
            auto item = ados::item_from_name(explain_item);
            if (!item) {
                std::cerr << "error: unknown item " << explain_item << "\n";
                return 2;
            }
            const ados::ExplanationRecord record =
                ados::cmd_explain(config, explain_session, *item, replay);
            std::cout << record.to_json();
        }
    } catch (const ados::Error& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 0;
}
