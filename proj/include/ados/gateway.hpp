#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <string>

#include "ados/prompts.hpp"

namespace ados {

struct ModelEndpoint {
    std::string base_url;                       // e.g. http://127.0.0.1:8080
    std::string path = "/v1/chat/completions";  // chat-completion style JSON API
    std::string model_name = "default";
    std::string api_key_env;                    // env var holding the key; empty = none
    double timeout_s = 30.0;
    int max_retries = 3;
    int max_concurrent = 4;
    int requests_per_minute = 60;
    double rate_window_s = 60.0;
    double backoff_initial_ms = 500.0;  // doubled per retry

    void validate() const;
};

/// Full audit record of one completion call, sufficient for offline replay.
struct ExchangeRecord {
    std::string request_id;
    std::string endpoint;       // base_url + path + model
    std::string prompt_digest;  // stable hash of (system_text, user_text)
    std::string request_body;
    std::string response_body;
    std::string response_text;  // extracted assistant text
    int status = 0;
    long latency_ms = 0;
    int attempt_count = 0;
    std::string timestamp;  // UTC, ISO 8601

    std::string to_json() const;
    static ExchangeRecord from_json(const std::string& text);
};

/// Stable 64-bit FNV-1a digest of the prompt texts, hex-encoded.
std::string prompt_digest(const PromptBundle& bundle);

/// HTTP chat-completion client with retry/backoff, a concurrency cap, and a
/// rolling-window rate limit. When constructed with a replay directory it
/// serves responses from persisted ExchangeRecords and never touches the
/// network. Safe to share across worker threads.
class LlmGateway {
public:
    /// record_dir: where ExchangeRecords are persisted (one JSON per call);
    /// replay_dir: read records from here instead of calling the endpoint.
    LlmGateway(ModelEndpoint endpoint, std::optional<std::string> record_dir,
               std::optional<std::string> replay_dir = std::nullopt);

    std::pair<std::string, ExchangeRecord> complete(const PromptBundle& bundle,
                                                    const std::string& request_id);

    bool replaying() const { return replay_dir_.has_value(); }

private:
    void admit();
    void release();

    ModelEndpoint endpoint_;
    std::optional<std::string> record_dir_;
    std::optional<std::string> replay_dir_;

    std::mutex mutex_;
    std::condition_variable cv_;
    int in_flight_ = 0;
    std::deque<std::chrono::steady_clock::time_point> issue_times_;
};

}  // namespace ados
