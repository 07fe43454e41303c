#include "ados/gateway.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace ados {

using nlohmann::json;

void ModelEndpoint::validate() const {
    if (base_url.empty()) {
        throw Error(ErrorKind::ConfigError, "endpoint base_url is empty");
    }
    if (timeout_s <= 0 || max_concurrent < 1 || requests_per_minute < 1 ||
        max_retries < 0) {
        throw Error(ErrorKind::ConfigError, "endpoint limits out of range");
    }
}

std::string prompt_digest(const PromptBundle& bundle) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    auto mix = [&hash](const std::string& text) {
        for (unsigned char c : text) {
            hash ^= c;
            hash *= 0x100000001b3ULL;
        }
        hash ^= 0x1f;
        hash *= 0x100000001b3ULL;
    };
    mix(bundle.system_text);
    mix(bundle.user_text);
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(hash));
    return buffer;
}

std::string ExchangeRecord::to_json() const {
    json doc;
    doc["request_id"] = request_id;
    doc["endpoint"] = endpoint;
    doc["prompt_digest"] = prompt_digest;
    doc["request_body"] = request_body;
    doc["response_body"] = response_body;
    doc["response_text"] = response_text;
    doc["status"] = status;
    doc["latency_ms"] = latency_ms;
    doc["attempt_count"] = attempt_count;
    doc["timestamp"] = timestamp;
    return doc.dump(2) + "\n";
}

ExchangeRecord ExchangeRecord::from_json(const std::string& text) {
    json doc = json::parse(text);
    ExchangeRecord record;
    record.request_id = doc.at("request_id").get<std::string>();
    record.endpoint = doc.at("endpoint").get<std::string>();
    record.prompt_digest = doc.at("prompt_digest").get<std::string>();
    record.request_body = doc.at("request_body").get<std::string>();
    record.response_body = doc.at("response_body").get<std::string>();
    record.response_text = doc.at("response_text").get<std::string>();
    record.status = doc.at("status").get<int>();
    record.latency_ms = doc.at("latency_ms").get<long>();
    record.attempt_count = doc.at("attempt_count").get<int>();
    record.timestamp = doc.at("timestamp").get<std::string>();
    return record;
}

LlmGateway::LlmGateway(ModelEndpoint endpoint, std::optional<std::string> record_dir,
                       std::optional<std::string> replay_dir)
    : endpoint_(std::move(endpoint)),
      record_dir_(std::move(record_dir)),
      replay_dir_(std::move(replay_dir)) {
    endpoint_.validate();
    if (record_dir_) {
        std::filesystem::create_directories(*record_dir_);
    }
}

void LlmGateway::admit() {
    const auto window = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(endpoint_.rate_window_s));
    std::unique_lock lock(mutex_);
    for (;;) {
        const auto now = std::chrono::steady_clock::now();
        while (!issue_times_.empty() && issue_times_.front() + window <= now) {
            issue_times_.pop_front();
        }
        if (in_flight_ < endpoint_.max_concurrent &&
            issue_times_.size() <
                static_cast<std::size_t>(endpoint_.requests_per_minute)) {
            issue_times_.push_back(now);
            ++in_flight_;
            return;
        }
        if (issue_times_.size() >=
            static_cast<std::size_t>(endpoint_.requests_per_minute)) {
            cv_.wait_until(lock, issue_times_.front() + window);
        } else {
            cv_.wait(lock);
        }
    }
}

void LlmGateway::release() {
    {
        std::lock_guard lock(mutex_);
        --in_flight_;
    }
    cv_.notify_all();
}

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t seconds = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&seconds, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

std::string extract_assistant_text(const std::string& body) {
    json doc = json::parse(body, nullptr, false);
    if (!doc.is_discarded()) {
        // OpenAI-style chat completion shape.
        if (doc.contains("choices") && doc["choices"].is_array() &&
            !doc["choices"].empty()) {
            const auto& choice = doc["choices"][0];
            if (choice.contains("message") && choice["message"].contains("content")) {
                return choice["message"]["content"].get<std::string>();
            }
            if (choice.contains("text")) {
                return choice["text"].get<std::string>();
            }
        }
        if (doc.contains("content") && doc["content"].is_string()) {
            return doc["content"].get<std::string>();
        }
    }
    return body;  // plain-text endpoints
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

std::pair<std::string, ExchangeRecord> LlmGateway::complete(
    const PromptBundle& bundle, const std::string& request_id) {
    ExchangeRecord record;
    record.request_id = request_id;
    record.endpoint = endpoint_.base_url + endpoint_.path + "#" + endpoint_.model_name;
    record.prompt_digest = prompt_digest(bundle);
    record.timestamp = utc_timestamp();

    if (replay_dir_) {
        const std::string path = *replay_dir_ + "/" + request_id + ".json";
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw Error(ErrorKind::ReplayMiss, path);
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();
        ExchangeRecord replayed = ExchangeRecord::from_json(buffer.str());
        if (replayed.prompt_digest != record.prompt_digest) {
            throw Error(ErrorKind::ReplayMiss,
                        request_id + ": prompt digest mismatch (recorded " +
                            replayed.prompt_digest + ", built " +
                            record.prompt_digest + ")");
        }
        return {replayed.response_text, replayed};
    }

    std::string api_key;
    if (!endpoint_.api_key_env.empty()) {
        const char* value = std::getenv(endpoint_.api_key_env.c_str());
        if (value == nullptr || *value == '\0') {
            throw Error(ErrorKind::AuthError,
                        "environment variable " + endpoint_.api_key_env + " not set");
        }
        api_key = value;
    }

    json request;
    request["model"] = endpoint_.model_name;
    request["messages"] = {{{"role", "system"}, {"content", bundle.system_text}},
                           {{"role", "user"}, {"content", bundle.user_text}}};
    record.request_body = request.dump();

    const auto start = std::chrono::steady_clock::now();
    std::string last_failure = "no attempt made";
    bool last_was_timeout = false;
    bool last_was_rate_limit = false;

    for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
        if (attempt > 0) {
            const double delay_ms =
                endpoint_.backoff_initial_ms * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay_ms));
        }

        admit();
        httplib::Client client(endpoint_.base_url);
        client.set_connection_timeout(std::chrono::duration<double>(endpoint_.timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(endpoint_.timeout_s));
        httplib::Headers headers;
        if (!api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + api_key);
        }
        auto result = client.Post(endpoint_.path, headers, record.request_body,
                                  "application/json");
        release();

        ++record.attempt_count;
        record.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - start)
                                .count();

        if (!result) {
            last_failure = httplib::to_string(result.error());
            last_was_timeout = true;
            last_was_rate_limit = false;
            continue;
        }
        record.status = result->status;
        record.response_body = result->body;

        if (result->status == 200) {
            record.response_text = extract_assistant_text(result->body);
            if (record_dir_) {
                std::ofstream out(*record_dir_ + "/" + request_id + ".json",
                                  std::ios::binary);
                out << record.to_json();
            }
            return {record.response_text, record};
        }
        if (result->status == 401 || result->status == 403) {
            throw Error(ErrorKind::AuthError,
                        "HTTP " + std::to_string(result->status) + " from " +
                            endpoint_.base_url);
        }
        if (!retryable_status(result->status)) {
            throw Error(ErrorKind::ProtocolError,
                        "HTTP " + std::to_string(result->status) + ": " +
                            result->body.substr(0, 200));
        }
        last_failure = "HTTP " + std::to_string(result->status);
        last_was_rate_limit = result->status == 429;
        last_was_timeout = false;
    }

    if (last_was_rate_limit) {
        throw Error(ErrorKind::RateLimitedExhausted, last_failure);
    }
    if (last_was_timeout) {
        throw Error(ErrorKind::TimeoutExhausted, last_failure);
    }
    throw Error(ErrorKind::ProtocolError, last_failure);
}

}  // namespace ados
