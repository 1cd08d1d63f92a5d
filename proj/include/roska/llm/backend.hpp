#pragma once

#include <cstdlib>
#include <memory>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "roska/dsl/mutate.hpp"
#include "roska/dsl/parse.hpp"
#include "roska/llm/prompt.hpp"

#include "httplib.h"
#include "nlohmann/json.hpp"

namespace roska::llm {

/// Deterministic generator: round-1 candidates instantiate programs from a
/// per-environment template pool; later rounds mutate the incumbent best.
struct MockBackend {
    std::uint64_t seed = 0;
    std::vector<std::string> feature_pool;
    std::vector<dsl::RewardProgram> template_pool;
    double mutation_strength = 0.35;
};

/// Generic chat-completion HTTP endpoint. The API key is read from the named
/// environment variable and never logged.
struct HttpBackend {
    std::string endpoint_url;
    std::string model_name = "gpt-4o";
    std::string api_key_env_var;
    double temperature = 1.0;
    int max_retries = 2;
    double timeout_s = 30.0;
    bool fallback_to_mock = true;
    MockBackend fallback;  // used after retries are exhausted
    int fan_out = 4;       // bounded concurrent requests per batch
};

using GeneratorBackend = std::variant<MockBackend, HttpBackend>;

struct Candidate {
    dsl::RewardProgram program;
    enum class Origin { mock, http, fallback } origin = Origin::mock;
    std::string raw_response;  // http/fallback: last response body, for audit
};

struct GenerationResult {
    std::string prompt;  // shared by every candidate request of the batch
    std::vector<Candidate> candidates;
};

/// Template pools mirror the component vocabulary each environment's rewards
/// evolve around, so offline runs exercise the full loop.
inline MockBackend mock_backend_for_env(const env::EnvSpec& spec, std::uint64_t seed) {
    MockBackend mock;
    mock.seed = seed;
    mock.feature_pool = spec.feature_names;
    std::vector<std::string> sources;
    if (spec.name == "point-runner") {
        sources = {
            "component forward_velocity_rew { temp = 1 expr = forward_velocity weight = 2 "
            "transform = identity }\n"
            "component heading_rew { temp = 0.5 expr = 1 - heading_alignment weight = 1 }\n"
            "component action_penalty { temp = 1 expr = action_cost weight = -0.1 "
            "transform = identity }",
            "component progress_rew { temp = 1 expr = progress weight = 20 "
            "transform = identity }\n"
            "component lateral_penalty { temp = 1 expr = lateral_speed weight = -0.2 "
            "transform = identity }",
            "component speed_rew { temp = 2 expr = max(0, 8 - forward_velocity) weight = 3 }\n"
            "component upright_rew { temp = 0.5 expr = abs(lateral_speed) weight = 0.5 }",
            "component forward_velocity_rew { temp = 1 expr = forward_velocity weight = 1.5 "
            "transform = identity }\n"
            "component progress_rew { temp = 1 expr = progress weight = 5 "
            "transform = identity }\n"
            "component action_penalty { temp = 1 expr = action_cost weight = -0.05 "
            "transform = identity }",
        };
    } else if (spec.name == "rotator") {
        sources = {
            "component orientation_diff_rew { temp = 1 expr = orientation_diff weight = 4 }\n"
            "component orientation_decrease_rew { temp = 1 expr = orientation_diff_decrease "
            "weight = 40 transform = identity }\n"
            "component action_penalty { temp = 1 expr = action_cost weight = -0.05 "
            "transform = identity }",
            "component orientation_diff_rew { temp = 0.3 expr = orientation_diff weight = 4 }\n"
            "component angvel_penalty { temp = 0.5 expr = abs_angvel weight = -0.2 "
            "transform = identity }",
            "component orientation_diff_rew { temp = 0.1 expr = orientation_diff weight = 4 }\n"
            "component angvel_penalty_rew { temp = 0.1 expr = abs_angvel weight = -2 }\n"
            "component orientation_diff_decrease_rew { temp = 0.1 expr = orientation_diff "
            "weight = 2 }",
            "component approach_rew { temp = 1 expr = orientation_diff_decrease weight = 30 "
            "transform = identity }\n"
            "component hold_rew { temp = 1 expr = success weight = 2 transform = identity }",
        };
    } else if (spec.name == "latch-puller") {
        sources = {
            "component drawer_progress_rew { temp = 1 expr = drawer_progress weight = 40 "
            "transform = identity }\n"
            "component grip_rew { temp = 0.3 expr = grip_distance weight = 1 }\n"
            "component action_penalty { temp = 1 expr = action_cost weight = -0.05 "
            "transform = identity }",
            "component open_rew { temp = 1 expr = open_success weight = 5 "
            "transform = identity }\n"
            "component grip_rew { temp = 1 expr = grip_closeness weight = 1 "
            "transform = identity }\n"
            "component drawer_pos_rew { temp = 1 expr = drawer_pos weight = 4 "
            "transform = identity }",
            "component drawer_pos_rew { temp = 0.2 expr = 0.5 - drawer_pos weight = 4 }\n"
            "component grip_rew { temp = 0.2 expr = grip_distance weight = 2 }",
            "component pull_rew { temp = 1 expr = drawer_progress weight = 25 "
            "transform = identity }\n"
            "component reach_rew { temp = 0.5 expr = grip_distance weight = 2 }\n"
            "component hold_open_rew { temp = 1 expr = open_success weight = 1 "
            "transform = identity }",
        };
    } else {
        // Unknown env: a single identity component on the first feature.
        sources = {"component f0 { temp = 1 expr = " + spec.feature_names.front() +
                   " weight = 1 transform = identity }"};
    }
    for (const auto& src : sources) mock.template_pool.push_back(dsl::parse(src));
    return mock;
}

/// First fenced code block (``` ... ```); the fence tag line is skipped.
/// Returns an empty string when no complete fence is present.
inline std::string extract_fenced_block(const std::string& text) {
    const std::size_t open = text.find("```");
    if (open == std::string::npos) return "";
    std::size_t body = text.find('\n', open);
    if (body == std::string::npos) return "";
    ++body;
    const std::size_t close = text.find("```", body);
    if (close == std::string::npos) return "";
    return text.substr(body, close - body);
}

namespace detail {

inline Candidate mock_candidate(const PromptContext& ctx, const MockBackend& mock, int index,
                                std::uint64_t batch_key, Candidate::Origin origin) {
    Candidate out;
    out.origin = origin;
    const std::uint64_t key =
        RngStream::derive(mock.seed, {stream::kGenerate, batch_key,
                                      static_cast<std::uint64_t>(index)});
    if (ctx.best_program) {
        out.program = dsl::mutate(*ctx.best_program, key, mock.feature_pool,
                                  mock.mutation_strength);
    } else {
        const std::size_t pool = mock.template_pool.size();
        out.program = mock.template_pool[static_cast<std::size_t>(index) % pool];
        if (static_cast<std::size_t>(index) >= pool)
            out.program = dsl::mutate(out.program, key, mock.feature_pool,
                                      mock.mutation_strength);
    }
    // Regenerate with shifted keys if the draw somehow left the feature set.
    for (int retry = 0; retry < 5 && !dsl::valid_for_features(out.program, ctx.feature_names);
         ++retry) {
        out.program = dsl::mutate(ctx.best_program ? *ctx.best_program
                                                   : mock.template_pool.front(),
                                  RngStream::derive(key, {static_cast<std::uint64_t>(retry) + 1}),
                                  mock.feature_pool, mock.mutation_strength);
    }
    return out;
}

struct UrlParts {
    std::string base;  // scheme://host[:port]
    std::string path;
};

inline UrlParts split_url(const std::string& url) {
    UrlParts parts;
    const std::size_t scheme = url.find("://");
    const std::size_t authority = scheme == std::string::npos ? 0 : scheme + 3;
    const std::size_t slash = url.find('/', authority);
    if (slash == std::string::npos) {
        parts.base = url;
        parts.path = "/";
    } else {
        parts.base = url.substr(0, slash);
        parts.path = url.substr(slash);
    }
    return parts;
}

/// One chat-completion request; returns the parsed program or throws.
inline Candidate http_candidate(const PromptContext& ctx, const HttpBackend& http,
                                const std::string& prompt) {
    const UrlParts url = split_url(http.endpoint_url);
    httplib::Client client(url.base);
    const auto seconds = static_cast<time_t>(http.timeout_s);
    const auto micros = static_cast<time_t>((http.timeout_s - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);

    httplib::Headers headers;
    if (!http.api_key_env_var.empty()) {
        if (const char* key = std::getenv(http.api_key_env_var.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    nlohmann::json request = {
        {"model", http.model_name},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", http.temperature},
    };

    auto res = client.Post(url.path, headers, request.dump(), "application/json");
    if (!res) throw BackendUnavailable("no response from " + http.endpoint_url);
    if (res->status != 200)
        throw BackendUnavailable("endpoint returned status " + std::to_string(res->status));

    Candidate out;
    out.origin = Candidate::Origin::http;
    out.raw_response = res->body;
    const nlohmann::json reply = nlohmann::json::parse(res->body);
    const std::string content =
        reply.at("choices").at(0).at("message").at("content").get<std::string>();
    const std::string block = extract_fenced_block(content);
    if (block.empty()) throw ParseError(1, 1, "response contains no fenced code block");
    out.program = dsl::parse(block);
    dsl::validate_against_features(out.program, ctx.feature_names);
    return out;
}

}  // namespace detail

/// Produces k valid reward programs for the context. Mock generation is pure
/// and deterministic in (ctx, k, batch_key). Http issues one request per
/// candidate with bounded fan-out; a candidate whose retries are exhausted
/// falls back to a mock mutation flagged `fallback`, or the whole batch throws
/// BackendUnavailable when fallback is disabled.
inline GenerationResult generate_candidates(const PromptContext& ctx, int k,
                                            const GeneratorBackend& backend,
                                            std::uint64_t batch_key) {
    if (k < 1) throw Error("generate_candidates requires k >= 1");
    GenerationResult result;
    result.prompt = ctx.best_program ? build_feedback_prompt(ctx) : build_initial_prompt(ctx);
    result.candidates.resize(static_cast<std::size_t>(k));

    if (const auto* mock = std::get_if<MockBackend>(&backend)) {
        if (mock->template_pool.empty() || mock->feature_pool.empty())
            throw Error("mock backend requires non-empty template and feature pools");
        for (int i = 0; i < k; ++i)
            result.candidates[static_cast<std::size_t>(i)] =
                detail::mock_candidate(ctx, *mock, i, batch_key, Candidate::Origin::mock);
        return result;
    }

    const auto& http = std::get<HttpBackend>(backend);
    auto fetch_one = [&](int index) {
        for (int attempt = 0; attempt <= http.max_retries; ++attempt) {
            try {
                result.candidates[static_cast<std::size_t>(index)] =
                    detail::http_candidate(ctx, http, result.prompt);
                return;
            } catch (const std::exception&) {
                // retry, then fall back below
            }
        }
        if (!http.fallback_to_mock)
            throw BackendUnavailable("candidate " + std::to_string(index) +
                                     ": retries exhausted and fallback disabled");
        result.candidates[static_cast<std::size_t>(index)] = detail::mock_candidate(
            ctx, http.fallback, index, batch_key, Candidate::Origin::fallback);
    };

    const int fan_out = std::max(1, std::min(http.fan_out, k));
    if (fan_out == 1) {
        for (int i = 0; i < k; ++i) fetch_one(i);
    } else {
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(fan_out));
        for (int w = 0; w < fan_out; ++w) {
            workers.emplace_back([&, w] {
                try {
                    for (int i = w; i < k; i += fan_out) fetch_one(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& t : workers) t.join();
        for (const auto& err : errors)
            if (err) std::rethrow_exception(err);
    }
    return result;
}

}  // namespace roska::llm
