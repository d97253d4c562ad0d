/*
 * Copyright 2026 The Agentry Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace agentry {

struct CostPer1k {
  double prompt = 0.0;
  double completion = 0.0;
  bool operator==(const CostPer1k&) const = default;
};

struct ModelParams {
  double temperature = 0.0;
  int max_tokens = 1024;
  std::vector<std::string> stop;
  std::optional<std::int64_t> seed;
  bool operator==(const ModelParams&) const = default;
};

// One model as named in an agent config: `model_name` routes to a backend.
struct ModelSpec {
  std::string model_name;
  ModelParams params;
  std::optional<CostPer1k> cost_per_1k;
  // Endpoint overrides for HTTP backends; usually filled from `!env`.
  std::optional<std::string> api_base;
  std::optional<std::string> api_key;

  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  double cost = 0.0;

  TokenUsage& operator+=(const TokenUsage& o) {
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    cost += o.cost;
    return *this;
  }
  friend TokenUsage operator+(TokenUsage a, const TokenUsage& b) { return a += b; }
  bool operator==(const TokenUsage&) const = default;
};

double compute_cost(const TokenUsage& usage, const std::optional<CostPer1k>& table);

enum class Role { System, User, Assistant, Tool };
std::string_view to_string(Role role) noexcept;
Role role_from_string(std::string_view s);

// A structured call emitted by the model (chat-completions tool_calls).
struct ToolCallRequest {
  std::string call_id;
  std::string tool_name;
  std::string arguments;  // raw JSON text as produced by the model
  bool operator==(const ToolCallRequest&) const = default;
};

struct Message {
  Role role = Role::User;
  std::string content;
  std::optional<std::string> tool_result_for;  // call id, Role::Tool only
  std::vector<ToolCallRequest> tool_calls;     // Role::Assistant only
  bool operator==(const Message&) const = default;
};

struct ToolArgSpec {
  std::string name;
  std::string type = "string";
  std::string description;
  bool required = true;
  bool operator==(const ToolArgSpec&) const = default;
};

struct ToolDescriptor {
  std::string name;
  std::string description;
  bool accepts_raw_input = true;
  std::vector<ToolArgSpec> arg_schema;
  bool exclusive = false;
  bool operator==(const ToolDescriptor&) const = default;
};

// Chat-completions `parameters` JSON schema for a descriptor.
nlohmann::json tool_parameters_schema(const ToolDescriptor& descriptor);

struct CompletionRequest {
  std::vector<Message> messages;
  std::vector<ToolDescriptor> tools;
  ModelSpec spec;

  void validate() const;
};

enum class FinishReason { Stop, ToolCalls, Length, Error };
std::string_view to_string(FinishReason reason) noexcept;

struct CompletionResponse {
  std::string content;
  std::vector<ToolCallRequest> tool_calls;
  FinishReason finish_reason = FinishReason::Stop;
  TokenUsage usage;
  std::string error;  // set when finish_reason == Error
};

using ChunkSink = std::function<void(std::string_view)>;

class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
  // Streams text chunks through `sink`; the returned response carries the
  // full content. Default implementation emits complete()'s content as one chunk.
  virtual CompletionResponse stream_complete(const CompletionRequest& request,
                                             const ChunkSink& sink);
};

// Routes model names to backends by glob pattern (`*` wildcard). The longest
// matching pattern wins. Also the single place where cost is computed.
class BackendRegistry {
 public:
  BackendRegistry& register_backend(std::string pattern, std::shared_ptr<Backend> backend);
  void set_cost_table(std::map<std::string, CostPer1k> table);

  bool has_backend(std::string_view model_name) const;
  std::shared_ptr<Backend> resolve(std::string_view model_name) const;

  CompletionResponse complete(const CompletionRequest& request) const;
  CompletionResponse stream_complete(const CompletionRequest& request,
                                     const ChunkSink& sink) const;

 private:
  std::optional<CostPer1k> cost_for(const ModelSpec& spec) const;
  void finish(CompletionResponse& response, const ModelSpec& spec) const;

  std::vector<std::pair<std::string, std::shared_ptr<Backend>>> entries_;
  std::map<std::string, CostPer1k> cost_table_;
};

bool glob_match(std::string_view pattern, std::string_view text) noexcept;

// Cost table file: YAML or JSON mapping model_name -> {prompt, completion}.
std::map<std::string, CostPer1k> load_cost_table(const std::string& path);

// Prompt-side unit count of a request under the reference tokenizer.
std::int64_t count_request_units(const CompletionRequest& request);

}  // namespace agentry
