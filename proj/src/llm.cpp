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

#include "agentry/llm.hpp"

#include <algorithm>

#include <yaml-cpp/yaml.h>

#include "agentry/error.hpp"
#include "agentry/text.hpp"

namespace agentry {

void ModelSpec::validate() const {
  if (model_name.empty()) fail(ErrorKind::MissingField, "llm.model_name");
  if (params.temperature < 0.0) {
    fail(ErrorKind::InvalidConfig, "temperature must be >= 0 for " + model_name);
  }
  if (params.max_tokens < 1) {
    fail(ErrorKind::InvalidConfig, "max_tokens must be >= 1 for " + model_name);
  }
}

double compute_cost(const TokenUsage& usage, const std::optional<CostPer1k>& table) {
  if (!table) return 0.0;
  return static_cast<double>(usage.prompt_tokens) / 1000.0 * table->prompt +
         static_cast<double>(usage.completion_tokens) / 1000.0 * table->completion;
}

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
  }
  return "user";
}

Role role_from_string(std::string_view s) {
  if (s == "system") return Role::System;
  if (s == "user") return Role::User;
  if (s == "assistant") return Role::Assistant;
  if (s == "tool") return Role::Tool;
  fail(ErrorKind::InvalidInput, "unknown role '" + std::string(s) + "'");
}

std::string_view to_string(FinishReason reason) noexcept {
  switch (reason) {
    case FinishReason::Stop: return "stop";
    case FinishReason::ToolCalls: return "tool_calls";
    case FinishReason::Length: return "length";
    case FinishReason::Error: return "error";
  }
  return "error";
}

nlohmann::json tool_parameters_schema(const ToolDescriptor& descriptor) {
  nlohmann::json props = nlohmann::json::object();
  nlohmann::json required = nlohmann::json::array();
  if (descriptor.arg_schema.empty()) {
    props["input"] = {{"type", "string"}, {"description", "Input text for the tool."}};
    required.push_back("input");
  }
  for (const auto& arg : descriptor.arg_schema) {
    props[arg.name] = {{"type", arg.type}, {"description", arg.description}};
    if (arg.required) required.push_back(arg.name);
  }
  return {{"type", "object"}, {"properties", props}, {"required", required}};
}

void CompletionRequest::validate() const {
  if (messages.empty()) fail(ErrorKind::InvalidInput, "completion request has no messages");
  for (std::size_t i = 1; i < messages.size(); ++i) {
    if (messages[i].role == Role::Assistant && messages[i - 1].role == Role::Assistant) {
      fail(ErrorKind::InvalidInput, "two consecutive assistant messages at index " +
                                         std::to_string(i));
    }
  }
}

std::int64_t count_request_units(const CompletionRequest& request) {
  std::int64_t n = 0;
  for (const auto& m : request.messages) {
    n += static_cast<std::int64_t>(count_units(m.content));
    for (const auto& call : m.tool_calls) {
      n += static_cast<std::int64_t>(count_units(call.tool_name) + count_units(call.arguments));
    }
  }
  return n;
}

CompletionResponse Backend::stream_complete(const CompletionRequest& request,
                                            const ChunkSink& sink) {
  CompletionResponse response = complete(request);
  if (!response.content.empty()) sink(response.content);
  return response;
}

bool glob_match(std::string_view pattern, std::string_view text) noexcept {
  // Iterative wildcard match with single-star backtracking.
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (p < pattern.size() && pattern[p] == text[t]) {
      ++p;
      ++t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

BackendRegistry& BackendRegistry::register_backend(std::string pattern,
                                                   std::shared_ptr<Backend> backend) {
  if (pattern.empty() || !backend) fail(ErrorKind::InvalidInput, "empty backend registration");
  for (const auto& [existing, _] : entries_) {
    if (existing == pattern) fail(ErrorKind::DuplicateRegistration, pattern);
  }
  entries_.emplace_back(std::move(pattern), std::move(backend));
  return *this;
}

void BackendRegistry::set_cost_table(std::map<std::string, CostPer1k> table) {
  cost_table_ = std::move(table);
}

std::shared_ptr<Backend> BackendRegistry::resolve(std::string_view model_name) const {
  const std::pair<std::string, std::shared_ptr<Backend>>* best = nullptr;
  for (const auto& entry : entries_) {
    if (!glob_match(entry.first, model_name)) continue;
    if (best == nullptr || entry.first.size() > best->first.size()) best = &entry;
  }
  if (best == nullptr) fail(ErrorKind::UnknownBackend, std::string(model_name));
  return best->second;
}

bool BackendRegistry::has_backend(std::string_view model_name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return glob_match(e.first, model_name); });
}

std::optional<CostPer1k> BackendRegistry::cost_for(const ModelSpec& spec) const {
  if (spec.cost_per_1k) return spec.cost_per_1k;
  auto it = cost_table_.find(spec.model_name);
  if (it != cost_table_.end()) return it->second;
  return std::nullopt;
}

void BackendRegistry::finish(CompletionResponse& response, const ModelSpec& spec) const {
  response.usage.cost = compute_cost(response.usage, cost_for(spec));
}

CompletionResponse BackendRegistry::complete(const CompletionRequest& request) const {
  request.validate();
  auto backend = resolve(request.spec.model_name);
  CompletionResponse response = backend->complete(request);
  finish(response, request.spec);
  return response;
}

CompletionResponse BackendRegistry::stream_complete(const CompletionRequest& request,
                                                    const ChunkSink& sink) const {
  request.validate();
  auto backend = resolve(request.spec.model_name);
  CompletionResponse response = backend->stream_complete(request, sink);
  finish(response, request.spec);
  return response;
}

std::map<std::string, CostPer1k> load_cost_table(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    fail(ErrorKind::FileNotFound, path);
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::SyntaxError, path + ": " + e.what());
  }
  std::map<std::string, CostPer1k> table;
  for (const auto& kv : root) {
    CostPer1k c;
    c.prompt = kv.second["prompt"].as<double>(0.0);
    c.completion = kv.second["completion"].as<double>(0.0);
    if (c.prompt < 0 || c.completion < 0) {
      fail(ErrorKind::InvalidConfig, "negative price for " + kv.first.as<std::string>());
    }
    table[kv.first.as<std::string>()] = c;
  }
  return table;
}

}  // namespace agentry
