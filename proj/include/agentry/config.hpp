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

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "agentry/builtin_tools.hpp"
#include "agentry/llm.hpp"
#include "agentry/memory.hpp"
#include "agentry/prompt.hpp"

namespace agentry {

struct AgentConfig;

enum class PluginKind { BuiltinTool, CustomTool, SubAgent };
std::string_view to_string(PluginKind kind) noexcept;

struct PluginSpec {
  PluginKind kind = PluginKind::BuiltinTool;
  std::string name;
  // Provenance: registry key, "tool.yaml#name", or the included path.
  // Not part of equality; tag resolution is one-way.
  std::string source;
  std::optional<CustomToolDef> custom;        // CustomTool
  std::shared_ptr<const AgentConfig> agent;   // SubAgent

  bool operator==(const PluginSpec& other) const;
};

struct AgentConfig {
  std::string name;
  std::string version;
  AgentType agent_type = AgentType::Vanilla;
  std::string description;
  std::vector<std::string> target_tasks;
  ModelSpec llm;                      // ReWOO: the planner
  std::optional<ModelSpec> solver_llm;  // ReWOO only; defaults to llm
  std::optional<PromptTemplate> prompt_template;
  std::optional<PromptTemplate> solver_prompt_template;
  std::vector<PluginSpec> plugins;
  std::optional<MemoryConfig> memory;
  std::optional<int> max_steps;

  std::filesystem::path source_path;  // where it was loaded from; not compared

  bool operator==(const AgentConfig& other) const;
};

using EnvMap = std::map<std::string, std::string, std::less<>>;
// Snapshot of the process environment.
EnvMap process_env();

struct ParseOptions {
  std::size_t max_include_depth = 8;
};

enum class ConfigTag { Prompt, Tool, Include, File, Env };
std::string_view to_string(ConfigTag tag) noexcept;
std::optional<ConfigTag> config_tag_from_yaml(std::string_view yaml_tag);

// State for resolving tags inside one document.
struct TagContext {
  std::filesystem::path base_dir;
  const EnvMap* env = nullptr;
  std::vector<std::filesystem::path> include_stack;  // canonical, outermost first
  ParseOptions options;
  std::size_t depth = 0;  // include levels below the root document
};

using ResolvedValue =
    std::variant<std::string, PromptTemplate, PluginSpec, std::shared_ptr<const AgentConfig>>;

// prompt -> PromptTemplate (from prompt.yaml), tool -> CustomTool PluginSpec
// (from tool.yaml), include -> child AgentConfig, file -> file text,
// env -> variable value.
ResolvedValue resolve_tag(ConfigTag tag, std::string_view argument, TagContext& context);

AgentConfig parse_agent_config(std::string_view document, const std::filesystem::path& base_dir,
                               const EnvMap& env, const ParseOptions& options = {});
AgentConfig load_agent_config(const std::filesystem::path& path, const EnvMap& env,
                              const ParseOptions& options = {});

// A standalone `{model_name, params, cost_per_1k, ...}` mapping, as used by
// eval and filter configs. `!env` and `!file` are resolved.
ModelSpec parse_model_spec(std::string_view yaml_mapping, const std::filesystem::path& base_dir,
                           const EnvMap& env);

// Canonical YAML with every tag already resolved; parse_agent_config of the
// result compares equal to `config`.
std::string to_canonical_yaml(const AgentConfig& config);

inline constexpr const char* kPromptCompanionFile = "prompt.yaml";
inline constexpr const char* kToolCompanionFile = "tool.yaml";

}  // namespace agentry
