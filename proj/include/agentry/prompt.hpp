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
#include <set>
#include <string>
#include <string_view>

namespace agentry {

enum class AgentType { Vanilla, OpenAI, OpenAIMemory, ReAct, ReWOO };

std::string_view to_string(AgentType type) noexcept;
// Accepts the canonical spellings (vanilla, openai, openai_memory, react,
// rewoo) case-insensitively. Throws UnknownAgentType.
AgentType agent_type_from_string(std::string_view s);

// `{name}` placeholders with `{{` / `}}` escapes. A template is valid when
// the placeholders it contains are exactly `input_variables`.
struct PromptTemplate {
  std::string name;
  std::string template_text;
  std::set<std::string> input_variables;
  std::string description;

  // Builds a template whose input_variables are derived from the text.
  static PromptTemplate from_text(std::string text, std::string name = {});
  // Throws InvalidConfig if declared variables differ from the placeholders.
  void validate() const;
  bool operator==(const PromptTemplate&) const = default;
};

// Throws SyntaxError on an unbalanced brace or a malformed placeholder name.
std::set<std::string> extract_placeholders(std::string_view text);

using Bindings = std::map<std::string, std::string, std::less<>>;

enum class RenderMode { Strict, Lenient };
// Strict rejects bindings the template does not use (UnknownBinding).
std::string render(const PromptTemplate& prompt, const Bindings& bindings,
                   RenderMode mode = RenderMode::Strict);

// Built-in per-type templates. ReWOO has two (planner and solver).
PromptTemplate default_template(AgentType type);
PromptTemplate default_rewoo_solver_template();
PromptTemplate default_template(std::string_view type_name);

// Escapes braces so `text` renders literally.
std::string escape_braces(std::string_view text);

// Companion prompt file: `prompts: [{name, input_variables, body, description?}]`.
std::map<std::string, PromptTemplate> load_prompt_file(const std::filesystem::path& path);

}  // namespace agentry
