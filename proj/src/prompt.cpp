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

#include "agentry/prompt.hpp"

#include <cctype>

#include <yaml-cpp/yaml.h>

#include "agentry/error.hpp"
#include "agentry/text.hpp"

namespace agentry {
namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Walks the template once; `on_text` receives literal runs (escapes
// collapsed) and `on_hole` each placeholder name.
template <typename Text, typename Hole>
void scan(std::string_view t, Text on_text, Hole on_hole) {
  std::size_t i = 0;
  std::size_t run = 0;
  auto flush = [&](std::size_t end) {
    if (end > run) on_text(t.substr(run, end - run));
  };
  while (i < t.size()) {
    char c = t[i];
    if (c == '{') {
      if (i + 1 < t.size() && t[i + 1] == '{') {
        flush(i);
        on_text("{");
        i += 2;
        run = i;
        continue;
      }
      std::size_t close = t.find('}', i + 1);
      if (close == std::string_view::npos) {
        fail(ErrorKind::SyntaxError, "unclosed '{' at offset " + std::to_string(i));
      }
      std::string_view name = t.substr(i + 1, close - i - 1);
      bool ok = !name.empty() && ident_start(name[0]);
      for (char n : name) ok = ok && ident_char(n);
      if (!ok) {
        fail(ErrorKind::SyntaxError, "malformed placeholder '{" + std::string(name) + "}'");
      }
      flush(i);
      on_hole(name);
      i = close + 1;
      run = i;
      continue;
    }
    if (c == '}') {
      if (i + 1 < t.size() && t[i + 1] == '}') {
        flush(i);
        on_text("}");
        i += 2;
        run = i;
        continue;
      }
      fail(ErrorKind::SyntaxError, "single '}' at offset " + std::to_string(i));
    }
    ++i;
  }
  flush(t.size());
}

}  // namespace

std::string_view to_string(AgentType type) noexcept {
  switch (type) {
    case AgentType::Vanilla: return "vanilla";
    case AgentType::OpenAI: return "openai";
    case AgentType::OpenAIMemory: return "openai_memory";
    case AgentType::ReAct: return "react";
    case AgentType::ReWOO: return "rewoo";
  }
  return "vanilla";
}

AgentType agent_type_from_string(std::string_view s) {
  std::string k = to_lower(trim(s));
  if (k == "vanilla") return AgentType::Vanilla;
  if (k == "openai") return AgentType::OpenAI;
  if (k == "openai_memory") return AgentType::OpenAIMemory;
  if (k == "react") return AgentType::ReAct;
  if (k == "rewoo") return AgentType::ReWOO;
  fail(ErrorKind::UnknownAgentType, std::string(s));
}

std::set<std::string> extract_placeholders(std::string_view text) {
  std::set<std::string> names;
  scan(text, [](std::string_view) {}, [&](std::string_view n) { names.emplace(n); });
  return names;
}

PromptTemplate PromptTemplate::from_text(std::string text, std::string name) {
  PromptTemplate p;
  p.name = std::move(name);
  p.input_variables = extract_placeholders(text);
  p.template_text = std::move(text);
  return p;
}

void PromptTemplate::validate() const {
  auto found = extract_placeholders(template_text);
  if (found == input_variables) return;
  std::string msg = "prompt '" + name + "' placeholders {";
  for (const auto& f : found) msg += f + ",";
  msg += "} != input_variables {";
  for (const auto& v : input_variables) msg += v + ",";
  msg += "}";
  fail(ErrorKind::InvalidConfig, msg);
}

std::string render(const PromptTemplate& prompt, const Bindings& bindings, RenderMode mode) {
  for (const auto& var : prompt.input_variables) {
    if (bindings.find(var) == bindings.end()) fail(ErrorKind::MissingBinding, var);
  }
  if (mode == RenderMode::Strict) {
    for (const auto& [key, _] : bindings) {
      if (prompt.input_variables.count(key) == 0) fail(ErrorKind::UnknownBinding, key);
    }
  }
  std::string out;
  out.reserve(prompt.template_text.size());
  scan(
      prompt.template_text, [&](std::string_view s) { out += s; },
      [&](std::string_view name) {
        auto it = bindings.find(name);
        if (it == bindings.end()) fail(ErrorKind::MissingBinding, std::string(name));
        out += it->second;
      });
  return out;
}

std::string escape_braces(std::string_view text) {
  std::string out;
  for (char c : text) {
    out += c;
    if (c == '{' || c == '}') out += c;
  }
  return out;
}

namespace {

constexpr const char* kVanilla = "{instruction}";

constexpr const char* kOpenAI =
    "You are a helpful assistant. Use the provided functions when they help "
    "answer the request, then reply to the user directly.\n\n{instruction}";

constexpr const char* kOpenAIMemory =
    "You are a helpful assistant with a long-term memory. Relevant notes from "
    "earlier conversation may be supplied in a system message. Use the provided "
    "functions when they help, then reply to the user directly.\n\n{instruction}";

constexpr const char* kReAct =
    "Answer the following question as best you can. You have access to the "
    "following tools:\n"
    "{tool_descriptions}\n"
    "\n"
    "Use the following format:\n"
    "\n"
    "Thought: reason about what to do next\n"
    "Action: the tool to use, one of [{tool_names}]\n"
    "Action Input: the input to the tool\n"
    "Observation: the result of the tool\n"
    "... (Thought/Action/Action Input/Observation can repeat)\n"
    "Thought: I now know the final answer\n"
    "Final Answer: the final answer to the question\n"
    "\n"
    "Begin!\n"
    "\n"
    "Question: {instruction}\n"
    "{agent_scratchpad}";

constexpr const char* kReWOOPlanner =
    "For the following task, make a plan that can solve the problem step by "
    "step. For each plan line, name one external tool together with its input. "
    "Store each result in an evidence variable #E1, #E2, ... that later tool "
    "inputs may reference.\n"
    "\n"
    "Tools can be one of the following:\n"
    "{tool_descriptions}\n"
    "\n"
    "Format:\n"
    "Plan: first step\n"
    "#E1 = tool[input]\n"
    "Plan: next step, possibly using #E1\n"
    "#E2 = tool[input referencing #E1]\n"
    "\n"
    "Task: {instruction}";

constexpr const char* kReWOOSolver =
    "Solve the following task. To help, a plan was made and evidence was "
    "collected for each step. Use the evidence with caution; it may be long or "
    "irrelevant.\n"
    "\n"
    "{plan_evidence}\n"
    "\n"
    "Task: {instruction}\n"
    "Respond with the answer only.";

}  // namespace

PromptTemplate default_template(AgentType type) {
  switch (type) {
    case AgentType::Vanilla: return PromptTemplate::from_text(kVanilla, "VanillaPrompt");
    case AgentType::OpenAI: return PromptTemplate::from_text(kOpenAI, "OpenAIPrompt");
    case AgentType::OpenAIMemory:
      return PromptTemplate::from_text(kOpenAIMemory, "OpenAIMemoryPrompt");
    case AgentType::ReAct: return PromptTemplate::from_text(kReAct, "ReActPrompt");
    case AgentType::ReWOO: return PromptTemplate::from_text(kReWOOPlanner, "ReWOOPlannerPrompt");
  }
  fail(ErrorKind::UnknownAgentType, std::to_string(static_cast<int>(type)));
}

PromptTemplate default_rewoo_solver_template() {
  return PromptTemplate::from_text(kReWOOSolver, "ReWOOSolverPrompt");
}

PromptTemplate default_template(std::string_view type_name) {
  return default_template(agent_type_from_string(type_name));
}

std::map<std::string, PromptTemplate> load_prompt_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::FileNotFound, path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::SyntaxError, path.string() + ": " + e.what());
  }
  std::map<std::string, PromptTemplate> out;
  for (const auto& node : root["prompts"]) {
    PromptTemplate p;
    if (!node["name"]) fail(ErrorKind::MissingField, path.string() + ": prompts[].name");
    if (!node["body"]) fail(ErrorKind::MissingField, path.string() + ": prompts[].body");
    p.name = node["name"].as<std::string>();
    p.template_text = node["body"].as<std::string>();
    p.description = node["description"].as<std::string>("");
    if (node["input_variables"]) {
      for (const auto& v : node["input_variables"]) p.input_variables.insert(v.as<std::string>());
    } else {
      p.input_variables = extract_placeholders(p.template_text);
    }
    p.validate();
    out[p.name] = std::move(p);
  }
  return out;
}

}  // namespace agentry
