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

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agentry/llm.hpp"

namespace agentry {

struct ToolInput {
  std::string text;                         // raw input, always present
  nlohmann::json args = nlohmann::json();  // named arguments when structured

  static ToolInput raw(std::string t) { return {std::move(t), nlohmann::json()}; }
};

struct ToolCall {
  std::string call_id;
  std::string tool_name;
  ToolInput input;
};

struct ToolResult {
  std::string call_id;
  std::string output;
  bool ok = true;
  std::optional<std::string> error;  // present iff !ok
  // Model usage spent inside the tool (sub-agents); folded into the caller.
  TokenUsage usage;
  std::int64_t llm_calls = 0;

  static ToolResult success(std::string call_id, std::string output) {
    return {std::move(call_id), std::move(output), true, std::nullopt, {}, 0};
  }
  static ToolResult failure(std::string call_id, std::string error) {
    return {std::move(call_id), {}, false, std::move(error), {}, 0};
  }
};

// Implementations return the tool output, or throw to signal failure.
// Sub-agent tools return a full ToolResult so they can report usage.
using ToolFn = std::function<ToolResult(const ToolInput&)>;

struct ToolBudget {
  std::chrono::milliseconds timeout{10000};
  std::size_t max_output = 16384;
};

class Tool {
 public:
  Tool(ToolDescriptor descriptor, ToolFn fn);
  // Wraps a plain text function.
  static Tool simple(ToolDescriptor descriptor, std::function<std::string(const ToolInput&)> fn);

  const ToolDescriptor& descriptor() const { return descriptor_; }
  const std::string& name() const { return descriptor_.name; }
  ToolResult call(const ToolInput& input) const;

 private:
  ToolDescriptor descriptor_;
  std::shared_ptr<const ToolFn> fn_;
  std::shared_ptr<std::mutex> exclusive_mu_;
};

// Ordered tool set of one agent. invoke() never lets an exception escape
// except UnknownTool; failures and timeouts come back as ok=false.
class ToolRegistry {
 public:
  ToolRegistry& register_tool(Tool tool);
  ToolRegistry& register_tool(ToolDescriptor descriptor,
                              std::function<std::string(const ToolInput&)> fn);

  bool contains(std::string_view name) const;
  const Tool& get(std::string_view name) const;
  std::vector<std::string> names() const;
  std::vector<ToolDescriptor> descriptors() const;
  bool empty() const { return tools_.empty(); }

  // "name: description" lines in registration order.
  std::string render_descriptions() const;

  ToolResult invoke(const ToolCall& call, const ToolBudget& budget = {}) const;

 private:
  std::vector<Tool> tools_;
};

// Turns model-emitted JSON arguments into a ToolInput. A JSON object with a
// single string member collapses to that string for raw-input tools;
// unparsable text passes through verbatim.
ToolInput tool_input_from_arguments(const ToolDescriptor& descriptor, const std::string& arguments);

}  // namespace agentry
