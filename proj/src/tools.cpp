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

#include "agentry/tools.hpp"

#include <future>
#include <thread>

#include "agentry/error.hpp"
#include "agentry/text.hpp"

namespace agentry {

Tool::Tool(ToolDescriptor descriptor, ToolFn fn)
    : descriptor_(std::move(descriptor)), fn_(std::make_shared<const ToolFn>(std::move(fn))) {
  if (descriptor_.name.empty()) fail(ErrorKind::InvalidConfig, "tool without a name");
  if (descriptor_.description.empty()) {
    fail(ErrorKind::InvalidConfig, "tool '" + descriptor_.name + "' has an empty description");
  }
  if (descriptor_.exclusive) exclusive_mu_ = std::make_shared<std::mutex>();
}

Tool Tool::simple(ToolDescriptor descriptor, std::function<std::string(const ToolInput&)> fn) {
  return Tool(std::move(descriptor), [fn = std::move(fn)](const ToolInput& in) {
    return ToolResult::success({}, fn(in));
  });
}

ToolResult Tool::call(const ToolInput& input) const {
  if (exclusive_mu_) {
    std::lock_guard lock(*exclusive_mu_);
    return (*fn_)(input);
  }
  return (*fn_)(input);
}

ToolRegistry& ToolRegistry::register_tool(Tool tool) {
  if (contains(tool.name())) fail(ErrorKind::DuplicateTool, tool.name());
  tools_.push_back(std::move(tool));
  return *this;
}

ToolRegistry& ToolRegistry::register_tool(ToolDescriptor descriptor,
                                          std::function<std::string(const ToolInput&)> fn) {
  return register_tool(Tool::simple(std::move(descriptor), std::move(fn)));
}

bool ToolRegistry::contains(std::string_view name) const {
  for (const auto& t : tools_) {
    if (t.name() == name) return true;
  }
  return false;
}

const Tool& ToolRegistry::get(std::string_view name) const {
  for (const auto& t : tools_) {
    if (t.name() == name) return t;
  }
  fail(ErrorKind::UnknownTool, std::string(name));
}

std::vector<std::string> ToolRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& t : tools_) out.push_back(t.name());
  return out;
}

std::vector<ToolDescriptor> ToolRegistry::descriptors() const {
  std::vector<ToolDescriptor> out;
  for (const auto& t : tools_) out.push_back(t.descriptor());
  return out;
}

std::string ToolRegistry::render_descriptions() const {
  std::string out;
  for (const auto& t : tools_) {
    if (!out.empty()) out += '\n';
    out += t.name() + ": " + t.descriptor().description;
  }
  return out;
}

ToolResult ToolRegistry::invoke(const ToolCall& call, const ToolBudget& budget) const {
  const Tool& tool = get(call.tool_name);

  // The worker owns copies of everything it touches, so a timed-out call can
  // keep running detached without dangling references.
  auto promise = std::make_shared<std::promise<ToolResult>>();
  auto future = promise->get_future();
  std::thread([promise, tool, input = call.input]() {
    try {
      promise->set_value(tool.call(input));
    } catch (const std::exception& e) {
      promise->set_value(ToolResult::failure({}, e.what()));
    } catch (...) {
      promise->set_value(ToolResult::failure({}, "unknown tool failure"));
    }
  }).detach();

  ToolResult result;
  if (future.wait_for(budget.timeout) == std::future_status::timeout) {
    result = ToolResult::failure({}, "timeout");
  } else {
    result = future.get();
  }
  result.call_id = call.call_id;
  if (result.ok) {
    result.error.reset();
    result.output = truncate_utf8(result.output, budget.max_output);
  } else if (!result.error) {
    result.error = "tool failed";
  }
  return result;
}

ToolInput tool_input_from_arguments(const ToolDescriptor& descriptor, const std::string& arguments) {
  nlohmann::json parsed = nlohmann::json::parse(arguments, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) return ToolInput::raw(arguments);
  ToolInput in;
  in.args = parsed;
  in.text = arguments;
  const nlohmann::json* single = nullptr;
  if (parsed.size() == 1 && parsed.begin()->is_string()) single = &*parsed.begin();
  if (!single && parsed.contains("input") && parsed["input"].is_string()) single = &parsed["input"];
  if (descriptor.accepts_raw_input && single) in.text = single->get<std::string>();
  return in;
}

}  // namespace agentry
