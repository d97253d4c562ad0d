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

#include "agentry/runtime.hpp"

#include "agentry/builtin_tools.hpp"

namespace agentry {

Tool agent_as_tool(std::shared_ptr<AgentInstance> child) {
  ToolDescriptor d;
  d.name = child->config().name;
  d.description = child->config().description;
  d.accepts_raw_input = true;
  d.exclusive = true;
  return Tool(std::move(d), [child](const ToolInput& input) {
    EpisodeTrace trace = child->run(input.text);
    ToolResult r;
    if (trace.ok()) {
      r = ToolResult::success({}, trace.answer);
    } else {
      r = ToolResult::failure(
          {}, std::string(to_string(trace.error->kind)) + ": " + trace.error->message);
    }
    r.usage = trace.usage;
    r.llm_calls = trace.llm_calls;
    return r;
  });
}

namespace {

void check_model(const BackendRegistry& backends, const ModelSpec& spec) {
  if (!backends.has_backend(spec.model_name)) fail(ErrorKind::UnknownBackend, spec.model_name);
}

std::shared_ptr<AgentInstance> assemble(const AgentConfig& config,
                                        const std::shared_ptr<const BackendRegistry>& backends,
                                        const AssemblyOptions& options, std::size_t depth) {
  if (depth > options.max_depth) {
    fail(ErrorKind::DepthLimitExceeded,
         config.name + " nested deeper than " + std::to_string(options.max_depth));
  }
  check_model(*backends, config.llm);
  if (config.solver_llm) check_model(*backends, *config.solver_llm);
  if (config.memory && config.memory->embedder == EmbedderKind::Api) {
    fail(ErrorKind::InvalidConfig, config.name + ": memory.embedder 'api' is not available");
  }

  ToolRegistry tools;
  for (const auto& plugin : config.plugins) {
    switch (plugin.kind) {
      case PluginKind::BuiltinTool: {
        auto extra = std::find_if(options.extra_tools.begin(), options.extra_tools.end(),
                                  [&](const Tool& t) { return t.name() == plugin.name; });
        if (extra != options.extra_tools.end()) {
          tools.register_tool(*extra);
        } else if (is_builtin_tool(plugin.name)) {
          tools.register_tool(make_builtin_tool(plugin.name, options.tool_env));
        } else {
          fail(ErrorKind::UnknownTool, plugin.name);
        }
        break;
      }
      case PluginKind::CustomTool:
        if (!plugin.custom) fail(ErrorKind::AssemblyError, plugin.name + ": missing definition");
        tools.register_tool(make_custom_tool(*plugin.custom, options.tool_env));
        break;
      case PluginKind::SubAgent:
        if (!plugin.agent) fail(ErrorKind::AssemblyError, plugin.name + ": missing child config");
        tools.register_tool(agent_as_tool(assemble(*plugin.agent, backends, options, depth + 1)));
        break;
    }
  }
  return make_agent_instance(config, backends, std::move(tools), options.runtime);
}

}  // namespace

std::shared_ptr<AgentInstance> assemble_agent(const AgentConfig& config,
                                              std::shared_ptr<const BackendRegistry> backends,
                                              const AssemblyOptions& options) {
  if (!backends) fail(ErrorKind::AssemblyError, "no backend registry");
  return assemble(config, backends, options, 0);
}

}  // namespace agentry
