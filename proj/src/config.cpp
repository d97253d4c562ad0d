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

#include "agentry/config.hpp"

#include <set>

#include <yaml-cpp/yaml.h>

#include "agentry/error.hpp"
#include "agentry/text.hpp"

extern char** environ;

namespace agentry {
namespace fs = std::filesystem;

std::string_view to_string(PluginKind kind) noexcept {
  switch (kind) {
    case PluginKind::BuiltinTool: return "builtin";
    case PluginKind::CustomTool: return "custom";
    case PluginKind::SubAgent: return "agent";
  }
  return "builtin";
}

bool PluginSpec::operator==(const PluginSpec& other) const {
  if (kind != other.kind || name != other.name || custom != other.custom) return false;
  if (static_cast<bool>(agent) != static_cast<bool>(other.agent)) return false;
  return !agent || *agent == *other.agent;
}

bool AgentConfig::operator==(const AgentConfig& o) const {
  return name == o.name && version == o.version && agent_type == o.agent_type &&
         description == o.description && target_tasks == o.target_tasks && llm == o.llm &&
         solver_llm == o.solver_llm && prompt_template == o.prompt_template &&
         solver_prompt_template == o.solver_prompt_template && plugins == o.plugins &&
         memory == o.memory && max_steps == o.max_steps;
}

EnvMap process_env() {
  EnvMap env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return env;
}

std::string_view to_string(ConfigTag tag) noexcept {
  switch (tag) {
    case ConfigTag::Prompt: return "!prompt";
    case ConfigTag::Tool: return "!tool";
    case ConfigTag::Include: return "!include";
    case ConfigTag::File: return "!file";
    case ConfigTag::Env: return "!env";
  }
  return "!";
}

std::optional<ConfigTag> config_tag_from_yaml(std::string_view yaml_tag) {
  if (yaml_tag == "!prompt") return ConfigTag::Prompt;
  if (yaml_tag == "!tool") return ConfigTag::Tool;
  if (yaml_tag == "!include") return ConfigTag::Include;
  if (yaml_tag == "!file") return ConfigTag::File;
  if (yaml_tag == "!env") return ConfigTag::Env;
  return std::nullopt;
}

namespace {

std::string describe_chain(const std::vector<fs::path>& stack, const fs::path& next) {
  std::string out;
  for (const auto& p : stack) out += p.filename().string() + " -> ";
  out += next.filename().string();
  return out;
}

std::string describe_mark(const YAML::Mark& mark) {
  if (mark.line < 0) return {};
  return " (line " + std::to_string(mark.line + 1) + ", column " + std::to_string(mark.column + 1) + ")";
}

bool is_custom_tag(const YAML::Node& node) {
  const std::string& t = node.Tag();
  return !t.empty() && t != "?" && t != "!" && t.rfind("tag:yaml.org", 0) != 0;
}

AgentConfig parse_node(const YAML::Node& root, TagContext& ctx);

class DocumentReader {
 public:
  explicit DocumentReader(TagContext& ctx) : ctx_(ctx) {}

  // Scalar with !env / !file resolved. Any other tag is a config error here.
  std::string scalar(const YAML::Node& node, std::string_view field) {
    if (!node.IsScalar()) {
      fail(ErrorKind::InvalidConfig, std::string(field) + " must be a scalar" + describe_mark(node.Mark()));
    }
    if (is_custom_tag(node)) {
      auto tag = config_tag_from_yaml(node.Tag());
      if (tag == ConfigTag::Env || tag == ConfigTag::File) {
        return std::get<std::string>(resolve_tag(*tag, node.Scalar(), ctx_));
      }
      fail(ErrorKind::InvalidConfig, "tag " + node.Tag() + " not allowed in " + std::string(field) +
                                         describe_mark(node.Mark()));
    }
    return node.Scalar();
  }

  std::string required(const YAML::Node& map, const char* key) {
    YAML::Node n = map[key];
    if (!n || n.IsNull()) fail(ErrorKind::MissingField, key);
    return scalar(n, key);
  }

  std::string optional(const YAML::Node& map, const char* key, std::string fallback = {}) {
    YAML::Node n = map[key];
    if (!n || n.IsNull()) return fallback;
    return scalar(n, key);
  }

  template <typename T>
  T number(const YAML::Node& node, std::string_view field) {
    std::string s = scalar(node, field);
    try {
      return YAML::Node(s).as<T>();
    } catch (const YAML::Exception&) {
      fail(ErrorKind::InvalidConfig, std::string(field) + ": '" + s + "' is not a number" +
                                         describe_mark(node.Mark()));
    }
  }

  ModelSpec model_spec(const YAML::Node& node, std::string_view field) {
    if (!node.IsMap()) fail(ErrorKind::InvalidConfig, std::string(field) + " must be a mapping");
    ModelSpec spec;
    YAML::Node name = node["model_name"];
    if (!name || name.IsNull()) fail(ErrorKind::MissingField, std::string(field) + ".model_name");
    spec.model_name = scalar(name, "model_name");
    if (YAML::Node p = node["params"]; p && p.IsMap()) {
      if (p["temperature"]) spec.params.temperature = number<double>(p["temperature"], "temperature");
      if (p["max_tokens"]) spec.params.max_tokens = number<int>(p["max_tokens"], "max_tokens");
      if (p["seed"] && !p["seed"].IsNull()) spec.params.seed = number<std::int64_t>(p["seed"], "seed");
      if (YAML::Node stop = p["stop"]) {
        if (stop.IsSequence()) {
          for (const auto& s : stop) spec.params.stop.push_back(scalar(s, "stop"));
        } else {
          spec.params.stop.push_back(scalar(stop, "stop"));
        }
      }
    }
    if (YAML::Node c = node["cost_per_1k"]; c && c.IsMap()) {
      CostPer1k cost;
      if (c["prompt"]) cost.prompt = number<double>(c["prompt"], "cost_per_1k.prompt");
      if (c["completion"]) cost.completion = number<double>(c["completion"], "cost_per_1k.completion");
      spec.cost_per_1k = cost;
    }
    if (YAML::Node b = node["api_base"]; b && !b.IsNull()) spec.api_base = scalar(b, "api_base");
    if (YAML::Node k = node["api_key"]; k && !k.IsNull()) spec.api_key = scalar(k, "api_key");
    spec.validate();
    return spec;
  }

  PromptTemplate prompt(const YAML::Node& node) {
    if (node.IsScalar()) {
      if (is_custom_tag(node) && config_tag_from_yaml(node.Tag()) == ConfigTag::Prompt) {
        return std::get<PromptTemplate>(resolve_tag(ConfigTag::Prompt, node.Scalar(), ctx_));
      }
      return PromptTemplate::from_text(scalar(node, "prompt_template"));
    }
    if (!node.IsMap()) fail(ErrorKind::InvalidConfig, "prompt_template must be a string or mapping");
    PromptTemplate p;
    p.name = optional(node, "name");
    p.template_text = required(node, "template");
    p.description = optional(node, "description");
    if (YAML::Node vars = node["input_variables"]) {
      for (const auto& v : vars) p.input_variables.insert(scalar(v, "input_variables"));
    } else {
      p.input_variables = extract_placeholders(p.template_text);
    }
    p.validate();
    return p;
  }

  PluginSpec plugin(const YAML::Node& node) {
    if (node.IsScalar()) {
      if (is_custom_tag(node)) {
        auto tag = config_tag_from_yaml(node.Tag());
        if (tag == ConfigTag::Tool) return std::get<PluginSpec>(resolve_tag(*tag, node.Scalar(), ctx_));
        if (tag == ConfigTag::Include) {
          auto child = std::get<std::shared_ptr<const AgentConfig>>(
              resolve_tag(*tag, node.Scalar(), ctx_));
          return sub_agent(std::move(child), node.Scalar());
        }
      }
      std::string name = scalar(node, "plugins[]");
      return PluginSpec{PluginKind::BuiltinTool, name, name, std::nullopt, nullptr};
    }
    if (node.IsMap()) {
      if (YAML::Node b = node["builtin"]) {
        std::string name = scalar(b, "plugins[].builtin");
        return PluginSpec{PluginKind::BuiltinTool, name, name, std::nullopt, nullptr};
      }
      if (YAML::Node c = node["custom"]) {
        CustomToolDef def;
        def.name = required(c, "name");
        def.description = required(c, "description");
        for (const auto& s : c["steps"]) {
          CustomToolStep step;
          if (s["template"]) {
            step.kind = CustomToolStep::Kind::Template;
            step.argument = scalar(s["template"], "template");
          } else if (s["fetch"]) {
            step.kind = CustomToolStep::Kind::Fetch;
            step.argument = scalar(s["fetch"], "fetch");
          } else if (s["transform"]) {
            step.kind = CustomToolStep::Kind::Transform;
            step.argument = scalar(s["transform"], "transform");
          } else {
            fail(ErrorKind::InvalidConfig, "custom step must be template, fetch or transform");
          }
          def.steps.push_back(std::move(step));
        }
        std::string name = def.name;
        return PluginSpec{PluginKind::CustomTool, name, "inline", std::move(def), nullptr};
      }
      if (YAML::Node a = node["agent"]) {
        if (ctx_.depth + 1 > ctx_.options.max_include_depth) {
          fail(ErrorKind::DepthLimitExceeded, "inline sub-agent exceeds depth " +
                                                  std::to_string(ctx_.options.max_include_depth));
        }
        TagContext child_ctx = ctx_;
        child_ctx.depth = ctx_.depth + 1;
        auto child = std::make_shared<const AgentConfig>(parse_node(a, child_ctx));
        return sub_agent(std::move(child), "inline");
      }
    }
    fail(ErrorKind::InvalidConfig, "unrecognised plugin entry" + describe_mark(node.Mark()));
  }

  MemoryConfig memory(const YAML::Node& node) {
    MemoryConfig m;
    std::string embedder = optional(node, "embedder", "deterministic_hash");
    if (embedder == "deterministic_hash") {
      m.embedder = EmbedderKind::DeterministicHash;
    } else if (embedder == "api") {
      m.embedder = EmbedderKind::Api;
    } else {
      fail(ErrorKind::InvalidConfig, "unknown memory.embedder '" + embedder + "'");
    }
    if (node["dimension"]) m.dimension = number<std::size_t>(node["dimension"], "memory.dimension");
    if (node["top_k"]) m.top_k = number<std::size_t>(node["top_k"], "memory.top_k");
    if (node["context_budget"]) {
      m.context_budget = number<std::size_t>(node["context_budget"], "memory.context_budget");
    }
    if (node["threshold"] && !node["threshold"].IsNull()) {
      m.threshold = number<double>(node["threshold"], "memory.threshold");
    }
    if (node["path"] && !node["path"].IsNull()) m.path = scalar(node["path"], "memory.path");
    m.validate();
    return m;
  }

 private:
  static PluginSpec sub_agent(std::shared_ptr<const AgentConfig> child, std::string source) {
    if (child->description.empty()) {
      fail(ErrorKind::MissingField, child->name + ".description (required for sub-agents)");
    }
    std::string name = child->name;
    return PluginSpec{PluginKind::SubAgent, std::move(name), std::move(source), std::nullopt,
                      std::move(child)};
  }

  TagContext& ctx_;
};

AgentConfig parse_node(const YAML::Node& root, TagContext& ctx) {
  if (!root.IsMap()) fail(ErrorKind::SyntaxError, "agent config must be a mapping");
  DocumentReader r(ctx);
  AgentConfig c;
  c.name = r.required(root, "name");
  if (trim(c.name).empty()) fail(ErrorKind::MissingField, "name");
  c.version = r.required(root, "version");
  c.agent_type = agent_type_from_string(r.required(root, "type"));
  c.description = r.optional(root, "description");
  if (YAML::Node tasks = root["target_tasks"]) {
    for (const auto& t : tasks) c.target_tasks.push_back(r.scalar(t, "target_tasks"));
  }

  YAML::Node llm = root["llm"];
  if (!llm || llm.IsNull()) fail(ErrorKind::MissingField, "llm");
  if (llm.IsMap() && (llm["planner"] || llm["solver"])) {
    if (c.agent_type != AgentType::ReWOO) {
      fail(ErrorKind::InvalidConfig, "planner/solver llm split is only valid for rewoo agents");
    }
    if (!llm["planner"]) fail(ErrorKind::MissingField, "llm.planner");
    c.llm = r.model_spec(llm["planner"], "llm.planner");
    if (llm["solver"]) c.solver_llm = r.model_spec(llm["solver"], "llm.solver");
  } else {
    c.llm = r.model_spec(llm, "llm");
  }

  if (YAML::Node p = root["prompt_template"]; p && !p.IsNull()) {
    if (p.IsMap() && (p["planner"] || p["solver"])) {
      if (c.agent_type != AgentType::ReWOO) {
        fail(ErrorKind::InvalidConfig, "planner/solver prompts are only valid for rewoo agents");
      }
      if (p["planner"]) c.prompt_template = r.prompt(p["planner"]);
      if (p["solver"]) c.solver_prompt_template = r.prompt(p["solver"]);
    } else {
      c.prompt_template = r.prompt(p);
    }
  }

  if (YAML::Node plugins = root["plugins"]; plugins && !plugins.IsNull()) {
    if (!plugins.IsSequence()) fail(ErrorKind::InvalidConfig, "plugins must be a sequence");
    std::set<std::string> seen;
    for (const auto& n : plugins) {
      PluginSpec spec = r.plugin(n);
      if (!seen.insert(spec.name).second) {
        fail(ErrorKind::InvalidConfig, "duplicate plugin name '" + spec.name + "'");
      }
      c.plugins.push_back(std::move(spec));
    }
  }

  if (YAML::Node m = root["memory"]; m && !m.IsNull()) c.memory = r.memory(m);
  if (YAML::Node s = root["max_steps"]; s && !s.IsNull()) {
    c.max_steps = r.number<int>(s, "max_steps");
    if (*c.max_steps < 1) fail(ErrorKind::InvalidConfig, "max_steps must be >= 1");
  }
  return c;
}

YAML::Node load_yaml(std::string_view document, const std::string& origin) {
  try {
    return YAML::Load(std::string(document));
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::SyntaxError, origin + ": " + e.what());
  }
}

fs::path resolve_relative(const TagContext& ctx, std::string_view argument) {
  fs::path p(std::string(trim(argument)));
  if (p.is_relative()) p = ctx.base_dir / p;
  return p;
}

}  // namespace

ResolvedValue resolve_tag(ConfigTag tag, std::string_view argument, TagContext& ctx) {
  std::string arg(trim(argument));
  if (arg.empty()) fail(ErrorKind::InvalidConfig, std::string(to_string(tag)) + " needs an argument");
  switch (tag) {
    case ConfigTag::Env: {
      if (ctx.env) {
        auto it = ctx.env->find(arg);
        if (it != ctx.env->end()) return it->second;
      }
      fail(ErrorKind::UnresolvedEnv, arg);
    }
    case ConfigTag::File: {
      fs::path p = resolve_relative(ctx, arg);
      if (!fs::is_regular_file(p)) fail(ErrorKind::FileNotFound, p.string());
      std::string text = read_text_file(p);
      return text;
    }
    case ConfigTag::Prompt: {
      fs::path file = ctx.base_dir / kPromptCompanionFile;
      auto prompts = load_prompt_file(file);
      auto it = prompts.find(arg);
      if (it == prompts.end()) fail(ErrorKind::UnknownSymbol, arg + " not in " + file.string());
      return it->second;
    }
    case ConfigTag::Tool: {
      fs::path file = ctx.base_dir / kToolCompanionFile;
      auto tools = load_tool_file(file);
      auto it = tools.find(arg);
      if (it == tools.end()) fail(ErrorKind::UnknownSymbol, arg + " not in " + file.string());
      return PluginSpec{PluginKind::CustomTool, arg, std::string(kToolCompanionFile) + "#" + arg,
                        it->second, nullptr};
    }
    case ConfigTag::Include: {
      fs::path p = resolve_relative(ctx, arg);
      if (!fs::is_regular_file(p)) fail(ErrorKind::FileNotFound, p.string());
      fs::path canon = fs::weakly_canonical(p);
      for (const auto& seen : ctx.include_stack) {
        if (seen == canon) fail(ErrorKind::CyclicInclude, describe_chain(ctx.include_stack, canon));
      }
      if (ctx.depth + 1 > ctx.options.max_include_depth) {
        fail(ErrorKind::DepthLimitExceeded, describe_chain(ctx.include_stack, canon));
      }
      TagContext child = ctx;
      child.base_dir = canon.parent_path();
      child.include_stack.push_back(canon);
      child.depth = ctx.depth + 1;
      YAML::Node root = load_yaml(read_text_file(canon), canon.string());
      auto cfg = parse_node(root, child);
      cfg.source_path = canon;
      return std::make_shared<const AgentConfig>(std::move(cfg));
    }
  }
  fail(ErrorKind::Internal, "unhandled tag");
}

AgentConfig parse_agent_config(std::string_view document, const fs::path& base_dir,
                               const EnvMap& env, const ParseOptions& options) {
  if (!fs::is_directory(base_dir)) fail(ErrorKind::FileNotFound, base_dir.string());
  TagContext ctx{fs::weakly_canonical(fs::absolute(base_dir)), &env, {}, options, 0};
  YAML::Node root = load_yaml(document, "<document>");
  return parse_node(root, ctx);
}

AgentConfig load_agent_config(const fs::path& path, const EnvMap& env, const ParseOptions& options) {
  if (!fs::is_regular_file(path)) fail(ErrorKind::FileNotFound, path.string());
  fs::path canon = fs::weakly_canonical(fs::absolute(path));
  TagContext ctx{canon.parent_path(), &env, {canon}, options, 0};
  YAML::Node root = load_yaml(read_text_file(canon), canon.string());
  AgentConfig cfg = parse_node(root, ctx);
  cfg.source_path = canon;
  return cfg;
}

ModelSpec parse_model_spec(std::string_view yaml_mapping, const fs::path& base_dir, const EnvMap& env) {
  TagContext ctx{fs::weakly_canonical(fs::absolute(base_dir)), &env, {}, {}, 0};
  YAML::Node root = load_yaml(yaml_mapping, "<model spec>");
  return DocumentReader(ctx).model_spec(root, "model");
}

namespace {

void emit_model(YAML::Emitter& out, const ModelSpec& m) {
  out << YAML::BeginMap;
  out << YAML::Key << "model_name" << YAML::Value << m.model_name;
  out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "temperature" << YAML::Value << m.params.temperature;
  out << YAML::Key << "max_tokens" << YAML::Value << m.params.max_tokens;
  if (!m.params.stop.empty()) {
    out << YAML::Key << "stop" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : m.params.stop) out << s;
    out << YAML::EndSeq;
  }
  if (m.params.seed) out << YAML::Key << "seed" << YAML::Value << *m.params.seed;
  out << YAML::EndMap;
  if (m.cost_per_1k) {
    out << YAML::Key << "cost_per_1k" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "prompt" << YAML::Value << m.cost_per_1k->prompt;
    out << YAML::Key << "completion" << YAML::Value << m.cost_per_1k->completion;
    out << YAML::EndMap;
  }
  if (m.api_base) out << YAML::Key << "api_base" << YAML::Value << *m.api_base;
  if (m.api_key) out << YAML::Key << "api_key" << YAML::Value << *m.api_key;
  out << YAML::EndMap;
}

void emit_prompt(YAML::Emitter& out, const PromptTemplate& p) {
  out << YAML::BeginMap;
  if (!p.name.empty()) out << YAML::Key << "name" << YAML::Value << p.name;
  out << YAML::Key << "template" << YAML::Value << YAML::DoubleQuoted << p.template_text;
  out << YAML::Key << "input_variables" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& v : p.input_variables) out << v;
  out << YAML::EndSeq;
  if (!p.description.empty()) out << YAML::Key << "description" << YAML::Value << p.description;
  out << YAML::EndMap;
}

void emit_config(YAML::Emitter& out, const AgentConfig& c);

void emit_plugin(YAML::Emitter& out, const PluginSpec& p) {
  out << YAML::BeginMap;
  switch (p.kind) {
    case PluginKind::BuiltinTool:
      out << YAML::Key << "builtin" << YAML::Value << p.name;
      break;
    case PluginKind::CustomTool:
      out << YAML::Key << "custom" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "name" << YAML::Value << p.custom->name;
      out << YAML::Key << "description" << YAML::Value << p.custom->description;
      out << YAML::Key << "steps" << YAML::Value << YAML::BeginSeq;
      for (const auto& s : p.custom->steps) {
        const char* key = s.kind == CustomToolStep::Kind::Template ? "template"
                          : s.kind == CustomToolStep::Kind::Fetch  ? "fetch"
                                                                   : "transform";
        out << YAML::BeginMap << YAML::Key << key << YAML::Value << YAML::DoubleQuoted
            << s.argument << YAML::EndMap;
      }
      out << YAML::EndSeq << YAML::EndMap;
      break;
    case PluginKind::SubAgent:
      out << YAML::Key << "agent" << YAML::Value;
      emit_config(out, *p.agent);
      break;
  }
  out << YAML::EndMap;
}

void emit_config(YAML::Emitter& out, const AgentConfig& c) {
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << c.name;
  out << YAML::Key << "version" << YAML::Value << YAML::DoubleQuoted << c.version;
  out << YAML::Key << "type" << YAML::Value << std::string(to_string(c.agent_type));
  out << YAML::Key << "description" << YAML::Value << YAML::DoubleQuoted << c.description;
  out << YAML::Key << "target_tasks" << YAML::Value << YAML::BeginSeq;
  for (const auto& t : c.target_tasks) out << YAML::DoubleQuoted << t;
  out << YAML::EndSeq;
  out << YAML::Key << "llm" << YAML::Value;
  if (c.solver_llm) {
    out << YAML::BeginMap << YAML::Key << "planner" << YAML::Value;
    emit_model(out, c.llm);
    out << YAML::Key << "solver" << YAML::Value;
    emit_model(out, *c.solver_llm);
    out << YAML::EndMap;
  } else {
    emit_model(out, c.llm);
  }
  if (c.solver_prompt_template) {
    out << YAML::Key << "prompt_template" << YAML::Value << YAML::BeginMap;
    if (c.prompt_template) {
      out << YAML::Key << "planner" << YAML::Value;
      emit_prompt(out, *c.prompt_template);
    }
    out << YAML::Key << "solver" << YAML::Value;
    emit_prompt(out, *c.solver_prompt_template);
    out << YAML::EndMap;
  } else if (c.prompt_template) {
    out << YAML::Key << "prompt_template" << YAML::Value;
    emit_prompt(out, *c.prompt_template);
  }
  out << YAML::Key << "plugins" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : c.plugins) emit_plugin(out, p);
  out << YAML::EndSeq;
  if (c.memory) {
    const auto& m = *c.memory;
    out << YAML::Key << "memory" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "embedder" << YAML::Value
        << (m.embedder == EmbedderKind::Api ? "api" : "deterministic_hash");
    out << YAML::Key << "dimension" << YAML::Value << m.dimension;
    out << YAML::Key << "top_k" << YAML::Value << m.top_k;
    out << YAML::Key << "context_budget" << YAML::Value << m.context_budget;
    if (m.threshold) out << YAML::Key << "threshold" << YAML::Value << *m.threshold;
    if (m.path) out << YAML::Key << "path" << YAML::Value << YAML::DoubleQuoted << *m.path;
    out << YAML::EndMap;
  }
  if (c.max_steps) out << YAML::Key << "max_steps" << YAML::Value << *c.max_steps;
  out << YAML::EndMap;
}

}  // namespace

std::string to_canonical_yaml(const AgentConfig& config) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  emit_config(out, config);
  if (!out.good()) fail(ErrorKind::Internal, std::string("yaml emit failed: ") + out.GetLastError());
  return std::string(out.c_str()) + "\n";
}

}  // namespace agentry
