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

#include <stdexcept>
#include <string>
#include <string_view>

namespace agentry {

// Every failure the library reports carries one of these kinds so that
// callers (CLI exit codes, HTTP status mapping, eval result rows) can branch
// on it without string matching.
enum class ErrorKind {
  // configuration
  SyntaxError,
  MissingField,
  UnknownAgentType,
  CyclicInclude,
  UnresolvedEnv,
  FileNotFound,
  UnknownSymbol,
  InvalidConfig,
  // assembly and pool
  UnknownBackend,
  UnknownTool,
  DepthLimitExceeded,
  NameCollision,
  UnknownTemplate,
  NotFound,
  // model backends
  TransportError,
  BackendRefusal,
  ScriptExhausted,
  DuplicateRegistration,
  // prompting
  MissingBinding,
  UnknownBinding,
  // runtime
  StepLimitExceeded,
  MalformedModelOutput,
  ToolFailure,
  PlanReferenceError,
  HandlerAborted,
  InvalidInput,
  // plugins
  DuplicateTool,
  // benchmark and grading
  SchemaError,
  InvalidFraction,
  UnparseableVerdict,
  SandboxUnavailable,
  AssemblyError,
  Internal,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  // The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace agentry
