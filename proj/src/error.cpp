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

#include "agentry/error.hpp"

namespace agentry {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::UnknownAgentType: return "UnknownAgentType";
    case ErrorKind::CyclicInclude: return "CyclicInclude";
    case ErrorKind::UnresolvedEnv: return "UnresolvedEnv";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::UnknownSymbol: return "UnknownSymbol";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::UnknownBackend: return "UnknownBackend";
    case ErrorKind::UnknownTool: return "UnknownTool";
    case ErrorKind::DepthLimitExceeded: return "DepthLimitExceeded";
    case ErrorKind::NameCollision: return "NameCollision";
    case ErrorKind::UnknownTemplate: return "UnknownTemplate";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::BackendRefusal: return "BackendRefusal";
    case ErrorKind::ScriptExhausted: return "ScriptExhausted";
    case ErrorKind::DuplicateRegistration: return "DuplicateRegistration";
    case ErrorKind::MissingBinding: return "MissingBinding";
    case ErrorKind::UnknownBinding: return "UnknownBinding";
    case ErrorKind::StepLimitExceeded: return "StepLimitExceeded";
    case ErrorKind::MalformedModelOutput: return "MalformedModelOutput";
    case ErrorKind::ToolFailure: return "ToolFailure";
    case ErrorKind::PlanReferenceError: return "PlanReferenceError";
    case ErrorKind::HandlerAborted: return "HandlerAborted";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::DuplicateTool: return "DuplicateTool";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::InvalidFraction: return "InvalidFraction";
    case ErrorKind::UnparseableVerdict: return "UnparseableVerdict";
    case ErrorKind::SandboxUnavailable: return "SandboxUnavailable";
    case ErrorKind::AssemblyError: return "AssemblyError";
    case ErrorKind::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace agentry
