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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace agentry {

// Reference tokenizer: whitespace-separated units. Used for scripted-backend
// accounting, memory budgets and observation truncation.
std::size_t count_units(std::string_view text) noexcept;
std::vector<std::string_view> split_units(std::string_view text);

struct Truncated {
  std::string text;
  bool truncated = false;
};
// Keeps the first `max_units` units; anything beyond is replaced with `marker`.
Truncated truncate_units(std::string_view text, std::size_t max_units,
                         std::string_view marker = " ...[truncated]");
// Byte cap that never splits a UTF-8 sequence.
std::string truncate_utf8(std::string_view text, std::size_t max_bytes);

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b) noexcept;
bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept;
std::vector<std::string> split_lines(std::string_view text);
std::string replace_all(std::string text, std::string_view from, std::string_view to);

std::uint64_t fnv1a64(std::string_view data) noexcept;

// Visible text of an HTML document: script/style bodies dropped, tags
// removed, common entities decoded, whitespace collapsed.
std::string html_to_text(std::string_view html);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

// ISO-8601 UTC wall-clock timestamp, second precision.
std::string utc_timestamp();

}  // namespace agentry
