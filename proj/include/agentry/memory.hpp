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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentry/llm.hpp"

namespace agentry {

enum class EmbedderKind { DeterministicHash, Api };

struct MemoryConfig {
  EmbedderKind embedder = EmbedderKind::DeterministicHash;
  std::size_t dimension = 256;
  std::size_t top_k = 4;
  std::size_t context_budget = 2048;  // reference-tokenizer units
  std::optional<double> threshold;
  std::optional<std::string> path;     // file-backed store when set

  void validate() const;
  bool operator==(const MemoryConfig&) const = default;
};

using Vector = std::vector<float>;

// Bag of hashed whitespace tokens: each token lands in bucket
// fnv1a64(token) mod d; bucket counts are L2-normalized. Empty text yields
// the zero vector.
Vector hash_embed(std::string_view text, std::size_t dimension);

// Plain double-precision cosine; 0 when either side is the zero vector.
double cosine_similarity(const Vector& a, const Vector& b);

struct MemoryRecord {
  std::int64_t id = 0;
  std::string text;
  Vector vector;
  std::int64_t inserted_at = 0;
};

struct ScoredRecord {
  const MemoryRecord* record = nullptr;
  double similarity = 0.0;
};

// Exhaustive-scan vector store. Single writer; concurrent recalls are fine
// between inserts. File-backed stores append one JSON line per record.
class MemoryStore {
 public:
  explicit MemoryStore(MemoryConfig config);
  // Opens (or creates) a line-delimited store file and loads its records.
  static MemoryStore open(const std::filesystem::path& path, MemoryConfig config);

  std::int64_t insert(std::string_view text);
  // Records with an externally supplied vector (api embedder, tests).
  std::int64_t insert(std::string_view text, Vector vector);

  // At most k records by descending cosine similarity; ties go to the earlier
  // insertion. Records below the configured threshold are skipped.
  std::vector<ScoredRecord> recall(std::string_view query, std::size_t k) const;
  std::vector<ScoredRecord> recall(const Vector& query, std::size_t k) const;

  Vector embed(std::string_view text) const;

  const std::vector<MemoryRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const MemoryConfig& config() const { return config_; }

 private:
  void append_to_file(const MemoryRecord& record) const;

  MemoryConfig config_;
  std::vector<MemoryRecord> records_;
  std::int64_t next_id_ = 1;
  std::optional<std::filesystem::path> file_;
};

struct ArchiveOutcome {
  std::vector<Message> session;
  std::size_t archived_pairs = 0;
  // The newest turn alone exceeds the budget; it is kept anyway.
  bool over_budget = false;
};

std::size_t session_units(const std::vector<Message>& messages);

// Moves the oldest (user, assistant) pairs into `store` until the session's
// unit count fits `budget`. System messages are never archived and the
// latest pair always stays.
ArchiveOutcome archive_overflow(const std::vector<Message>& session, MemoryStore& store,
                                std::size_t budget);

// System block listing recalled records, injected before the latest user turn.
std::string format_recall_block(const std::vector<ScoredRecord>& recalled);

}  // namespace agentry
