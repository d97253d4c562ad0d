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

#include "agentry/memory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "agentry/error.hpp"
#include "agentry/text.hpp"

namespace agentry {

void MemoryConfig::validate() const {
  if (dimension == 0) fail(ErrorKind::InvalidConfig, "memory.dimension must be positive");
  if (top_k == 0) fail(ErrorKind::InvalidConfig, "memory.top_k must be >= 1");
  if (context_budget == 0) fail(ErrorKind::InvalidConfig, "memory.context_budget must be > 0");
}

Vector hash_embed(std::string_view text, std::size_t dimension) {
  Vector v(dimension, 0.0f);
  auto units = split_units(text);
  if (units.empty() || dimension == 0) return v;
  for (auto u : units) v[fnv1a64(u) % dimension] += 1.0f;
  double norm = 0.0;
  for (float x : v) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  for (float& x : v) x = static_cast<float>(x / norm);
  return v;
}

double cosine_similarity(const Vector& a, const Vector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

MemoryStore::MemoryStore(MemoryConfig config) : config_(std::move(config)) {
  config_.validate();
}

MemoryStore MemoryStore::open(const std::filesystem::path& path, MemoryConfig config) {
  MemoryStore store(std::move(config));
  store.file_ = path;
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) {
        fail(ErrorKind::SchemaError, path.string() + ":" + std::to_string(lineno) + ": bad JSON");
      }
      MemoryRecord r;
      r.id = j.at("id").get<std::int64_t>();
      r.text = j.at("text").get<std::string>();
      r.vector = j.at("vector").get<Vector>();
      r.inserted_at = j.value("inserted_at", r.id);
      if (r.vector.size() != store.config_.dimension) {
        fail(ErrorKind::SchemaError, path.string() + ":" + std::to_string(lineno) +
                                         ": vector dimension mismatch");
      }
      store.next_id_ = std::max(store.next_id_, r.id + 1);
      store.records_.push_back(std::move(r));
    }
  } else if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  return store;
}

Vector MemoryStore::embed(std::string_view text) const {
  return hash_embed(text, config_.dimension);
}

std::int64_t MemoryStore::insert(std::string_view text) {
  return insert(text, embed(text));
}

std::int64_t MemoryStore::insert(std::string_view text, Vector vector) {
  if (trim(text).empty()) fail(ErrorKind::InvalidInput, "cannot archive empty text");
  if (vector.size() != config_.dimension) {
    fail(ErrorKind::InvalidInput, "vector dimension " + std::to_string(vector.size()) +
                                      " != store dimension " + std::to_string(config_.dimension));
  }
  MemoryRecord r;
  r.id = next_id_++;
  r.text = std::string(text);
  r.vector = std::move(vector);
  r.inserted_at = r.id;
  append_to_file(r);
  records_.push_back(std::move(r));
  return records_.back().id;
}

void MemoryStore::append_to_file(const MemoryRecord& record) const {
  if (!file_) return;
  std::ofstream out(*file_, std::ios::app);
  if (!out) fail(ErrorKind::Internal, "cannot append to " + file_->string());
  nlohmann::json j = {{"id", record.id},
                      {"text", record.text},
                      {"vector", record.vector},
                      {"inserted_at", record.inserted_at}};
  out << j.dump() << '\n';
}

std::vector<ScoredRecord> MemoryStore::recall(std::string_view query, std::size_t k) const {
  return recall(embed(query), k);
}

std::vector<ScoredRecord> MemoryStore::recall(const Vector& query, std::size_t k) const {
  std::vector<ScoredRecord> scored;
  scored.reserve(records_.size());
  for (const auto& r : records_) {
    double s = cosine_similarity(query, r.vector);
    if (config_.threshold && s < *config_.threshold) continue;
    scored.push_back({&r, s});
  }
  auto better = [](const ScoredRecord& a, const ScoredRecord& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.record->inserted_at < b.record->inserted_at;
  };
  std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), better);
  scored.resize(take);
  return scored;
}

std::size_t session_units(const std::vector<Message>& messages) {
  std::size_t n = 0;
  for (const auto& m : messages) n += count_units(m.content);
  return n;
}

ArchiveOutcome archive_overflow(const std::vector<Message>& session, MemoryStore& store,
                                std::size_t budget) {
  ArchiveOutcome out;
  out.session = session;
  std::size_t units = session_units(out.session);
  while (units > budget) {
    // Oldest user message followed by its assistant reply.
    std::size_t user_idx = out.session.size();
    for (std::size_t i = 0; i < out.session.size(); ++i) {
      if (out.session[i].role == Role::User) {
        user_idx = i;
        break;
      }
    }
    if (user_idx == out.session.size()) break;
    std::size_t end = user_idx + 1;
    while (end < out.session.size() && out.session[end].role != Role::User &&
           out.session[end].role != Role::System) {
      ++end;
    }
    bool later_user = false;
    for (std::size_t i = end; i < out.session.size(); ++i) {
      later_user = later_user || out.session[i].role == Role::User;
    }
    if (!later_user) {
      out.over_budget = true;
      break;
    }
    std::string chunk;
    std::size_t removed_units = 0;
    for (std::size_t i = user_idx; i < end; ++i) {
      const auto& m = out.session[i];
      if (!chunk.empty()) chunk += '\n';
      chunk += (m.role == Role::User ? "User: " : "Assistant: ") + m.content;
      removed_units += count_units(m.content);
    }
    store.insert(chunk);
    out.session.erase(out.session.begin() + static_cast<std::ptrdiff_t>(user_idx),
                      out.session.begin() + static_cast<std::ptrdiff_t>(end));
    units -= removed_units;
    ++out.archived_pairs;
  }
  return out;
}

std::string format_recall_block(const std::vector<ScoredRecord>& recalled) {
  std::string out = "Relevant memory from earlier conversation:";
  for (const auto& r : recalled) out += "\n- " + r.record->text;
  return out;
}

}  // namespace agentry
