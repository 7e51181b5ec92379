#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ops/common/json_io.hpp"

namespace ops::opsd {

/// Filesystem store under one root:
///   objects/<kind>/<sha256>.json   immutable documents (tasknets, configs, specs, models)
///   batches/<batch_id>/            prediction batches (see predict::write_batch)
///   downlinks/<id>/                ingested downlinks and their reports
///   idempotency/<sha256(key)>      batch id a client key was first used for
class Store {
 public:
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  static const std::vector<std::string>& kinds();

  /// Writes `doc` once; the id is the SHA-256 of its canonical bytes.
  std::string put(const std::string& kind, const Json& doc);
  Json get(const std::string& kind, const std::string& id) const;  // NotFoundError
  bool contains(const std::string& kind, const std::string& id) const;
  std::vector<std::string> list(const std::string& kind) const;

  std::filesystem::path batch_dir(const std::string& batch_id) const;
  std::filesystem::path downlink_dir(const std::string& downlink_id) const;
  bool batch_complete(const std::string& batch_id) const;

  std::optional<std::string> batch_for_key(const std::string& idempotency_key) const;
  /// Binds the key to `batch_id` unless already bound; returns the bound id.
  std::string bind_key(const std::string& idempotency_key, const std::string& batch_id);

  /// Atomic replace, serialized per path.
  void write(const std::filesystem::path& path, const Json& doc);
  std::optional<Json> read(const std::filesystem::path& path) const;

 private:
  std::mutex& lock_for(const std::filesystem::path& path);

  std::filesystem::path root_;
  std::mutex locks_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

/// Ids arrive in URLs; anything but lowercase hex is rejected as NOT_FOUND.
void require_hex_id(const std::string& id);

}  // namespace ops::opsd
