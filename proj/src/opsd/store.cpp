#include "ops/opsd/store.hpp"

#include <algorithm>

#include "ops/common/error.hpp"
#include "ops/common/hash.hpp"

namespace ops::opsd {

namespace fs = std::filesystem;

void require_hex_id(const std::string& id) {
  const bool ok = !id.empty() && id.size() <= 128 &&
                  std::all_of(id.begin(), id.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
  if (!ok) throw NotFoundError("no object with id \"" + id + "\"");
}

Store::Store(fs::path root) : root_(std::move(root)) {
  for (const auto& k : kinds()) fs::create_directories(root_ / "objects" / k);
  fs::create_directories(root_ / "batches");
  fs::create_directories(root_ / "downlinks");
  fs::create_directories(root_ / "idempotency");
}

const std::vector<std::string>& Store::kinds() {
  static const std::vector<std::string> k{"tasknets", "configs", "specs", "models"};
  return k;
}

namespace {

void require_kind(const std::string& kind) {
  const auto& k = Store::kinds();
  if (std::find(k.begin(), k.end(), kind) == k.end()) throw NotFoundError("unknown object kind \"" + kind + "\"");
}

}  // namespace

std::string Store::put(const std::string& kind, const Json& doc) {
  require_kind(kind);
  const std::string bytes = canonical(doc);
  const std::string id = sha256_hex(bytes);
  const fs::path path = root_ / "objects" / kind / (id + ".json");
  std::lock_guard lock(lock_for(path));
  if (!fs::exists(path)) write_file_atomic(path, bytes);
  return id;
}

Json Store::get(const std::string& kind, const std::string& id) const {
  require_kind(kind);
  require_hex_id(id);
  const fs::path path = root_ / "objects" / kind / (id + ".json");
  if (!fs::exists(path)) throw NotFoundError("no " + kind + " object \"" + id + "\"");
  return read_json_file(path);
}

bool Store::contains(const std::string& kind, const std::string& id) const {
  require_kind(kind);
  require_hex_id(id);
  return fs::exists(root_ / "objects" / kind / (id + ".json"));
}

std::vector<std::string> Store::list(const std::string& kind) const {
  require_kind(kind);
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(root_ / "objects" / kind))
    if (e.path().extension() == ".json") out.push_back(e.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

fs::path Store::batch_dir(const std::string& batch_id) const {
  require_hex_id(batch_id);
  return root_ / "batches" / batch_id;
}

fs::path Store::downlink_dir(const std::string& downlink_id) const {
  require_hex_id(downlink_id);
  return root_ / "downlinks" / downlink_id;
}

bool Store::batch_complete(const std::string& batch_id) const {
  return fs::exists(batch_dir(batch_id) / "manifest.json") && fs::exists(batch_dir(batch_id) / "clusters.json");
}

std::optional<std::string> Store::batch_for_key(const std::string& key) const {
  const fs::path path = root_ / "idempotency" / sha256_hex(key);
  if (!fs::exists(path)) return std::nullopt;
  return read_text_file(path);
}

std::string Store::bind_key(const std::string& key, const std::string& batch_id) {
  const fs::path path = root_ / "idempotency" / sha256_hex(key);
  std::lock_guard lock(lock_for(path));
  if (fs::exists(path)) return read_text_file(path);
  write_file_atomic(path, batch_id);
  return batch_id;
}

void Store::write(const fs::path& path, const Json& doc) {
  std::lock_guard lock(lock_for(path));
  write_json_file(path, doc);
}

std::optional<Json> Store::read(const fs::path& path) const {
  if (!fs::exists(path)) return std::nullopt;
  return read_json_file(path);
}

std::mutex& Store::lock_for(const fs::path& path) {
  std::lock_guard lock(locks_mu_);
  auto& m = locks_[path.lexically_normal().string()];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

}  // namespace ops::opsd
