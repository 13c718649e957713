#include "flowhub/store.hpp"

#include <fstream>
#include <sstream>

#include "flowhub/error.hpp"
#include "flowhub/util.hpp"

namespace flowhub {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_atomically(const fs::path& path, std::string_view bytes) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp-" + random_hex(4);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::io_error, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::io_error, "cannot replace " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_digest(std::string_view s) {
  return s.size() == 64 && s.find_first_not_of("0123456789abcdef") == std::string_view::npos;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<json> MemoryStore::list(std::string_view kind) const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<json> out;
  auto it = docs_.find(std::string(kind));
  if (it == docs_.end()) return out;
  for (const auto& [id, doc] : it->second) out.push_back(doc);
  return out;
}

void MemoryStore::put(std::string_view kind, const std::string& id, const json& doc) {
  std::lock_guard<std::mutex> lock(mutex_);
  docs_[std::string(kind)][id] = doc;
}

void MemoryStore::remove(std::string_view kind, const std::string& id) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = docs_.find(std::string(kind));
  if (it != docs_.end()) it->second.erase(id);
}

std::string MemoryStore::put_blob(std::string_view bytes) {
  std::string sha = digest::sha256_hex(bytes);
  std::lock_guard<std::mutex> lock(mutex_);
  blobs_.try_emplace(sha, bytes);
  return sha;
}

std::string MemoryStore::get_blob(const std::string& sha256) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = blobs_.find(sha256);
  if (it == blobs_.end()) throw Error(ErrorCode::integrity_error, "missing blob " + sha256);
  return it->second;
}

void MemoryStore::append_event(const json& event) {
  std::lock_guard<std::mutex> lock(mutex_);
  events_.push_back(event);
}

std::vector<json> MemoryStore::events() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return events_;
}

std::size_t MemoryStore::blob_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return blobs_.size();
}

// ---------------------------------------------------------------------------

FileStore::FileStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "entities", ec);
  fs::create_directories(root_ / "blobs", ec);
  if (!fs::is_directory(root_ / "entities") || !fs::is_directory(root_ / "blobs"))
    throw Error(ErrorCode::io_error, "cannot create store at " + root_.string());
}

fs::path FileStore::document_path(std::string_view kind, const std::string& id) const {
  return root_ / "entities" / std::string(kind) / (text::url_encode(id) + ".json");
}

std::vector<json> FileStore::list(std::string_view kind) const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<json> out;
  const fs::path dir = root_ / "entities" / std::string(kind);
  if (!fs::is_directory(dir)) return out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    try {
      out.push_back(json::parse(read_file(file)));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::integrity_error, "corrupt document " + file.string() + ": " + e.what());
    }
  }
  return out;
}

void FileStore::put(std::string_view kind, const std::string& id, const json& doc) {
  std::lock_guard<std::mutex> lock(mutex_);
  write_atomically(document_path(kind, id), doc.dump(2) + "\n");
}

void FileStore::remove(std::string_view kind, const std::string& id) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::error_code ec;
  fs::remove(document_path(kind, id), ec);
}

std::string FileStore::put_blob(std::string_view bytes) {
  std::string sha = digest::sha256_hex(bytes);
  const fs::path path = root_ / "blobs" / sha;
  std::lock_guard<std::mutex> lock(mutex_);
  if (!fs::exists(path)) write_atomically(path, bytes);
  return sha;
}

std::string FileStore::get_blob(const std::string& sha256) const {
  if (!is_digest(sha256)) throw Error(ErrorCode::integrity_error, "bad blob digest `" + sha256 + "`");
  const fs::path path = root_ / "blobs" / sha256;
  std::lock_guard<std::mutex> lock(mutex_);
  if (!fs::exists(path)) throw Error(ErrorCode::integrity_error, "missing blob " + sha256);
  std::string bytes = read_file(path);
  if (digest::sha256_hex(bytes) != sha256)
    throw Error(ErrorCode::integrity_error, "blob " + sha256 + " does not match its digest");
  return bytes;
}

void FileStore::append_event(const json& event) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::ofstream out(root_ / "events.log", std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::io_error, "cannot append to events.log");
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::io_error, "cannot append to events.log");
}

std::vector<json> FileStore::events() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<json> out;
  std::ifstream in(root_ / "events.log", std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error&) {
      // A torn final line from a crash mid-append is ignored.
    }
  }
  return out;
}

}  // namespace flowhub
