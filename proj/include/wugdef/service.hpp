#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wugdef/evalkit.hpp"

namespace httplib {
class Server;
}

namespace wugdef {

struct DatasetConfig {
  std::string id;
  std::filesystem::path items;
  std::filesystem::path records;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::vector<DatasetConfig> datasets;
  std::optional<std::filesystem::path> static_dir;  // served at / when set
};

// {"host", "port", "static_dir", "datasets": [{"id", "items", "records"}]}.
// Relative paths resolve against the config file's directory.
// Throws Error{ConfigInvalid}.
ServiceConfig load_service_config(const std::filesystem::path& path);

struct Session {
  std::string session_id;
  std::string annotator_id;
  std::string dataset_id;
  std::size_t cursor = 0;  // index of the next unanswered item
  std::size_t total = 0;
  std::optional<std::string> created_at;  // timestamp of the first record
};

// Session ids are a reversible encoding of (dataset, annotator), so a
// restarted service resolves ids it handed out before.
std::string encode_session_id(const std::string& dataset_id, const std::string& annotator_id);
// Returns (dataset, annotator); throws Error{InvalidArgument}.
std::pair<std::string, std::string> decode_session_id(const std::string& session_id);

// Items of one dataset plus its append-only records log. All state is
// rebuilt from the two files on construction; every accepted record is
// appended and flushed before the call returns. Thread-safe.
class AnnotationStore {
 public:
  // Throws Error{ConfigInvalid} when the items file is missing or unreadable.
  explicit AnnotationStore(DatasetConfig config);

  const std::string& id() const { return config_.id; }
  std::size_t item_count() const { return items_.size(); }
  const std::vector<EvalItem>& items() const { return items_; }

  Session session(const std::string& annotator_id) const;
  // Blinded payload of the next unanswered item, or {"completed": true}.
  nlohmann::json next_item(const std::string& annotator_id) const;
  // Throws Error{UnknownItem} or Error{DuplicateRecord}.
  AnnotationRecord submit(const std::string& annotator_id, const std::string& item_id, Choice choice,
                          std::optional<std::string> note);
  std::vector<AnnotationRecord> records() const;
  // Score rows over everything recorded so far (empty when nothing is).
  std::vector<ScoreRow> results() const;

 private:
  std::size_t cursor_locked(const std::string& annotator_id) const;
  void append_locked(const AnnotationRecord& record);

  DatasetConfig config_;
  std::vector<EvalItem> items_;
  std::map<std::string, std::size_t> item_index_;
  mutable std::mutex mu_;
  std::vector<AnnotationRecord> records_;
  std::set<std::pair<std::string, std::string>> answered_;  // (annotator, item)
};

// HTTP front end over one AnnotationStore per dataset:
//   GET  /datasets
//   GET  /session?annotator=&dataset=
//   GET  /items/next?session=
//   POST /records {session, item_id, choice, note?}
//   GET  /results?dataset=
class AnnotationService {
 public:
  explicit AnnotationService(ServiceConfig config);
  ~AnnotationService();

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  // Binds the listening socket and returns the bound port.
  // Throws Error{PortBusy}.
  int bind();
  // Serves until stop(); bind() is called first if needed.
  void run();
  // Binds and serves on a background thread.
  int start();
  void stop();

  AnnotationStore& store(const std::string& dataset_id);

 private:
  void install_routes();

  ServiceConfig config_;
  std::map<std::string, std::unique_ptr<AnnotationStore>> stores_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int bound_port_ = -1;
};

}  // namespace wugdef
