#include "wugdef/service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <ctime>

#include "httplib.h"
#include "json_util.hpp"
#include "wugdef/error.hpp"
#include "wugdef/text.hpp"

namespace wugdef {
namespace fs = std::filesystem;
using nlohmann::json;

ServiceConfig load_service_config(const fs::path& path) {
  ServiceConfig cfg;
  json j;
  try {
    j = detail::parse_json(read_file(path), path.string());
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigInvalid, e.what());
  }
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  try {
    cfg.host = j.value("host", cfg.host);
    cfg.port = j.value("port", cfg.port);
    if (auto s = j.find("static_dir"); s != j.end() && s->is_string()) cfg.static_dir = resolve(s->get<std::string>());
    const auto& ds = j.at("datasets");
    if (!ds.is_array() || ds.empty()) throw Error(ErrorCode::kConfigInvalid, "'datasets' must be a non-empty array");
    for (const auto& d : ds) {
      cfg.datasets.push_back({d.at("id").get<std::string>(), resolve(d.at("items").get<std::string>()),
                              resolve(d.at("records").get<std::string>())});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, std::string("malformed service config: ") + e.what());
  }
  return cfg;
}

namespace {

std::string hex_encode(const std::string& s) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : s) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xF]);
  }
  return out;
}

std::string hex_decode(std::string_view s) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  if (s.size() % 2) throw Error(ErrorCode::kInvalidArgument, "malformed session id");
  std::string out;
  for (std::size_t i = 0; i < s.size(); i += 2) {
    int hi = nibble(s[i]), lo = nibble(s[i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::kInvalidArgument, "malformed session id");
    out.push_back(static_cast<char>(hi * 16 + lo));
  }
  return out;
}

std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  auto secs = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

// Cuts an interrupted final append so the log is again a sequence of
// complete lines.
void drop_torn_tail(const fs::path& path) {
  if (!fs::exists(path)) return;
  const std::string content = read_file(path);
  if (content.empty() || content.back() == '\n') return;
  auto last_nl = content.rfind('\n');
  fs::resize_file(path, last_nl == std::string::npos ? 0 : last_nl + 1);
}

}  // namespace

std::string encode_session_id(const std::string& dataset_id, const std::string& annotator_id) {
  return "s-" + hex_encode(dataset_id) + "-" + hex_encode(annotator_id);
}

std::pair<std::string, std::string> decode_session_id(const std::string& session_id) {
  if (session_id.rfind("s-", 0) != 0) throw Error(ErrorCode::kInvalidArgument, "malformed session id");
  auto dash = session_id.find('-', 2);
  if (dash == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "malformed session id");
  return {hex_decode(std::string_view(session_id).substr(2, dash - 2)),
          hex_decode(std::string_view(session_id).substr(dash + 1))};
}

AnnotationStore::AnnotationStore(DatasetConfig config) : config_(std::move(config)) {
  if (!fs::exists(config_.items)) {
    throw Error(ErrorCode::kConfigInvalid, "items file '" + config_.items.string() + "' does not exist");
  }
  try {
    items_ = read_items(config_.items);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigInvalid, e.what());
  }
  for (std::size_t i = 0; i < items_.size(); ++i) item_index_.emplace(items_[i].item_id, i);
  if (config_.records.has_parent_path()) fs::create_directories(config_.records.parent_path());
  drop_torn_tail(config_.records);
  records_ = read_records(config_.records);
  for (const auto& r : records_) {
    if (!item_index_.count(r.item_id)) {
      throw Error(ErrorCode::kUnknownItem, config_.records.string() + ": record for unknown item '" + r.item_id + "'");
    }
    if (!answered_.emplace(r.annotator_id, r.item_id).second) {
      throw Error(ErrorCode::kDuplicateRecord, config_.records.string() + ": duplicate record for '" + r.item_id + "'");
    }
  }
  // Fail early when the log cannot be appended to.
  int fd = ::open(config_.records.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw Error(ErrorCode::kConfigInvalid, "records path '" + config_.records.string() + "' is not writable");
  ::close(fd);
}

std::size_t AnnotationStore::cursor_locked(const std::string& annotator_id) const {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!answered_.count({annotator_id, items_[i].item_id})) return i;
  }
  return items_.size();
}

Session AnnotationStore::session(const std::string& annotator_id) const {
  std::lock_guard lock(mu_);
  Session s;
  s.session_id = encode_session_id(config_.id, annotator_id);
  s.annotator_id = annotator_id;
  s.dataset_id = config_.id;
  s.cursor = cursor_locked(annotator_id);
  s.total = items_.size();
  for (const auto& r : records_) {
    if (r.annotator_id == annotator_id) {
      s.created_at = r.timestamp;
      break;
    }
  }
  return s;
}

json AnnotationStore::next_item(const std::string& annotator_id) const {
  std::lock_guard lock(mu_);
  const std::size_t cursor = cursor_locked(annotator_id);
  if (cursor >= items_.size()) return {{"completed", true}, {"total", items_.size()}};
  return annotator_payload(items_[cursor], cursor, items_.size());
}

void AnnotationStore::append_locked(const AnnotationRecord& record) {
  const std::string line = record_to_json(record).dump() + "\n";
  int fd = ::open(config_.records.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw Error(ErrorCode::kIo, "cannot open records log '" + config_.records.string() + "'");
  std::size_t written = 0;
  while (written < line.size()) {
    auto n = ::write(fd, line.data() + written, line.size() - written);
    if (n <= 0) {
      ::close(fd);
      throw Error(ErrorCode::kIo, "append to '" + config_.records.string() + "' failed");
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

AnnotationRecord AnnotationStore::submit(const std::string& annotator_id, const std::string& item_id, Choice choice,
                                         std::optional<std::string> note) {
  std::lock_guard lock(mu_);
  if (!item_index_.count(item_id)) throw Error(ErrorCode::kUnknownItem, "unknown item '" + item_id + "'");
  if (answered_.count({annotator_id, item_id})) {
    throw Error(ErrorCode::kDuplicateRecord, "annotator '" + annotator_id + "' already answered '" + item_id + "'");
  }
  AnnotationRecord r{item_id, annotator_id, choice, std::move(note), utc_now()};
  append_locked(r);
  records_.push_back(r);
  answered_.emplace(annotator_id, item_id);
  return r;
}

std::vector<AnnotationRecord> AnnotationStore::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::vector<ScoreRow> AnnotationStore::results() const {
  auto recs = records();
  if (recs.empty()) return {};
  return score(aggregate(recs, items_), items_);
}

AnnotationService::AnnotationService(ServiceConfig config) : config_(std::move(config)) {
  if (config_.datasets.empty()) throw Error(ErrorCode::kConfigInvalid, "no datasets configured");
  for (const auto& d : config_.datasets) {
    if (d.id.empty()) throw Error(ErrorCode::kConfigInvalid, "dataset id must not be empty");
    if (!stores_.emplace(d.id, std::make_unique<AnnotationStore>(d)).second) {
      throw Error(ErrorCode::kConfigInvalid, "duplicate dataset id '" + d.id + "'");
    }
  }
  server_ = std::make_unique<httplib::Server>();
  install_routes();
}

AnnotationService::~AnnotationService() { stop(); }

AnnotationStore& AnnotationService::store(const std::string& dataset_id) {
  auto it = stores_.find(dataset_id);
  if (it == stores_.end()) throw Error(ErrorCode::kUnknownItem, "unknown dataset '" + dataset_id + "'");
  return *it->second;
}

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateRecord: return 409;
    case ErrorCode::kUnknownItem: return 404;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse: return 400;
    default: return 500;
  }
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, const Error& e) {
  reply(res, status_for(e.code()), {{"error", error_code_name(e.code())}, {"message", e.what()}});
}

std::string require_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name) || req.get_param_value(name).empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("missing query parameter '") + name + "'");
  }
  return req.get_param_value(name);
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      reply_error(res, e);
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", "Internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace

void AnnotationService::install_routes() {
  auto& srv = *server_;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  if (config_.static_dir) srv.set_mount_point("/", config_.static_dir->string());

  srv.Get("/datasets", guarded([this](const httplib::Request&, httplib::Response& res) {
            json list = json::array();
            for (const auto& [id, st] : stores_) list.push_back({{"id", id}, {"items", st->item_count()}});
            reply(res, 200, {{"datasets", list}});
          }));

  srv.Get("/session", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto annotator = require_param(req, "annotator");
            auto s = store(require_param(req, "dataset")).session(annotator);
            reply(res, 200,
                  {{"session_id", s.session_id},
                   {"annotator_id", s.annotator_id},
                   {"dataset_id", s.dataset_id},
                   {"cursor", s.cursor},
                   {"total", s.total},
                   {"created_at", s.created_at ? json(*s.created_at) : json(nullptr)}});
          }));

  srv.Get("/items/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto [dataset, annotator] = decode_session_id(require_param(req, "session"));
            reply(res, 200, store(dataset).next_item(annotator));
          }));

  srv.Post("/records", guarded([this](const httplib::Request& req, httplib::Response& res) {
             json body;
             try {
               body = json::parse(req.body);
             } catch (const json::exception&) {
               throw Error(ErrorCode::kInvalidArgument, "request body is not JSON");
             }
             if (!body.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be an object");
             auto field = [&](const char* key) {
               auto it = body.find(key);
               if (it == body.end() || !it->is_string()) {
                 throw Error(ErrorCode::kInvalidArgument, std::string("missing string field '") + key + "'");
               }
               return it->get<std::string>();
             };
             auto [dataset, annotator] = decode_session_id(field("session"));
             auto item_id = field("item_id");
             auto choice = parse_choice(field("choice"));
             std::optional<std::string> note;
             if (auto it = body.find("note"); it != body.end() && it->is_string() && !it->get<std::string>().empty()) {
               note = it->get<std::string>();
             }
             auto& st = store(dataset);
             auto rec = st.submit(annotator, item_id, choice, std::move(note));
             reply(res, 201, {{"ok", true}, {"record", record_to_json(rec)}, {"cursor", st.session(annotator).cursor}});
           }));

  srv.Get("/results", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto& st = store(require_param(req, "dataset"));
            auto rows = st.results();
            reply(res, 200, {{"dataset", st.id()}, {"rows", score_report_json(rows)}, {"tsv", score_report_tsv(rows)}});
          }));
}

int AnnotationService::bind() {
  if (bound_port_ >= 0) return bound_port_;
  // SO_REUSEADDR only, so a second server on the same port fails to bind
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (config_.port == 0) {
    bound_port_ = server_->bind_to_any_port(config_.host);
  } else {
    bound_port_ = server_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
  }
  if (bound_port_ < 0) {
    throw Error(ErrorCode::kPortBusy, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
  }
  return bound_port_;
}

void AnnotationService::run() {
  bind();
  server_->listen_after_bind();
}

int AnnotationService::start() {
  int port = bind();
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void AnnotationService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace wugdef
