#include "docaff/service.hpp"

#include <httplib.h>

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "docaff/edits.hpp"
#include "docaff/json_io.hpp"
#include "docaff/pipeline.hpp"
#include "docaff/refine.hpp"
#include "docaff/text_rules.hpp"

namespace docaff {

namespace fs = std::filesystem;

namespace {

struct ApiError : std::runtime_error {
  ApiError(int status, std::string code, const std::string& message, std::string field = {})
      : std::runtime_error(message), status(status), code(std::move(code)), field(std::move(field)) {}
  int status;
  std::string code;
  std::string field;
  Json extra = Json::object();
};

HttpResponse json_response(int status, const Json& body) { return {status, "application/json", body.dump()}; }

HttpResponse error_response(int status, const std::string& code, const std::string& message,
                            const std::string& field = {}, const Json& extra = Json::object()) {
  Json body{{"code", code}, {"message", message}, {"field", field.empty() ? Json(nullptr) : Json(field)}};
  for (const auto& [k, v] : extra.items()) body[k] = v;
  return json_response(status, body);
}

// Mutual exclusion granted in arrival order.
class TicketLock {
 public:
  void lock() {
    std::unique_lock guard(mutex_);
    const std::uint64_t ticket = next_++;
    cv_.wait(guard, [&] { return serving_ == ticket; });
  }
  void unlock() {
    {
      std::lock_guard guard(mutex_);
      ++serving_;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::uint64_t next_ = 0;
  std::uint64_t serving_ = 0;
};

struct Job {
  std::string id;
  std::string kind;
  std::mutex mutex;
  std::condition_variable cv;
  bool done = false;
  HttpResponse result;
};

// Immutable view served to readers.
struct Snapshot {
  bool run = false;
  std::string clusters;
  std::string projection;
  DocumentModel rendered;  // current (edited) document
  ClusterAssignment assignment;
  std::size_t clusters_count = 0;
  std::size_t user_constraints = 0;
  std::size_t edits = 0;
  std::size_t refinements = 0;
};

struct Session {
  std::string id;
  fs::path dir;
  DocumentModel input;

  // Owned by the holder of `lock`.
  std::optional<RefineSession> state;
  DocumentModel edited;
  EditLog edits;
  int job_counter = 0;

  TicketLock lock;
  std::atomic<bool> busy{false};

  std::mutex snap_mutex;
  std::shared_ptr<const Snapshot> snapshot;

  std::mutex jobs_mutex;
  std::map<std::string, std::shared_ptr<Job>> jobs;

  std::shared_ptr<const Snapshot> read() {
    std::lock_guard guard(snap_mutex);
    return snapshot;
  }
};

Json cluster_summary(const RefineSession& s) {
  Json sizes = Json::array();
  for (const auto& c : s.assignment.clusters) sizes.push_back(c.size());
  return {{"clusters", s.assignment.cluster_count()}, {"cluster_sizes", std::move(sizes)}, {"lines", s.doc.lines.size()}};
}

Json history_to_json(const RefineRecord& r) {
  return {{"epochs", r.epochs},
          {"user_constraints", r.user_constraints},
          {"training_constraints", r.training_constraints},
          {"clusters", r.clusters},
          {"report", train_report_to_json(r.report)}};
}

RefineRecord history_from_json(const Json& j) {
  RefineRecord r;
  r.epochs = j.at("epochs").get<int>();
  r.user_constraints = j.at("user_constraints").get<std::size_t>();
  r.training_constraints = j.at("training_constraints").get<std::size_t>();
  r.clusters = j.at("clusters").get<std::size_t>();
  r.report = train_report_from_json(j.at("report"));
  return r;
}

void write_atomically(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : path) {
    if (c == '/') {
      if (!current.empty()) parts.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) parts.push_back(std::move(current));
  return parts;
}

Json parse_body(const std::string& body) {
  if (trim(body).empty()) return Json::object();
  return parse_json(body, "body");
}

}  // namespace

struct ServiceCore::Impl {
  ServiceOptions options;
  std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  int next_id = 1;

  std::mutex threads_mutex;
  std::vector<std::thread> threads;

  explicit Impl(ServiceOptions opts) : options(std::move(opts)) {
    options.base_config.check();
    fs::create_directories(options.data_dir);
    load_all();
  }

  ~Impl() { join_all(); }

  void join_all() {
    for (;;) {
      std::vector<std::thread> pending;
      {
        std::lock_guard guard(threads_mutex);
        pending.swap(threads);
      }
      if (pending.empty()) return;
      for (auto& t : pending) t.join();
    }
  }

  // ---- persistence ----

  void persist(Session& s) {
    Json j{{"version", 1}, {"id", s.id}, {"input", document_to_json(s.input)}, {"job_counter", s.job_counter}};
    if (s.state) {
      const RefineSession& st = *s.state;
      j["config"] = format_config(st.config);
      j["report"] = train_report_to_json(st.report);
      Json user = Json::array();
      for (const auto& c : st.user_constraints) user.push_back(constraint_to_json(c));
      j["user_constraints"] = std::move(user);
      Json history = Json::array();
      for (const auto& r : st.history) history.push_back(history_to_json(r));
      j["history"] = std::move(history);
      Json edits = Json::array();
      for (const auto& e : s.edits) edits.push_back(edit_entry_to_json(e));
      j["edits"] = std::move(edits);
      std::ostringstream model;
      save_checkpoint(st.model, model);
      write_atomically(s.dir / "model.bin", model.str());
    }
    write_atomically(s.dir / "session.json", j.dump(1));
  }

  void load_all() {
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(options.data_dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "session.json")) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
      auto s = std::make_shared<Session>();
      const Json j = parse_json(read_file(dir / "session.json"), (dir / "session.json").string());
      s->id = j.at("id").get<std::string>();
      s->dir = dir;
      s->input = document_from_json(j.at("input"));
      s->job_counter = j.value("job_counter", 0);
      if (j.contains("config")) {
        const PipelineConfig cfg = parse_config(j.at("config").get<std::string>());
        RefineSession st = prepare_session(s->input, cfg);
        std::ifstream model_in(dir / "model.bin", std::ios::binary);
        st.model = load_checkpoint<PipelineScalar>(model_in);
        st.report = train_report_from_json(j.at("report"));
        for (const auto& c : j.at("user_constraints")) st.user_constraints.push_back(constraint_from_json(c));
        for (const auto& r : j.at("history")) st.history.push_back(history_from_json(r));
        st.trained = true;
        recluster(st);
        for (const auto& e : j.at("edits")) s->edits.push_back(edit_entry_from_json(e));
        s->edited = replay(st.doc, s->edits);
        s->state = std::move(st);
      }
      publish(*s);
      if (s->id.size() > 1 && s->id[0] == 'd') {
        try {
          next_id = std::max(next_id, std::stoi(s->id.substr(1)) + 1);
        } catch (const std::exception&) {
        }
      }
      sessions[s->id] = std::move(s);
    }
  }

  // ---- snapshots ----

  void publish(Session& s) {
    auto snap = std::make_shared<Snapshot>();
    if (s.state) {
      const RefineSession& st = *s.state;
      snap->run = true;
      snap->clusters = clusters_to_json(st.assignment).dump();
      snap->projection = projection_to_json(st.reps.word_ids, st.projection, st.assignment).dump();
      snap->rendered = s.edited;
      snap->assignment = st.assignment;
      snap->clusters_count = st.assignment.cluster_count();
      snap->user_constraints = st.user_constraints.size();
      snap->edits = s.edits.size();
      snap->refinements = st.history.size();
    } else {
      snap->rendered = s.input;
    }
    std::lock_guard guard(s.snap_mutex);
    s.snapshot = std::move(snap);
  }

  // ---- helpers ----

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard guard(sessions_mutex);
    const auto it = sessions.find(id);
    if (it == sessions.end()) throw ApiError(404, "NOT_FOUND", "unknown document '" + id + "'", "doc_id");
    return it->second;
  }

  static void require_idle(Session& s) {
    if (s.busy.load()) throw ApiError(409, "BUSY", "a run or refinement is in progress for this document");
  }

  static void require_run(const Session& s) {
    if (!s.state) throw ApiError(409, "NOT_RUN", "the document has not been run yet");
  }

  static HttpResponse error_from_exception() {
    try {
      throw;
    } catch (const ApiError& e) {
      return error_response(e.status, e.code, e.what(), e.field, e.extra);
    } catch (const ConstraintConflict& e) {
      Json pairs = Json::array();
      for (const auto& [a, b] : e.pairs()) pairs.push_back({a, b});
      return error_response(422, "CONSTRAINT_CONFLICT", e.what(), e.field(), {{"pairs", pairs}});
    } catch (const ParseError& e) {
      return error_response(422, "PARSE_ERROR", e.what(), e.field());
    } catch (const ValidationError& e) {
      return error_response(422, "VALIDATION_ERROR", e.what(), e.field());
    } catch (const TrainingError& e) {
      return error_response(500, "TRAINING_ERROR", e.what());
    } catch (const std::exception& e) {
      return error_response(500, "INTERNAL", e.what());
    }
  }

  // Runs `work` on a background thread holding the session lock; waits up to
  // the configured timeout and answers 202 with a polling handle beyond it.
  HttpResponse launch(const std::shared_ptr<Session>& s, const std::string& kind,
                      std::function<HttpResponse(Session&)> work) {
    bool expected = false;
    if (!s->busy.compare_exchange_strong(expected, true)) {
      throw ApiError(409, "BUSY", "a run or refinement is in progress for this document");
    }
    auto job = std::make_shared<Job>();
    job->kind = kind;
    {
      std::lock_guard guard(s->jobs_mutex);
      job->id = "j" + std::to_string(++s->job_counter);
      s->jobs[job->id] = job;
    }
    auto body = [this, s, job, work = std::move(work)] {
      HttpResponse result;
      s->lock.lock();
      try {
        result = work(*s);
        publish(*s);
        persist(*s);
      } catch (...) {
        result = error_from_exception();
      }
      s->lock.unlock();
      s->busy.store(false);
      {
        std::lock_guard guard(job->mutex);
        job->result = std::move(result);
        job->done = true;
      }
      job->cv.notify_all();
    };
    {
      std::lock_guard guard(threads_mutex);
      threads.emplace_back(std::move(body));
    }
    std::unique_lock guard(job->mutex);
    if (job->cv.wait_for(guard, options.run_timeout, [&] { return job->done; })) return job->result;
    return json_response(202, {{"job_id", job->id},
                               {"kind", kind},
                               {"status", "running"},
                               {"poll", "/documents/" + s->id + "/jobs/" + job->id}});
  }

  // ---- endpoints ----

  HttpResponse create_document(const HttpRequest& req) {
    IngestResult ingest = ingest_document(req.body);
    auto s = std::make_shared<Session>();
    {
      std::lock_guard guard(sessions_mutex);
      s->id = "d" + std::to_string(next_id++);
      s->dir = fs::path(options.data_dir) / s->id;
      fs::create_directories(s->dir);
      s->input = std::move(ingest.doc);
      publish(*s);
      persist(*s);
      sessions[s->id] = s;
    }
    return json_response(201, {{"doc_id", s->id},
                               {"source_doc_id", s->input.doc_id},
                               {"words", s->input.words.size()},
                               {"warnings", ingest.warnings}});
  }

  HttpResponse list_documents() {
    Json ids = Json::array();
    std::lock_guard guard(sessions_mutex);
    for (const auto& [id, s] : sessions) ids.push_back(id);
    return json_response(200, {{"documents", ids}});
  }

  HttpResponse status(const std::shared_ptr<Session>& s) {
    const auto snap = s->read();
    Json jobs = Json::array();
    {
      std::lock_guard guard(s->jobs_mutex);
      for (const auto& [id, job] : s->jobs) {
        std::lock_guard jg(job->mutex);
        jobs.push_back({{"job_id", id}, {"kind", job->kind}, {"status", job->done ? "done" : "running"}});
      }
    }
    return json_response(200, {{"doc_id", s->id},
                               {"source_doc_id", s->input.doc_id},
                               {"words", s->input.words.size()},
                               {"state", snap->run ? "ready" : "uploaded"},
                               {"busy", s->busy.load()},
                               {"clusters", snap->clusters_count},
                               {"user_constraints", snap->user_constraints},
                               {"edits", snap->edits},
                               {"refinements", snap->refinements},
                               {"jobs", std::move(jobs)}});
  }

  HttpResponse job_status(const std::shared_ptr<Session>& s, const std::string& job_id) {
    std::shared_ptr<Job> job;
    {
      std::lock_guard guard(s->jobs_mutex);
      const auto it = s->jobs.find(job_id);
      if (it == s->jobs.end()) throw ApiError(404, "NOT_FOUND", "unknown job '" + job_id + "'", "job_id");
      job = it->second;
    }
    std::lock_guard guard(job->mutex);
    Json body{{"job_id", job->id}, {"kind", job->kind}, {"status", job->done ? "done" : "running"}};
    if (job->done) {
      body["http_status"] = job->result.status;
      body["result"] = parse_json(job->result.body, "result");
    }
    return json_response(200, body);
  }

  HttpResponse run(const std::shared_ptr<Session>& s, const HttpRequest& req) {
    const Json body = parse_body(req.body);
    PipelineConfig cfg = options.base_config;
    apply_config_overrides(cfg, body.contains("config") ? body.at("config") : body);
    cfg.check();
    return launch(s, "run", [cfg](Session& session) {
      RefineSession st = run_pipeline(session.input, cfg);
      session.edits.clear();
      session.edited = st.doc;
      Json out{{"doc_id", session.id},
               {"summary", cluster_summary(st)},
               {"report", train_report_to_json(st.report)},
               {"constraints", constraint_stats_to_json(st.auto_constraints.stats)}};
      session.state = std::move(st);
      return json_response(200, out);
    });
  }

  HttpResponse refine_endpoint(const std::shared_ptr<Session>& s, const HttpRequest& req) {
    const Json body = parse_body(req.body);
    int epochs = -1;
    if (body.contains("epochs")) {
      if (!body["epochs"].is_number_integer()) throw ParseError("epochs", "expected an integer");
      epochs = body["epochs"].get<int>();
      if (epochs < 0) throw ValidationError("epochs must be non-negative", "epochs");
    }
    return launch(s, "refine", [epochs](Session& session) {
      require_run(session);
      RefineSession& st = *session.state;
      const int n = epochs >= 0 ? epochs : st.config.refine_epochs;
      refine(st, n);
      const RefineRecord& record = st.history.back();
      return json_response(200, {{"doc_id", session.id},
                                 {"summary", cluster_summary(st)},
                                 {"epochs", n},
                                 {"user_constraints", record.user_constraints},
                                 {"training_constraints", record.training_constraints},
                                 {"report", train_report_to_json(record.report)}});
    });
  }

  Json constraint_state(Session& s) {
    const RefineSession& st = *s.state;
    Json out{{"user_constraints", st.user_constraints.size()}, {"auto", constraint_stats_to_json(st.auto_constraints.stats)}};
    try {
      out["stats"] = constraint_stats_to_json(merge_constraints(st.auto_constraints, st.user_constraints).stats);
      out["conflicts"] = Json::array();
    } catch (const ConstraintConflict& e) {
      out["stats"] = nullptr;
      Json pairs = Json::array();
      for (const auto& [a, b] : e.pairs()) pairs.push_back({a, b});
      out["conflicts"] = std::move(pairs);
    }
    return out;
  }

  // Short mutations: refused while a long job runs, otherwise serialized.
  template <typename F>
  HttpResponse mutate(const std::shared_ptr<Session>& s, F&& f) {
    require_idle(*s);
    std::lock_guard guard(s->lock);
    require_idle(*s);
    require_run(*s);
    HttpResponse r = f(*s);
    publish(*s);
    persist(*s);
    return r;
  }

  HttpResponse add_constraints(const std::shared_ptr<Session>& s, const HttpRequest& req) {
    const Json body = parse_json(req.body, "body");
    const Json& list = body.is_array() ? body : body.contains("selections") ? body.at("selections") : Json(nullptr);
    if (!list.is_array()) throw ParseError("selections", "expected a list of selections");
    std::vector<UserSelection> selections;
    for (std::size_t i = 0; i < list.size(); ++i) {
      try {
        selections.push_back(selection_from_json(list[i]));
      } catch (const ParseError& e) {
        throw ParseError("selections[" + std::to_string(i) + "]." + e.field(), e.what());
      }
    }
    return mutate(s, [&](Session& session) {
      const auto added = add_user_selections(*session.state, selections);
      Json out = constraint_state(session);
      out["added"] = added.size();
      return json_response(200, out);
    });
  }

  HttpResponse clear_constraints(const std::shared_ptr<Session>& s) {
    return mutate(s, [&](Session& session) {
      session.state->user_constraints.clear();
      Json out = constraint_state(session);
      out["added"] = 0;
      return json_response(200, out);
    });
  }

  HttpResponse get_constraints(const std::shared_ptr<Session>& s) {
    require_idle(*s);
    std::lock_guard guard(s->lock);
    require_run(*s);
    Json out = constraint_state(*s);
    Json user = Json::array();
    for (const auto& c : s->state->user_constraints) user.push_back(constraint_to_json(c));
    out["user"] = std::move(user);
    return json_response(200, out);
  }

  HttpResponse add_edit(const std::shared_ptr<Session>& s, const HttpRequest& req) {
    const Json body = parse_json(req.body, "body");
    if (!body.is_object() || !body.contains("cluster_id")) throw ParseError("cluster_id", "missing field");
    if (!body["cluster_id"].is_number_integer()) throw ParseError("cluster_id", "expected an integer");
    const int cluster_id = body["cluster_id"].get<int>();
    const EditSpec spec = edit_spec_from_json(body.contains("spec") ? body.at("spec") : body);
    return mutate(s, [&](Session& session) {
      auto [doc, entry] = apply_edit(session.edited, session.state->assignment, cluster_id, spec);
      session.edited = std::move(doc);
      session.edits.push_back(entry);
      return json_response(200, edit_entry_to_json(entry));
    });
  }

  HttpResponse get_edits(const std::shared_ptr<Session>& s) {
    require_idle(*s);
    std::lock_guard guard(s->lock);
    Json log = Json::array();
    for (const auto& e : s->edits) log.push_back(edit_entry_to_json(e));
    return json_response(200, {{"edits", std::move(log)}});
  }

  HttpResponse render(const std::shared_ptr<Session>& s, const HttpRequest& req) {
    const auto snap = s->read();
    PagePx page;
    page.width = 1000.0;
    page.height = 1000.0 / snap->rendered.aspect_ratio;
    auto number = [&](const char* key, double& out) {
      const auto it = req.query.find(key);
      if (it == req.query.end()) return;
      try {
        out = std::stod(it->second);
      } catch (const std::exception&) {
        throw ValidationError(std::string(key) + " must be a number", key);
      }
    };
    number("width", page.width);
    number("height", page.height);
    return {200, "image/svg+xml", render_svg(snap->rendered, snap->run ? &snap->assignment : nullptr, page)};
  }

  HttpResponse route(const HttpRequest& req) {
    const auto parts = split_path(req.path);
    const std::string& m = req.method;
    auto method_not_allowed = [&] { return error_response(405, "METHOD_NOT_ALLOWED", m + " " + req.path); };
    if (parts.size() == 1 && parts[0] == "health") return json_response(200, {{"status", "ok"}});
    if (parts.empty() || parts[0] != "documents") {
      throw ApiError(404, "NOT_FOUND", "no route for " + req.path, "path");
    }
    if (parts.size() == 1) {
      if (m == "POST") return create_document(req);
      if (m == "GET") return list_documents();
      return method_not_allowed();
    }
    const auto s = find(parts[1]);
    if (parts.size() == 2) return m == "GET" ? status(s) : method_not_allowed();
    const std::string& what = parts[2];
    if (parts.size() == 4 && what == "jobs") return m == "GET" ? job_status(s, parts[3]) : method_not_allowed();
    if (parts.size() != 3) throw ApiError(404, "NOT_FOUND", "no route for " + req.path, "path");
    if (what == "run") return m == "POST" ? run(s, req) : method_not_allowed();
    if (what == "refine") return m == "POST" ? refine_endpoint(s, req) : method_not_allowed();
    if (what == "clusters" || what == "projection") {
      if (m != "GET") return method_not_allowed();
      const auto snap = s->read();
      if (!snap->run) throw ApiError(409, "NOT_RUN", "the document has not been run yet");
      return {200, "application/json", what == "clusters" ? snap->clusters : snap->projection};
    }
    if (what == "constraints") {
      if (m == "POST") return add_constraints(s, req);
      if (m == "DELETE") return clear_constraints(s);
      if (m == "GET") return get_constraints(s);
      return method_not_allowed();
    }
    if (what == "edits") {
      if (m == "POST") return add_edit(s, req);
      if (m == "GET") return get_edits(s);
      return method_not_allowed();
    }
    if (what == "render.svg") return m == "GET" ? render(s, req) : method_not_allowed();
    throw ApiError(404, "NOT_FOUND", "no route for " + req.path, "path");
  }
};

ServiceCore::ServiceCore(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

ServiceCore::~ServiceCore() = default;

HttpResponse ServiceCore::handle(const HttpRequest& request) {
  try {
    return impl_->route(request);
  } catch (...) {
    return Impl::error_from_exception();
  }
}

void ServiceCore::wait_idle() { impl_->join_all(); }

const ServiceOptions& ServiceCore::options() const noexcept { return impl_->options; }

struct HttpService::Impl {
  ServiceCore core;
  httplib::Server server;

  explicit Impl(ServiceOptions options) : core(std::move(options)) {
    const std::string origin = core.options().cors_origin;
    server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                                {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      HttpRequest r{req.method, req.path, {}, req.body};
      for (const auto& [k, v] : req.params) r.query.emplace(k, v);
      const HttpResponse out = core.handle(r);
      res.status = out.status;
      res.set_content(out.body, out.content_type);
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
    server.Delete(".*", forward);
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }
};

HttpService::HttpService(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

HttpService::~HttpService() {
  stop();
  impl_->core.wait_idle();
}

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw std::runtime_error("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpService::listen() { impl_->server.listen_after_bind(); }

void HttpService::stop() { impl_->server.stop(); }

ServiceCore& HttpService::core() noexcept { return impl_->core; }

}  // namespace docaff
