#include "schemamap/service.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <httplib.h>

#include "schemamap/explain.hpp"

namespace schemamap {

namespace fs = std::filesystem;

fs::path default_catalog_dir() {
  if (const char *env = std::getenv(kCatalogDirEnv); env && *env) return env;
  return fs::path("data") / "catalogs";
}

CatalogRegistry::CatalogRegistry(fs::path dir) : dir_(std::move(dir)) {}

std::vector<std::string> CatalogRegistry::names() const {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto &entry : fs::directory_iterator(dir_, ec))
    if (entry.is_directory() && fs::exists(entry.path() / "schema.json")) out.push_back(entry.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

std::shared_ptr<const LoadedCatalog> CatalogRegistry::get(const std::string &name) {
  std::lock_guard lock(mu_);
  if (auto it = loaded_.find(name); it != loaded_.end()) return it->second;
  if (name.empty() || name.find('/') != std::string::npos || name.find("..") != std::string::npos)
    throw UnknownCatalog(name);
  const auto config = dir_ / name / "schema.json";
  if (!fs::exists(config)) throw UnknownCatalog(name);
  auto catalog = load_catalog(config);
  auto models = train_models(catalog);
  auto loaded = std::make_shared<const LoadedCatalog>(LoadedCatalog{std::move(catalog), std::move(models)});
  loaded_.emplace(name, loaded);
  return loaded;
}

std::shared_ptr<const LoadedCatalog> resolve_catalog(CatalogRegistry &registry, const std::string &name_or_path) {
  fs::path p(name_or_path);
  if (fs::is_directory(p) && fs::exists(p / "schema.json")) p /= "schema.json";
  if (fs::is_regular_file(p)) {
    auto catalog = load_catalog(p);
    auto models = train_models(catalog);
    return std::make_shared<const LoadedCatalog>(LoadedCatalog{std::move(catalog), std::move(models)});
  }
  return registry.get(name_or_path);
}

nlohmann::ordered_json catalog_to_json(const Catalog &catalog) {
  nlohmann::ordered_json out;
  out["version"] = kWireVersion;
  out["name"] = catalog.name();
  auto relations = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < catalog.relations().size(); ++r) {
    const auto &rel = catalog.relation(r);
    auto columns = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < rel.columns.size(); ++c) {
      const auto &st = catalog.stats({r, c});
      columns.push_back({{"name", rel.columns[c]},
                         {"type", to_string(st.inferred_type)},
                         {"distinct", st.distinct_count},
                         {"max_length", st.max_length}});
    }
    relations.push_back({{"name", rel.name}, {"rows", rel.rows.size()}, {"columns", std::move(columns)}});
  }
  out["relations"] = std::move(relations);
  auto edges = nlohmann::ordered_json::array();
  for (const auto &e : catalog.join_edges())
    edges.push_back({{"left", catalog.qualified_name(e.left)}, {"right", catalog.qualified_name(e.right)}});
  out["join_edges"] = std::move(edges);
  return out;
}

ServiceConfig load_service_config(const fs::path &file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read service config " + file.string());
  ServiceConfig cfg;
  try {
    const auto doc = nlohmann::json::parse(in);
    cfg.host = doc.value("host", cfg.host);
    cfg.port = doc.value("port", cfg.port);
    if (doc.contains("budget_ms")) cfg.budget = std::chrono::milliseconds(doc.at("budget_ms").get<long long>());
    if (doc.contains("catalog_dir")) {
      fs::path dir = doc.at("catalog_dir").get<std::string>();
      cfg.catalog_dir = dir.is_relative() ? file.parent_path() / dir : dir;
    }
    cfg.workers = doc.value("workers", cfg.workers);
    if (doc.contains("persist_dir")) cfg.persist_dir = doc.at("persist_dir").get<std::string>();
  } catch (const nlohmann::json::exception &e) {
    throw std::runtime_error("bad service config " + file.string() + ": " + e.what());
  }
  return cfg;
}

HttpResponse error_response(int status, std::string_view code, std::string_view message, nlohmann::ordered_json extra) {
  nlohmann::ordered_json err{{"code", code}, {"message", message}};
  if (extra.is_object()) err.update(extra);
  nlohmann::ordered_json body{{"version", kWireVersion}, {"error", std::move(err)}};
  return {status, "application/json", body.dump() + "\n"};
}

namespace {

HttpResponse json_response(int status, const nlohmann::ordered_json &body) {
  return {status, "application/json", body.dump(2) + "\n"};
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const std::size_t start = i;
    while (i < path.size() && path[i] != '/') ++i;
    if (i > start) parts.emplace_back(path.substr(start, i - start));
  }
  return parts;
}

std::optional<std::size_t> parse_index(const std::string &s) {
  if (s.empty() || s.size() > 9) return std::nullopt;
  std::size_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<std::size_t>(c - '0');
  }
  return v;
}

} // namespace

struct Service::Session {
  Session(std::string id_, std::shared_ptr<const LoadedCatalog> catalog_, SynthesisTask task_, EngineConfig config_)
      : id(std::move(id_)), catalog(std::move(catalog_)), task(std::move(task_)), config(config_) {}

  const std::string id;
  const std::shared_ptr<const LoadedCatalog> catalog;
  const SynthesisTask task;
  const EngineConfig config;

  std::mutex mu;
  bool done = false;
  SynthesisReport report;
  std::string status_body; // cached once done
  std::map<std::string, std::string> graph_cache;
};

Service::Service(ServiceConfig config)
    : config_(std::move(config)), registry_(config_.catalog_dir), id_state_(std::random_device{}()) {
  id_state_ = (id_state_ << 32) ^ std::random_device{}();
}

Service::~Service() {
  stop();
  wait_idle();
}

void Service::wait_idle() {
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(mu_);
    threads.swap(threads_);
  }
  for (auto &t : threads) t.join();
}

std::string Service::fresh_id() {
  // splitmix64 over a randomly seeded counter
  std::uint64_t z = (id_state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(z));
  return buf;
}

std::shared_ptr<Service::Session> Service::find(const std::string &id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

HttpResponse Service::handle(std::string_view method, std::string_view path,
                             const std::map<std::string, std::string> &query, std::string_view body) {
  const auto parts = split_path(path);
  const bool get = method == "GET";
  try {
    if (parts.size() == 1 && parts[0] == "catalogs" && get) return list_catalogs();
    if (parts.size() == 3 && parts[0] == "catalogs" && parts[2] == "schema" && get) return catalog_schema(parts[1]);
    if (parts.size() == 1 && parts[0] == "synthesize" && method == "POST") return start_session(body);
    if (parts.size() >= 2 && parts[0] == "sessions" && get) {
      if (parts.size() == 2) return session_status(parts[1]);
      if (parts.size() == 4 && parts[2] == "queries") return session_query(parts[1], parts[3]);
      if (parts.size() == 5 && parts[2] == "queries" && parts[4] == "graph")
        return session_graph(parts[1], parts[3], query);
    }
    return error_response(404, "not_found", "no route for " + std::string(method) + " " + std::string(path));
  } catch (const std::exception &e) {
    return error_response(500, "internal", e.what());
  }
}

HttpResponse Service::list_catalogs() {
  auto list = nlohmann::ordered_json::array();
  for (const auto &name : registry_.names()) {
    try {
      const auto loaded = registry_.get(name);
      auto columns = nlohmann::ordered_json::array();
      for (const auto &rel : loaded->catalog.relations()) columns.push_back(rel.columns.size());
      list.push_back({{"name", name}, {"relations", loaded->catalog.relations().size()}, {"columns", std::move(columns)}});
    } catch (const std::exception &e) {
      list.push_back({{"name", name}, {"error", e.what()}});
    }
  }
  return json_response(200, {{"version", kWireVersion}, {"catalogs", std::move(list)}});
}

HttpResponse Service::catalog_schema(const std::string &name) {
  try {
    return json_response(200, catalog_to_json(registry_.get(name)->catalog));
  } catch (const UnknownCatalog &e) {
    return error_response(404, "unknown_catalog", e.what());
  } catch (const CatalogError &e) {
    return error_response(500, "bad_catalog", e.what());
  }
}

// Body: {"catalog": name, "task": <task document>, "options": {...}}. The
// catalog may also come from the task document's config block.
HttpResponse Service::start_session(std::string_view body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception &e) {
    return error_response(400, "bad_request", std::string("body is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("task")) return error_response(400, "bad_request", "body lacks \"task\"");

  TaskDocument task_doc;
  std::optional<SynthesisTask> task;
  EngineConfig config;
  config.budget = config_.budget;
  config.workers = config_.workers;
  try {
    task_doc = parse_task_document(doc.at("task"));
    if (doc.contains("options")) apply_options(config, doc.at("options"));
    task.emplace(task_doc.to_task());
  } catch (const TaskParseError &e) {
    nlohmann::ordered_json location{{"section", e.in_metadata() ? "metadata" : "rows"}, {"column", e.column()}};
    if (!e.in_metadata()) location["row"] = e.row();
    return error_response(400, "parse_error", e.what(), {{"location", location}, {"position", e.position()}});
  } catch (const std::invalid_argument &e) { // WireError, TaskError
    return error_response(400, "bad_task", e.what());
  }

  const std::string name = doc.contains("catalog") && doc.at("catalog").is_string() ? doc.at("catalog").get<std::string>()
                                                                                    : task_doc.catalog;
  if (name.empty()) return error_response(400, "bad_request", "no catalog named");
  std::shared_ptr<const LoadedCatalog> catalog;
  try {
    catalog = registry_.get(name);
  } catch (const UnknownCatalog &e) {
    return error_response(404, "unknown_catalog", e.what());
  } catch (const CatalogError &e) {
    return error_response(500, "bad_catalog", e.what());
  }

  std::lock_guard lock(mu_);
  std::string id;
  do id = fresh_id();
  while (sessions_.count(id));
  auto session = std::make_shared<Session>(id, catalog, std::move(*task), config);
  sessions_.emplace(id, session);
  threads_.emplace_back([session, persist = config_.persist_dir] {
    auto report = synthesize(session->task, session->catalog->catalog, session->catalog->models, session->config);
    nlohmann::ordered_json status{{"version", kWireVersion},
                                  {"session", session->id},
                                  {"catalog", session->catalog->catalog.name()},
                                  {"status", "done"},
                                  {"report", report_to_json(report, session->catalog->catalog)}};
    if (!persist.empty()) {
      std::error_code ec;
      fs::create_directories(persist, ec);
      std::ofstream(persist / (session->id + ".json")) << status["report"].dump(2) << "\n";
    }
    std::lock_guard session_lock(session->mu);
    session->report = std::move(report);
    session->status_body = status.dump(2) + "\n";
    session->done = true;
  });
  return json_response(202, {{"version", kWireVersion}, {"session", id}, {"status", "running"}});
}

HttpResponse Service::session_status(const std::string &id) {
  auto s = find(id);
  if (!s) return error_response(404, "unknown_session", "unknown session '" + id + "'");
  std::lock_guard lock(s->mu);
  if (!s->done)
    return json_response(200, {{"version", kWireVersion},
                               {"session", s->id},
                               {"catalog", s->catalog->catalog.name()},
                               {"status", "running"}});
  return {200, "application/json", s->status_body};
}

HttpResponse Service::session_query(const std::string &id, const std::string &k) {
  auto s = find(id);
  if (!s) return error_response(404, "unknown_session", "unknown session '" + id + "'");
  std::lock_guard lock(s->mu);
  if (!s->done) return error_response(409, "running", "session '" + id + "' has not finished");
  const auto idx = parse_index(k);
  if (!idx || *idx >= s->report.queries.size())
    return error_response(404, "unknown_query", "session '" + id + "' has no query " + k);
  auto body = query_to_json(s->report.queries[*idx], *idx, s->catalog->catalog);
  body["version"] = kWireVersion;
  return json_response(200, body);
}

HttpResponse Service::session_graph(const std::string &id, const std::string &k,
                                    const std::map<std::string, std::string> &query) {
  auto s = find(id);
  if (!s) return error_response(404, "unknown_session", "unknown session '" + id + "'");
  std::lock_guard lock(s->mu);
  if (!s->done) return error_response(409, "running", "session '" + id + "' has not finished");
  const auto idx = parse_index(k);
  if (!idx || *idx >= s->report.queries.size())
    return error_response(404, "unknown_query", "session '" + id + "' has no query " + k);

  GraphFormat format = GraphFormat::Structured;
  if (auto it = query.find("format"); it != query.end()) {
    if (it->second == "dot")
      format = GraphFormat::Dot;
    else if (it->second != "structured")
      return error_response(400, "bad_request", "unknown graph format '" + it->second + "'");
  }
  std::vector<std::size_t> selected;
  std::string selection;
  if (auto it = query.find("constraints"); it != query.end()) {
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      auto v = parse_index(item);
      if (!v) return error_response(400, "bad_request", "bad constraint index '" + item + "'");
      selected.push_back(*v);
    }
    selection = it->second;
  }
  const std::string cache_key = k + "|" + selection + "|" + (format == GraphFormat::Dot ? "dot" : "structured");
  const std::string content_type = format == GraphFormat::Dot ? "text/vnd.graphviz" : "application/json";
  if (auto it = s->graph_cache.find(cache_key); it != s->graph_cache.end()) return {200, content_type, it->second};
  try {
    auto text = render_text(to_graph(s->report.queries[*idx], s->task, s->catalog->catalog, selected), format);
    s->graph_cache.emplace(cache_key, text);
    return {200, content_type, std::move(text)};
  } catch (const std::out_of_range &e) {
    return error_response(400, "bad_request", e.what());
  }
}

// ---------------------------------------------------------------------------

namespace {

void install_routes(httplib::Server &server, Service &service) {
  auto adapt = [&service](const httplib::Request &req, httplib::Response &res) {
    std::map<std::string, std::string> query;
    for (const auto &[k, v] : req.params) query[k] = v;
    auto r = service.handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(".*", adapt);
  server.Post(".*", adapt);
}

} // namespace

void Service::listen() {
  if (bind_any_port() < 0) return;
  listen_after_bind();
}

int Service::bind_any_port() {
  {
    std::lock_guard lock(mu_);
    server_ = std::make_unique<httplib::Server>();
    install_routes(*server_, *this);
  }
  if (config_.port == 0) {
    const int port = server_->bind_to_any_port(config_.host);
    if (port < 0) throw std::runtime_error("cannot bind " + config_.host);
    return port;
  }
  if (!server_->bind_to_port(config_.host, config_.port))
    throw std::runtime_error("cannot bind " + config_.host + ":" + std::to_string(config_.port) + " (port in use?)");
  return config_.port;
}

void Service::listen_after_bind() {
  if (server_) server_->listen_after_bind();
}

void Service::stop() {
  if (server_) server_->stop();
}

bool Service::running() const { return server_ && server_->is_running(); }

int serve_until_signal(const ServiceConfig &config) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(config);
  const auto names = service.registry().names();
  if (names.empty()) {
    std::cerr << "no catalogs under " << config.catalog_dir << "\n";
    return 1;
  }
  for (const auto &n : names) service.registry().get(n); // fail at startup on a bad config
  const int port = service.bind_any_port();
  std::cerr << "listening on http://" << config.host << ":" << port << " (" << names.size() << " catalogs)\n";
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    std::cerr << "shutting down\n";
    service.stop();
  });
  service.listen_after_bind();
  // listen returned for some reason other than a signal; wake the waiter
  if (waiter.joinable()) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
  return 0;
}

} // namespace schemamap
