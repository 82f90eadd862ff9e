#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "schemamap/catalog.hpp"
#include "schemamap/engine.hpp"
#include "schemamap/estimator.hpp"
#include "schemamap/wire.hpp"

namespace httplib {
class Server;
}

namespace schemamap {

inline constexpr const char *kCatalogDirEnv = "SCHEMAMAP_CATALOG_DIR";

/// $SCHEMAMAP_CATALOG_DIR if set, else ./data/catalogs.
std::filesystem::path default_catalog_dir();

class UnknownCatalog : public std::runtime_error {
public:
  explicit UnknownCatalog(const std::string &name) : std::runtime_error("unknown catalog '" + name + "'") {}
};

struct LoadedCatalog {
  Catalog catalog;
  Models models;
};

/// Catalogs live in <dir>/<name>/schema.json. Loaded lazily, then shared
/// read-only by every session.
class CatalogRegistry {
public:
  explicit CatalogRegistry(std::filesystem::path dir);

  const std::filesystem::path &dir() const { return dir_; }
  std::vector<std::string> names() const;
  /// Throws UnknownCatalog when no such directory exists, CatalogError when
  /// its config is bad.
  std::shared_ptr<const LoadedCatalog> get(const std::string &name);

private:
  std::filesystem::path dir_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const LoadedCatalog>> loaded_;
};

/// Catalog description: {"version", "name", "relations": [{"name", "rows",
/// "columns": [{"name", "type", "distinct", "max_length"}]}], "join_edges"}.
nlohmann::ordered_json catalog_to_json(const Catalog &catalog);

/// Loads a catalog given either a registry name or a path to a schema.json
/// (or a directory holding one).
std::shared_ptr<const LoadedCatalog> resolve_catalog(CatalogRegistry &registry, const std::string &name_or_path);

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path catalog_dir = default_catalog_dir();
  std::chrono::milliseconds budget{60'000};
  /// Validation threads per session.
  std::size_t workers = 1;
  /// When set, finished reports are written to <persist_dir>/<session>.json.
  std::filesystem::path persist_dir;
};

/// Reads {"host", "port", "budget_ms", "catalog_dir", "workers",
/// "persist_dir"}; absent keys keep their defaults.
ServiceConfig load_service_config(const std::filesystem::path &file);

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Error body: {"version": 1, "error": {"code", "message", ...}}. Parse
/// errors add "location" ({"section": "rows"|"metadata", "row", "column"})
/// and "position" (byte offset in the cell).
HttpResponse error_response(int status, std::string_view code, std::string_view message,
                            nlohmann::ordered_json extra = nullptr);

class Service {
public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service &) = delete;
  Service &operator=(const Service &) = delete;

  /// Routes one request. `query` holds decoded query parameters.
  HttpResponse handle(std::string_view method, std::string_view path,
                      const std::map<std::string, std::string> &query = {}, std::string_view body = {});

  /// Blocks until stop(). Throws std::runtime_error if the port cannot be bound.
  void listen();
  /// Binds an ephemeral port, returns it; call listen_after_bind() to serve.
  int bind_any_port();
  void listen_after_bind();
  void stop();
  bool running() const;

  /// Blocks until every session has finished.
  void wait_idle();

  CatalogRegistry &registry() { return registry_; }
  const ServiceConfig &config() const { return config_; }

private:
  struct Session;

  HttpResponse list_catalogs();
  HttpResponse catalog_schema(const std::string &name);
  HttpResponse start_session(std::string_view body);
  HttpResponse session_status(const std::string &id);
  HttpResponse session_query(const std::string &id, const std::string &k);
  HttpResponse session_graph(const std::string &id, const std::string &k, const std::map<std::string, std::string> &query);
  std::shared_ptr<Session> find(const std::string &id);
  std::string fresh_id();

  ServiceConfig config_;
  CatalogRegistry registry_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::vector<std::thread> threads_;
  std::uint64_t id_state_;
  std::unique_ptr<httplib::Server> server_;
};

/// Runs the service until SIGINT or SIGTERM. Prints the bound address.
int serve_until_signal(const ServiceConfig &config);

} // namespace schemamap
