#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "docaff/config.hpp"

namespace docaff {

struct ServiceOptions {
  std::string data_dir = "docaff-data";
  PipelineConfig base_config;  // defaults for every run; request bodies override
  std::chrono::milliseconds run_timeout{120000};
  std::string cors_origin = "*";
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Request routing, session state and persistence, independent of the HTTP
// transport. Thread-safe: mutations are serialized per session and reads are
// served from the last published snapshot.
class ServiceCore {
 public:
  explicit ServiceCore(ServiceOptions options);
  ~ServiceCore();
  ServiceCore(const ServiceCore&) = delete;
  ServiceCore& operator=(const ServiceCore&) = delete;

  HttpResponse handle(const HttpRequest& request);

  // Blocks until every background job has finished.
  void wait_idle();

  const ServiceOptions& options() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// cpp-httplib front end over a ServiceCore.
class HttpService {
 public:
  explicit HttpService(ServiceOptions options);
  ~HttpService();

  // Binds to host:port (0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  // Serves until stop() is called.
  void listen();
  void stop();
  ServiceCore& core() noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace docaff
