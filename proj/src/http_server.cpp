#include <httplib.h>

#include <spdlog/spdlog.h>

#include "grow/service.hpp"

namespace grow {

bool run_http_server(ApiService& service, const std::string& host, int port,
                     const std::optional<std::filesystem::path>& static_dir) {
  httplib::Server server;
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    ApiRequest api{req.method, req.path, req.get_header_value("Authorization"), req.body};
    const ApiResponse out = service.handle(api);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  const std::string pattern = R"(/api/.*)";
  server.Get(pattern, forward);
  server.Post(pattern, forward);
  server.Put(pattern, forward);
  server.Delete(pattern, forward);
  server.Patch(pattern, forward);
  if (static_dir && !server.set_mount_point("/", static_dir->string())) {
    spdlog::error("static directory {} not found", static_dir->string());
    return false;
  }
  server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::info("{} {} -> {}", req.method, req.path, res.status);
  });
  spdlog::info("listening on {}:{}", host, port);
  return server.listen(host, port);
}

}  // namespace grow
