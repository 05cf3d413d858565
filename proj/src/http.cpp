#include <httplib.h>

#include "gxs/error.hpp"
#include "gxs/http.hpp"

namespace gxs {

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::BadParam, "not an absolute URL: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::BadParam, "unsupported URL scheme: " + url);
  }
  const auto host_start = scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = url;
    out.path = "/";
  } else {
    out.scheme_host_port = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  if (out.scheme_host_port.size() <= host_start) {
    throw Error(ErrorCode::BadParam, "URL without host: " + url);
  }
  return out;
}

namespace {

httplib::Client make_client(const ParsedUrl& u, std::chrono::milliseconds timeout) {
  httplib::Client client(u.scheme_host_port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  client.set_follow_location(true);
  return client;
}

httplib::Headers to_headers(const HttpHeaders& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

HttpResponse finish(const httplib::Result& res, const std::string& url) {
  if (!res) {
    throw Error(ErrorCode::NetworkError,
                "request to " + url + " failed: " + httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

}  // namespace

HttpResponse HttplibTransport::get(const std::string& url, const HttpHeaders& headers,
                                   std::chrono::milliseconds timeout) {
  const ParsedUrl u = parse_url(url);
  auto client = make_client(u, timeout);
  return finish(client.Get(u.path, to_headers(headers)), url);
}

HttpResponse HttplibTransport::post(const std::string& url, const std::string& body,
                                    const HttpHeaders& headers,
                                    std::chrono::milliseconds timeout) {
  const ParsedUrl u = parse_url(url);
  auto client = make_client(u, timeout);
  return finish(client.Post(u.path, to_headers(headers), body, "application/json"), url);
}

}  // namespace gxs
