#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace gxs {

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Minimal blocking HTTP seam. Implementations throw Error(NetworkError) when
/// no response could be obtained; any HTTP status is returned as-is.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;

  virtual HttpResponse get(const std::string& url, const HttpHeaders& headers,
                           std::chrono::milliseconds timeout) = 0;
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const HttpHeaders& headers,
                            std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed transport (http and https).
class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse get(const std::string& url, const HttpHeaders& headers,
                   std::chrono::milliseconds timeout) override;
  HttpResponse post(const std::string& url, const std::string& body, const HttpHeaders& headers,
                    std::chrono::milliseconds timeout) override;
};

struct ParsedUrl {
  std::string scheme_host_port;  // e.g. "https://api.example.com:443"
  std::string path;              // always starts with '/'
};

/// Splits an absolute http(s) URL. Throws BadParam on anything else.
ParsedUrl parse_url(const std::string& url);

}  // namespace gxs
