#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <regex>

#include "workbench/error.hpp"
#include "workbench/provider.hpp"

namespace workbench {

namespace {

class HttpsTransport final : public Transport {
 public:
  TransportResponse post(const TransportRequest& request) override {
    static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(request.url, m, kUrl)) {
      fail(ErrorCode::InvalidArgument, "bad provider endpoint " + request.url);
    }
    httplib::Client client(m[1].str());
    client.set_connection_timeout(30);
    client.set_read_timeout(900);
    client.set_write_timeout(120);
    httplib::Headers headers{{"Authorization", "Bearer " + request.api_key}};
    const std::string path = m[2].matched ? m[2].str() : "/";
    auto result = client.Post(path, headers, request.body, "application/json");
    if (!result) {
      throw std::runtime_error("transport error: " + httplib::to_string(result.error()));
    }
    return TransportResponse{result->status, result->body};
  }
};

}  // namespace

std::shared_ptr<Transport> make_https_transport() { return std::make_shared<HttpsTransport>(); }

}  // namespace workbench
