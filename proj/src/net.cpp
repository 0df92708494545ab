#include "icr/net.hpp"

#include <httplib.h>

#include "icr/common.hpp"

namespace icr {

HttpResponse http_post_json(const std::string& url, const std::string& body, int timeout_ms,
                            const std::map<std::string, std::string>& headers) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("malformed endpoint URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(0, timeout_ms * 1000);
    client.set_read_timeout(0, timeout_ms * 1000);
    client.set_write_timeout(0, timeout_ms * 1000);
    httplib::Headers hdrs;
    for (const auto& [k, v] : headers) hdrs.emplace(k, v);

    auto result = client.Post(path, hdrs, body, "application/json");
    HttpResponse out;
    if (!result) {
        out.transport_error = httplib::to_string(result.error());
        return out;
    }
    out.status = result->status;
    out.body = result->body;
    return out;
}

}  // namespace icr
