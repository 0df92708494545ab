#pragma once

#include <map>
#include <string>

namespace icr {

struct HttpResponse {
    int status = 0;         // 0 means transport failure (connect/timeout)
    std::string body;
    std::string transport_error;  // set when status == 0
};

// POSTs a JSON body to `url` ("http://host[:port]/path") and returns the raw
// response. Never throws on transport failure; callers decide retryability.
HttpResponse http_post_json(const std::string& url, const std::string& body, int timeout_ms,
                            const std::map<std::string, std::string>& headers = {});

}  // namespace icr
