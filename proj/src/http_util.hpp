#pragma once

#include <string>

#include "wugdef/error.hpp"

namespace wugdef::detail {

struct Endpoint {
  std::string origin;     // scheme://host[:port]
  std::string base_path;  // "" or "/prefix" (no trailing slash)
};

inline Endpoint parse_endpoint(const std::string& url, ErrorCode on_error) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0) {
    throw Error(on_error, "unsupported URL '" + url + "' (expected http://host:port)");
  }
  auto path = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, path);
  if (path != std::string::npos) {
    e.base_path = url.substr(path);
    while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
  }
  return e;
}

}  // namespace wugdef::detail
