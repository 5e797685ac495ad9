#pragma once

#include <string>

namespace macid_tools {

/// Downloads `url` with libcurl. Any scheme libcurl supports works,
/// including file:// for offline mirrors. Throws on transport errors and
/// HTTP statuses >= 400.
auto curl_fetch(const std::string& url) -> std::string;

} // namespace macid_tools
