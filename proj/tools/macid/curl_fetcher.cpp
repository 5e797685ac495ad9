#include "curl_fetcher.hpp"

#include <curl/curl.h>

#include <memory>
#include <stdexcept>

namespace macid_tools {

namespace {

auto append(char* data, std::size_t size, std::size_t n, void* user)
    -> std::size_t {
  static_cast<std::string*>(user)->append(data, size * n);
  return size * n;
}

struct CurlGlobal {
  CurlGlobal() { curl_global_init(CURL_GLOBAL_DEFAULT); }
  ~CurlGlobal() { curl_global_cleanup(); }
};

} // namespace

auto curl_fetch(const std::string& url) -> std::string {
  static CurlGlobal global;
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl{curl_easy_init(),
                                                           curl_easy_cleanup};
  if (!curl)
    throw std::runtime_error("curl initialisation failed");
  std::string body;
  char error[CURL_ERROR_SIZE] = {};
  curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, append);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &body);
  curl_easy_setopt(curl.get(), CURLOPT_ERRORBUFFER, error);
  curl_easy_setopt(curl.get(), CURLOPT_USERAGENT, "macid-fetch/1");
  if (const auto rc = curl_easy_perform(curl.get()); rc != CURLE_OK)
    throw std::runtime_error("fetch '" + url + "' failed: " +
                             (error[0] ? error : curl_easy_strerror(rc)));
  long status = 0;
  curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &status);
  if (status >= 400)
    throw std::runtime_error("fetch '" + url + "' returned HTTP " +
                             std::to_string(status));
  return body;
}

} // namespace macid_tools
