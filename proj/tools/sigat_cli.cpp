#include <cstdio>
#include <memory>

#include <curl/curl.h>

#include "sigat/cli.hpp"

namespace {

// Plain HTTP(S) GET into a file; redirects followed, HTTP errors fatal.
void curl_download(const std::string& url, const std::filesystem::path& dest) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(dest.string().c_str(), "wb"), &std::fclose);
  if (!file) throw sigat::DataError("cannot write " + dest.string());
  std::unique_ptr<CURL, void (*)(CURL*)> curl(curl_easy_init(), &curl_easy_cleanup);
  if (!curl) throw sigat::DataError("curl initialization failed");
  char error[CURL_ERROR_SIZE] = {0};
  curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, file.get());
  curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_FAILONERROR, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_ERRORBUFFER, error);
  const CURLcode rc = curl_easy_perform(curl.get());
  if (rc != CURLE_OK) {
    file.reset();
    std::filesystem::remove(dest);
    throw sigat::DataError("download of " + url + " failed: " + (error[0] ? error : curl_easy_strerror(rc)));
  }
}

}  // namespace

int main(int argc, char** argv) {
  curl_global_init(CURL_GLOBAL_DEFAULT);
  const int code = sigat::cli::run({argv + 1, argv + argc}, std::cout, std::cerr, curl_download);
  curl_global_cleanup();
  return code;
}
