#include <algorithm>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "roomgroup/bedmap.hpp"
#include "roomgroup/catalog.hpp"
#include "roomgroup/errors.hpp"

namespace roomgroup {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string host;  // scheme://host:port
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0)
    fail(ErrorKind::ConfigError, "predictor endpoint must be an http:// URL, got '" + url + "'");
  const auto slash = url.find('/', scheme.size());
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::string reminder(const std::vector<std::string>& options) {
  std::string text = "select exactly one option; the answer must be one of: ";
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i) text += "; ";
    text += options[i];
  }
  return text;
}

}  // namespace

RemoteService::RemoteService(RemoteOptions options) : options_(std::move(options)) {
  const Endpoint ep = split_endpoint(options_.endpoint);
  host_ = ep.host;
  path_ = ep.path;
  if (options_.retries < 0) fail(ErrorKind::ConfigError, "retries must be non-negative");
}

std::string RemoteService::post(const PredictionRequest& request,
                                const std::string& prompt_context) {
  const json body{{"group_id", request.group_id},
                  {"image_uris", request.image_uris},
                  {"options", request.options},
                  {"prompt_context", prompt_context}};
  const std::string payload = body.dump();

  httplib::Client client(host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!options_.token.empty()) headers.emplace("Authorization", "Bearer " + options_.token);

  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    ++requests_sent_;
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
    } else {
      try {
        const json reply = json::parse(res->body);
        return reply.at("bed_type").get<std::string>();
      } catch (const json::exception& e) {
        last_error = std::string("malformed response: ") + e.what();
      }
    }
    if (attempt < options_.retries)
      std::this_thread::sleep_for(std::chrono::milliseconds(50 * (attempt + 1)));
  }
  fail(ErrorKind::RemoteFailure, "predictor at " + options_.endpoint + " failed for group '" +
                                     request.group_id + "' after " +
                                     std::to_string(options_.retries + 1) +
                                     " attempt(s): " + last_error);
}

std::string RemoteService::predict(const PredictionRequest& request) {
  if (request.options.empty()) fail(ErrorKind::ConfigError, "no options to offer the predictor");
  auto offered = [&](const std::string& answer) {
    return std::find(request.options.begin(), request.options.end(), canonical_text(answer)) !=
           request.options.end();
  };
  std::string answer = post(request, kDefaultPromptContext);
  if (offered(answer)) return canonical_text(answer);
  answer = post(request, reminder(request.options));
  if (offered(answer)) return canonical_text(answer);
  fail(ErrorKind::PredictorViolation, "predictor answered '" + answer + "' for group '" +
                                          request.group_id + "', which is not an offered option");
}

std::string remote_predict(const PredictionRequest& request, const RemoteOptions& options) {
  RemoteService service(options);
  return service.predict(request);
}

}  // namespace roomgroup
