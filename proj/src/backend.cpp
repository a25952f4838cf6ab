#include "riskplan/backend.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

// keep the HTTP dependency lean: no TLS here, endpoints behind a local proxy
#include "httplib.h"

namespace riskplan::llm {

StubBackend::StubBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {
  if (replies_.empty()) throw BackendError("stub backend needs at least one scripted reply");
}

StubBackend StubBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw BackendError("cannot read stub reply file " + path);
  std::vector<std::string> replies;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    replies.push_back(line);
  }
  return StubBackend(std::move(replies));
}

std::string StubBackend::complete(const std::string& prompt) {
  prompts_.push_back(prompt);
  std::size_t index = next_ < replies_.size() ? next_ : replies_.size() - 1;
  ++next_;
  return replies_[index];
}

HttpConfig http_config_from_env() {
  HttpConfig cfg;
  const char* url = std::getenv("SP_LLM_URL");
  const char* model = std::getenv("SP_LLM_MODEL");
  const char* key = std::getenv("SP_LLM_KEY");
  if (!url || !*url) throw BackendError("SP_LLM_URL is not set");
  if (!model || !*model) throw BackendError("SP_LLM_MODEL is not set");
  cfg.url = url;
  cfg.model = model;
  cfg.key = key ? key : "";
  return cfg;
}

std::string build_request_body(const HttpConfig& cfg, const std::string& prompt) {
  nlohmann::json body = {
      {"model", cfg.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", 0},
  };
  return body.dump();
}

std::string extract_reply(const std::string& response_json, const std::string& reply_path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(response_json);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("backend returned invalid document: ") + e.what());
  }
  const nlohmann::json* node = &doc;
  std::istringstream path(reply_path);
  std::string part;
  while (std::getline(path, part, '.')) {
    if (!part.empty() && part.find_first_not_of("0123456789") == std::string::npos) {
      std::size_t index = std::stoul(part);
      if (!node->is_array() || index >= node->size())
        throw BackendError("reply path walks off the document at " + part);
      node = &(*node)[index];
    } else {
      if (!node->is_object() || !node->contains(part))
        throw BackendError("reply path walks off the document at " + part);
      node = &(*node)[part];
    }
  }
  if (!node->is_string()) throw BackendError("reply path does not end at a string");
  return node->get<std::string>();
}

std::string HttpBackend::complete(const std::string& prompt) {
  // split scheme://host[:port]/path
  std::string url = cfg_.url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw BackendError("bad backend url " + url);
  std::string rest = url.substr(scheme_end + 3);
  auto slash = rest.find('/');
  std::string host = slash == std::string::npos ? rest : rest.substr(0, slash);
  std::string path = slash == std::string::npos ? "/" : rest.substr(slash);

  httplib::Client client(url.substr(0, scheme_end + 3) + host);
  client.set_connection_timeout(cfg_.timeout_seconds, 0);
  client.set_read_timeout(cfg_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!cfg_.key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.key);

  std::string body = build_request_body(cfg_, prompt);
  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
    auto res = client.Post(path, headers, body, "application/json");
    if (res && res->status >= 200 && res->status < 300)
      return extract_reply(res->body, cfg_.reply_path);
    last_error = res ? "status " + std::to_string(res->status)
                     : "transport error " + httplib::to_string(res.error());
  }
  throw BackendError("backend unreachable after retries: " + last_error);
}

}  // namespace riskplan::llm
