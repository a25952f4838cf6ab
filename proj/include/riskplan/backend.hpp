#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace riskplan::llm {

struct BackendError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One blocking chat call per request. Implementations: HttpBackend for a
// real endpoint, StubBackend for offline scripted replies.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string complete(const std::string& prompt) = 0;
  virtual std::string name() const = 0;
};

// Scripted replies consumed in order; the last reply repeats once the script
// runs out. Records every prompt it receives so tests can snapshot them.
class StubBackend : public LlmBackend {
 public:
  explicit StubBackend(std::vector<std::string> replies);
  static StubBackend from_file(const std::string& path);

  std::string complete(const std::string& prompt) override;
  std::string name() const override { return "stub"; }

  const std::vector<std::string>& prompts() const { return prompts_; }

 private:
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
  std::vector<std::string> prompts_;
};

struct HttpConfig {
  std::string url;    // SP_LLM_URL
  std::string model;  // SP_LLM_MODEL
  std::string key;    // SP_LLM_KEY
  std::string reply_path = "choices.0.message.content";
  int timeout_seconds = 30;
  int retries = 2;
};

// Reads SP_LLM_URL, SP_LLM_MODEL, SP_LLM_KEY; throws when URL or model is
// missing.
HttpConfig http_config_from_env();

// {"model": ..., "messages": [{"role": "user", "content": prompt}],
//  "temperature": 0}
std::string build_request_body(const HttpConfig& cfg, const std::string& prompt);

// Walks a dotted path (object keys and array indices) through the response
// document and returns the string found there.
std::string extract_reply(const std::string& response_json, const std::string& reply_path);

class HttpBackend : public LlmBackend {
 public:
  explicit HttpBackend(HttpConfig cfg) : cfg_(std::move(cfg)) {}
  std::string complete(const std::string& prompt) override;
  std::string name() const override { return "llm"; }

 private:
  HttpConfig cfg_;
};

}  // namespace riskplan::llm
