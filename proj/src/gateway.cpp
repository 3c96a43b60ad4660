#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "cgbench/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "cgbench/digest.hpp"
#include "cgbench/strutil.hpp"

namespace cgbench {

namespace fs = std::filesystem;
using nlohmann::json;

const char* session_mode_name(SessionMode mode) {
  return mode == SessionMode::Individual ? "individual" : "continuous";
}

SessionMode session_mode_from_name(std::string_view name) {
  std::string n = to_lower(trim_view(name));
  if (n == "individual" || n == "single") return SessionMode::Individual;
  if (n == "continuous" || n == "session") return SessionMode::Continuous;
  throw GatewayError("unknown session mode: " + std::string(name));
}

std::vector<int> session_partition(int prompts, const SessionPolicy& policy) {
  if (prompts < 0) throw GatewayError("session_partition: negative prompt count");
  std::vector<int> out;
  if (policy.mode == SessionMode::Individual) {
    out.assign(prompts, 1);
    return out;
  }
  if (policy.max_prompts_per_session < 1)
    throw GatewayError("session_partition: limit must be >= 1");
  int left = prompts;
  while (left > 0) {
    int take = std::min(left, policy.max_prompts_per_session);
    out.push_back(take);
    left -= take;
  }
  return out;
}

SessionManager::SessionManager(SessionPolicy policy, std::string id_prefix)
    : policy_(policy), prefix_(std::move(id_prefix)) {
  if (policy_.mode == SessionMode::Continuous && policy_.max_prompts_per_session < 1)
    throw GatewayError("session policy: max prompts per session must be >= 1");
}

const std::vector<ChatMessage>& SessionManager::begin_prompt(const std::string& user_text) {
  if (awaiting_response_)
    throw GatewayError("session: begin_prompt while a response is outstanding");
  bool rotate = transcripts_.empty();
  if (!rotate) {
    if (policy_.mode == SessionMode::Individual)
      rotate = true;
    else if (transcripts_.back().prompt_count + 1 > policy_.max_prompts_per_session)
      rotate = true;
  }
  if (rotate) {
    ChatTranscript t;
    char num[24];
    std::snprintf(num, sizeof num, "%04llu", static_cast<unsigned long long>(counter_++));
    t.session_id = prefix_ + "-" + num;
    transcripts_.push_back(std::move(t));
  }
  ChatTranscript& cur = transcripts_.back();
  cur.messages.push_back({"user", user_text});
  cur.prompt_count += 1;
  awaiting_response_ = true;
  return cur.messages;
}

void SessionManager::commit_response(const std::string& assistant_text) {
  if (!awaiting_response_)
    throw GatewayError("session: commit_response without a pending prompt");
  transcripts_.back().messages.push_back({"assistant", assistant_text});
  awaiting_response_ = false;
}

void SessionManager::abort_prompt() {
  if (!awaiting_response_)
    throw GatewayError("session: abort_prompt without a pending prompt");
  ChatTranscript& cur = transcripts_.back();
  cur.messages.pop_back();
  cur.prompt_count -= 1;
  awaiting_response_ = false;
  // An individual session that lost its only prompt is dropped entirely.
  if (cur.messages.empty()) transcripts_.pop_back();
}

std::string SessionManager::current_session_id() const {
  return transcripts_.empty() ? std::string() : transcripts_.back().session_id;
}

json canonical_request(const RequestInfo& req) {
  json history = json::array();
  for (const auto& m : req.history) history.push_back({{"role", m.role}, {"text", m.text}});
  json j;
  j["history"] = std::move(history);
  j["model"] = req.model;
  j["randomness"] = req.randomness.is_null() ? json::object() : req.randomness;
  j["round"] = req.round_index;
  return j;
}

std::string request_key(const RequestInfo& req) {
  return sha256_hex(canonical_request(req).dump());
}

// ----- HTTP backend ---------------------------------------------------------

namespace {

struct ParsedEndpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // /v1/chat/completions
};

ParsedEndpoint split_endpoint(const std::string& endpoint) {
  size_t scheme = endpoint.find("://");
  if (scheme == std::string::npos)
    throw TransportError("endpoint must start with http:// or https://: " + endpoint);
  size_t path = endpoint.find('/', scheme + 3);
  if (path == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path), endpoint.substr(path)};
}

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status <= 599);
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.max_attempts < 1) throw TransportError("backend: max_attempts must be >= 1");
}

std::string HttpBackend::complete(const RequestInfo& req) {
  ParsedEndpoint ep = split_endpoint(cfg_.endpoint);

  json body;
  body["model"] = req.model;
  json msgs = json::array();
  for (const auto& m : req.history) msgs.push_back({{"role", m.role}, {"content", m.text}});
  body["messages"] = std::move(msgs);
  if (req.randomness.is_object()) {
    for (auto it = req.randomness.begin(); it != req.randomness.end(); ++it)
      body[it.key()] = it.value();
  }
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!cfg_.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_error;
  for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
    if (attempt > 1) {
      int wait = cfg_.backoff_ms << (attempt - 2);
      std::this_thread::sleep_for(std::chrono::milliseconds(wait));
    }
    httplib::Client client(ep.base);
    client.set_connection_timeout(cfg_.timeout_sec, 0);
    client.set_read_timeout(cfg_.timeout_sec, 0);
    client.set_write_timeout(cfg_.timeout_sec, 0);

    auto res = client.Post(ep.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      try {
        json reply = json::parse(res->body);
        const json& choices = reply.at("choices");
        if (!choices.is_array() || choices.empty())
          throw BackendError("response has no choices");
        return choices.at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception& e) {
        throw BackendError(std::string("malformed completion response: ") + e.what());
      }
    }
    if (retryable_status(res->status)) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    throw TransportError("request rejected with status " + std::to_string(res->status));
  }
  throw TransportError("request failed after " + std::to_string(cfg_.max_attempts) +
                       " attempts (" + last_error + ")");
}

// ----- scripted backend -----------------------------------------------------

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BackendError("cannot open script: " + path);
  ScriptedBackend backend;
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (trim_view(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw BackendError(path + ":" + std::to_string(ln) + ": " + e.what());
    }
    if (!j.contains("id") || !j.contains("response"))
      throw BackendError(path + ":" + std::to_string(ln) +
                         ": script rows need \"id\" and \"response\"");
    backend.add(j["id"].get<std::string>(), j["response"].get<std::string>());
  }
  return backend;
}

void ScriptedBackend::add(const std::string& id, const std::string& response) {
  responses_[id].push_back(response);
}

std::string ScriptedBackend::complete(const RequestInfo& req) {
  auto it = responses_.find(req.instance_hint);
  if (it == responses_.end()) {
    it = responses_.find("default");
    if (it == responses_.end())
      throw BackendError("no scripted response for instance '" + req.instance_hint + "'");
  }
  // several rows under one id play in order and the last one repeats
  size_t& cur = cursor_[it->first];
  const auto& seq = it->second;
  std::string out = seq[std::min(cur, seq.size() - 1)];
  ++cur;
  return out;
}

// ----- fixture store --------------------------------------------------------

FixtureStore::FixtureStore(std::string dir, bool create) : dir_(std::move(dir)) {
  if (create) {
    fs::create_directories(dir_);
  } else if (!fs::is_directory(dir_)) {
    throw GatewayError("fixture store directory not found: " + dir_);
  }
}

std::string FixtureStore::path_of(const std::string& key, const char* ext) const {
  return dir_ + "/" + key + ext;
}

bool FixtureStore::contains(const std::string& key) const {
  return fs::exists(path_of(key, ".resp"));
}

std::string FixtureStore::load(const std::string& key) const {
  std::ifstream in(path_of(key, ".resp"), std::ios::binary);
  if (!in) {
    if (fs::exists(path_of(key, ".miss")))
      throw ReplayMissError(key + " (recorded transport failure)");
    throw ReplayMissError(key);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string read_file_or_empty(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw GatewayError("cannot write fixture file: " + path);
  out << content;
}

}  // namespace

void FixtureStore::put(const RequestInfo& req, const std::string& body) {
  const std::string key = request_key(req);
  const std::string req_json = canonical_request(req).dump(2) + "\n";
  const std::string req_path = path_of(key, ".req.json");
  const std::string resp_path = path_of(key, ".resp");

  if (fs::exists(req_path)) {
    std::string existing = read_file_or_empty(req_path);
    if (existing != req_json)
      throw IntegrityError("fixture key " + key + " maps to a different request payload");
  } else {
    write_file(req_path, req_json);
  }
  if (fs::exists(resp_path)) {
    std::string existing = read_file_or_empty(resp_path);
    if (existing != body)
      throw IntegrityError("fixture key " + key + " already holds a different response");
  } else {
    write_file(resp_path, body);
  }
  // a fresh success supersedes a recorded failure
  fs::remove(path_of(key, ".miss"));
}

void FixtureStore::put_miss(const RequestInfo& req, const std::string& error) {
  const std::string key = request_key(req);
  if (contains(key)) return;  // a recorded success wins
  write_file(path_of(key, ".req.json"), canonical_request(req).dump(2) + "\n");
  write_file(path_of(key, ".miss"), error + "\n");
}

std::string FixtureStore::digest() const {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  std::string acc;
  for (const auto& name : names) {
    acc += name;
    acc += ':';
    acc += sha256_hex(read_file_or_empty(dir_ + "/" + name));
    acc += '\n';
  }
  return sha256_hex(acc);
}

std::string ReplayBackend::complete(const RequestInfo& req) {
  return store_.load(request_key(req));
}

std::string RecordingBackend::complete(const RequestInfo& req) {
  try {
    std::string body = inner_.complete(req);
    store_.put(req, body);
    return body;
  } catch (const TransportError& e) {
    store_.put_miss(req, e.what());
    throw;
  }
}

int record_fixtures(const std::vector<RequestInfo>& requests, ChatBackend& backend,
                    FixtureStore& store) {
  int fresh = 0;
  for (const auto& req : requests) {
    const std::string key = request_key(req);
    if (store.contains(key)) continue;
    try {
      store.put(req, backend.complete(req));
      ++fresh;
    } catch (const TransportError& e) {
      store.put_miss(req, e.what());
    }
  }
  return fresh;
}

// ----- behaviour extraction over chat ---------------------------------------

std::vector<std::string> parse_api_list_response(const std::string& text) {
  // split on commas and newlines, strip list dressing, keep identifier-ish names
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  std::string cur;
  auto flush = [&]() {
    std::string item = trim(cur);
    cur.clear();
    // leading bullets / numbering
    while (!item.empty() && (item.front() == '-' || item.front() == '*' ||
                             item.front() == '.' || (item.front() >= '0' && item.front() <= '9')))
      item.erase(item.begin());
    item = trim(item);
    // surrounding backticks and trailing ()
    while (!item.empty() && (item.front() == '`' || item.front() == '"' || item.front() == '\''))
      item.erase(item.begin());
    while (!item.empty() && (item.back() == '`' || item.back() == '"' || item.back() == '\'' ||
                             item.back() == '.' || item.back() == ';'))
      item.pop_back();
    if (ends_with(item, "()")) item = item.substr(0, item.size() - 2);
    item = trim(item);
    // a dotted name keeps only its last segment
    if (size_t dot = item.rfind('.'); dot != std::string::npos) item = item.substr(dot + 1);
    if (item.empty()) return;
    for (char c : item)
      if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
            c == '_' || c == '$'))
        return;  // not a plain method name
    std::string lowered = to_lower(item);
    if (lowered == "none" || lowered == "null" || lowered == "no" || lowered == "n/a")
      return;
    if (seen.insert(item).second) out.push_back(item);
  };
  for (char c : text) {
    if (c == ',' || c == '\n') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

bool parse_exception_response(const std::string& text) {
  std::string lowered = to_lower(text);
  auto word_at = [&](const std::string& w) {
    size_t pos = lowered.find(w);
    while (pos != std::string::npos) {
      bool left_ok = pos == 0 || !isalnum(static_cast<unsigned char>(lowered[pos - 1]));
      size_t end = pos + w.size();
      bool right_ok = end >= lowered.size() || !isalnum(static_cast<unsigned char>(lowered[end]));
      if (left_ok && right_ok) return pos;
      pos = lowered.find(w, pos + 1);
    }
    return std::string::npos;
  };
  size_t yes = std::min(word_at("yes"), word_at("true"));
  size_t no = std::min(word_at("no"), word_at("false"));
  if (yes == std::string::npos && no == std::string::npos)
    throw BackendError("cannot read exception-handling answer from: " +
                       text.substr(0, std::min<size_t>(text.size(), 120)));
  return yes < no;
}

BehaviourSpec extract_behaviour_via_llm(ChatBackend& backend, const BackendConfig& cfg,
                                        const std::string& code, int round_index,
                                        const std::string& instance_hint) {
  BehaviourSpec spec;
  RequestInfo req;
  req.model = cfg.model;
  req.randomness = cfg.randomness;
  req.round_index = round_index;
  req.instance_hint = instance_hint + "#api";
  req.history = {{"user", extraction_prompt(ExtractionKind::ApiList, code)}};
  spec.api_names = parse_api_list_response(backend.complete(req));

  req.instance_hint = instance_hint + "#exc";
  req.history = {{"user", extraction_prompt(ExtractionKind::ExceptionHandling, code)}};
  spec.uses_exceptions = parse_exception_response(backend.complete(req));
  return spec;
}

}  // namespace cgbench
