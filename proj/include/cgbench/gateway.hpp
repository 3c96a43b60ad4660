#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cgbench/analysis.hpp"
#include "cgbench/prompt_forge.hpp"

namespace cgbench {

struct GatewayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Network / endpoint trouble after retries were exhausted.
struct TransportError : GatewayError {
  using GatewayError::GatewayError;
};
// Malformed response payloads, missing scripted entries, and similar.
struct BackendError : GatewayError {
  using GatewayError::GatewayError;
};
// A replay request whose key is absent from the fixture store.
struct ReplayMissError : GatewayError {
  explicit ReplayMissError(const std::string& key)
      : GatewayError("no recorded response for request key " + key), key(key) {}
  std::string key;
};
// Fixture store key collision with a different payload.
struct IntegrityError : GatewayError {
  using GatewayError::GatewayError;
};

struct ChatMessage {
  std::string role;  // "user" / "assistant"
  std::string text;
};

struct ChatTranscript {
  std::string session_id;
  std::vector<ChatMessage> messages;  // strict user/assistant alternation
  int prompt_count = 0;
};

enum class SessionMode { Individual, Continuous };

const char* session_mode_name(SessionMode mode);       // "individual"/"continuous"
SessionMode session_mode_from_name(std::string_view);

struct SessionPolicy {
  SessionMode mode = SessionMode::Individual;
  int max_prompts_per_session = 20;
};

// How many prompts land in each chat session for a given policy.
// Individual: n sessions of one. Continuous: full sessions of the limit,
// then the remainder.
std::vector<int> session_partition(int prompts, const SessionPolicy& policy);

// Tracks chat transcripts under a session policy. begin_prompt returns the
// full history to send (ending in the new user message); commit_response
// closes the round.
class SessionManager {
 public:
  explicit SessionManager(SessionPolicy policy, std::string id_prefix = "session");

  const std::vector<ChatMessage>& begin_prompt(const std::string& user_text);
  void commit_response(const std::string& assistant_text);
  // Drops the pending user message after a failed send, so the transcript
  // keeps its strict alternation.
  void abort_prompt();
  const std::vector<ChatTranscript>& transcripts() const { return transcripts_; }
  // Session id the next commit_response would land in. Empty before the
  // first begin_prompt.
  std::string current_session_id() const;

 private:
  SessionPolicy policy_;
  std::string prefix_;
  std::vector<ChatTranscript> transcripts_;
  std::uint64_t counter_ = 0;
  bool awaiting_response_ = false;
};

struct BackendConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-3.5-turbo";
  std::string api_key_env = "OPENAI_API_KEY";  // credential read from here, never stored
  nlohmann::json randomness = nlohmann::json::object();  // merged into request bodies
  int max_attempts = 3;
  int backoff_ms = 100;
  int timeout_sec = 60;
};

// One completion request, fully determining the reply we expect.
struct RequestInfo {
  std::string model;
  std::vector<ChatMessage> history;
  nlohmann::json randomness = nlohmann::json::object();
  int round_index = 0;
  std::string instance_hint;  // scripted-backend routing; not part of the key
};

// Canonical JSON for the request (sorted keys, no hint) and its SHA-256 key.
nlohmann::json canonical_request(const RequestInfo& req);
std::string request_key(const RequestInfo& req);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const RequestInfo& req) = 0;
};

// OpenAI-style chat-completions endpoint over HTTP(S), with bounded retry
// and exponential backoff on transport failures and 5xx/429 statuses.
class HttpBackend : public ChatBackend {
 public:
  explicit HttpBackend(BackendConfig cfg);
  std::string complete(const RequestInfo& req) override;

 private:
  BackendConfig cfg_;
};

// Deterministic offline backend: responses keyed by instance hint, loaded
// from a JSONL script of {"id": ..., "response": ...} rows.
class ScriptedBackend : public ChatBackend {
 public:
  static ScriptedBackend from_file(const std::string& path);
  void add(const std::string& id, const std::string& response);
  std::string complete(const RequestInfo& req) override;

 private:
  std::map<std::string, std::vector<std::string>> responses_;
  std::map<std::string, size_t> cursor_;
};

// Directory of recorded responses addressed by request key. Layout per key:
// <key>.req.json (canonical request), <key>.resp (raw body), or <key>.miss
// (recorded transport failure).
class FixtureStore {
 public:
  explicit FixtureStore(std::string dir, bool create = false);

  bool contains(const std::string& key) const;
  std::string load(const std::string& key) const;  // ReplayMissError when absent
  void put(const RequestInfo& req, const std::string& body);
  void put_miss(const RequestInfo& req, const std::string& error);
  std::string digest() const;  // stable hash over the whole store
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::string path_of(const std::string& key, const char* ext) const;
};

// Serves recorded responses; never talks to the network.
class ReplayBackend : public ChatBackend {
 public:
  explicit ReplayBackend(const FixtureStore& store) : store_(store) {}
  std::string complete(const RequestInfo& req) override;

 private:
  const FixtureStore& store_;
};

// Passes through to an inner backend and records every exchange. Transport
// failures are recorded as miss entries and rethrown.
class RecordingBackend : public ChatBackend {
 public:
  RecordingBackend(ChatBackend& inner, FixtureStore& store)
      : inner_(inner), store_(store) {}
  std::string complete(const RequestInfo& req) override;

 private:
  ChatBackend& inner_;
  FixtureStore& store_;
};

// Record responses for a batch of requests into a store. Returns the number
// of fresh recordings (existing identical entries are skipped).
int record_fixtures(const std::vector<RequestInfo>& requests, ChatBackend& backend,
                    FixtureStore& store);

// Response-parsing helpers for behaviour extraction via a model.
std::vector<std::string> parse_api_list_response(const std::string& text);
bool parse_exception_response(const std::string& text);  // BackendError when unclear

// Asks the backend for the API list and exception flag of `code` using two
// one-shot prompts.
BehaviourSpec extract_behaviour_via_llm(ChatBackend& backend, const BackendConfig& cfg,
                                        const std::string& code, int round_index,
                                        const std::string& instance_hint);

}  // namespace cgbench
