#pragma once

#include <condition_variable>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ops/common/error.hpp"
#include "ops/opsd/store.hpp"

namespace ops::opsd {

OPS_DEFINE_ERROR(ValidationFailed, "VALIDATION_FAILED");
OPS_DEFINE_ERROR(MergeConflict, "MERGE_CONFLICT");
OPS_DEFINE_ERROR(NotReady, "NOT_READY");

struct ApiErrorCode {
  std::string code;
  int status = 500;
};

/// Every machine code the service emits, with its HTTP status.
const std::vector<ApiErrorCode>& api_error_codes();
int status_for(const std::string& code);

struct Response {
  int status = 200;
  Json body;
};

/// {"error": {"status", "code", "message", ...details}}.
Response error_response(int status, const std::string& code, const std::string& message, Json details = nullptr);
Response error_response(const std::exception& e);

struct Request {
  std::string body;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lowercase names
};

/// Endpoint handlers over a store, independent of the HTTP transport.
/// Prediction batches run on one background thread, one at a time.
class Api {
 public:
  explicit Api(Store& store);
  ~Api();
  Api(const Api&) = delete;
  Api& operator=(const Api&) = delete;

  /// Routes one request; errors become error responses.
  Response handle(const std::string& method, const std::string& path, const Request& r);

  Response healthz() const;

  Response post_tasknet(const Request& r);
  Response list_tasknets() const;
  Response get_tasknet(const std::string& id) const;
  Response merge_tasknet(const std::string& base_id, const Request& r);
  Response schedule(const Request& r) const;

  Response post_batch(const Request& r);
  Response get_batch(const std::string& id) const;
  Response get_clusters(const std::string& id) const;
  Response get_envelope(const std::string& id, std::size_t k, const Request& r) const;
  Response impact(const std::string& before, const std::string& after) const;

  Response post_downlink(const Request& r);
  Response get_match(const std::string& id) const;
  Response get_evrdiff(const std::string& id) const;
  Response get_incon(const std::string& id) const;
  Response post_infer(const Request& r);

  /// Blocks until no batch is queued or running.
  void wait_idle();

 private:
  struct Job {
    std::string batch_id;
    Json request;
    std::size_t workers = 1;
  };
  struct Progress {
    std::string state;  // queued, running, complete, failed
    std::size_t done = 0, total = 0;
    std::string error;
  };

  void worker_loop();
  Json progress_json(const std::string& id) const;

  Store& store_;
  mutable std::mutex mu_;
  std::condition_variable cv_, idle_cv_;
  std::deque<Job> jobs_;
  std::map<std::string, Progress> progress_;
  bool busy_ = false;
  bool stop_ = false;
  std::thread worker_;
};

}  // namespace ops::opsd
