#pragma once

#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "epgf/error.hpp"
#include "epgf/model.hpp"

namespace httplib {
class Server;
}

namespace epgf {

class BindFailureError : public ModelError {
public:
    explicit BindFailureError(const std::string& addr)
        : ModelError("cannot bind model server to " + addr) {}
};

class UnreachableError : public ModelError {
public:
    explicit UnreachableError(const std::string& endpoint)
        : ModelError("model endpoint unreachable: " + endpoint) {}
};

class ProtocolMismatchError : public ModelError {
public:
    explicit ProtocolMismatchError(const std::string& what)
        : ModelError("protocol mismatch: " + what) {}
};

class NonNormalizedResponseError : public ModelError {
public:
    explicit NonNormalizedResponseError(double mass)
        : ModelError("response distribution mass " + std::to_string(mass) +
                     " deviates from 1 by more than 1e-4") {}
};

// Serves a model over HTTP/1.1 with JSON bodies:
//   GET  /v1/info         -> alphabet hash, model id, order, conditions
//   POST /v1/logits       -> log-probabilities for one context
//   POST /v1/logits_batch -> log-probabilities for several contexts
// Requests are stateless; malformed bodies get 400, alphabet-hash
// mismatches get 409. The server owns a background thread; stop() (or
// destruction) shuts it down gracefully.
class ModelServer {
public:
    explicit ModelServer(const SequenceModel& model);
    ~ModelServer();

    ModelServer(const ModelServer&) = delete;
    ModelServer& operator=(const ModelServer&) = delete;

    // Binds host:port (port 0 picks an ephemeral port) and starts serving.
    void start(const std::string& host, int port);
    // Serves on the calling thread until stop() or SIGINT/SIGTERM.
    void run(const std::string& host, int port);
    void stop();

    int port() const noexcept { return port_; }

private:
    void install_routes();

    const SequenceModel& model_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = -1;
};

// Client side of the wire protocol. connect() fetches /v1/info once,
// rebuilds the alphabet from the advertised condition labels, and verifies
// the hash handshake; afterwards the instance satisfies the SequenceModel
// contract over HTTP. Transient transport failures are retried
// idempotently up to max_retries before UnreachableError.
class RemoteModel : public SequenceModel {
public:
    static RemoteModel connect(const std::string& endpoint, int max_retries = 3);

    const Alphabet& alphabet() const override { return alphabet_; }
    std::string model_id() const override { return model_id_; }
    std::vector<double> next_logprobs(std::span<const TokenId> context) const override;

    // One round trip for many contexts via /v1/logits_batch.
    std::vector<std::vector<double>> batch_logprobs(
        const std::vector<std::vector<TokenId>>& contexts) const;

    int order() const noexcept override { return order_; }
    const std::string& endpoint() const noexcept { return endpoint_; }

private:
    RemoteModel(std::string endpoint, int max_retries);

    std::string post_json(const std::string& path, const std::string& body) const;

    std::string endpoint_;
    int max_retries_;
    Alphabet alphabet_;
    std::string model_id_;
    int order_ = 0;
};

}  // namespace epgf
