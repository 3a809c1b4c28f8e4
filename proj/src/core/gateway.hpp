#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "core/engine.hpp"

namespace pacta {

struct GatewayConfig {
    std::string host = "127.0.0.1";
    int port = 0;  // 0 picks a free port
    // When set, events without a timestamp are stamped with wall time and a
    // background task periodically advances every instance clock. The
    // default is client-supplied logical time for reproducibility.
    bool wall_clock = false;
    Duration clock_tick_ms = 1000;
};

// HTTP presentation layer over the engine and ledger.
//
//   POST /contracts                  rule source        -> 201 {"contract"}
//   POST /instances                  {contract,bindings,at} -> 201 {"instance"}
//   POST /instances/{id}/events      event XML or JSON  -> verdict XML or JSON
//   GET  /instances/{id}/state                          -> snapshot JSON
//   POST /instances/{id}/clock       {"at"}             -> {"violations"}
//   GET  /instances/{id}/verdicts?since=N               -> {"verdicts"}
//   GET  /audit/verify                                  -> chain report
//   POST /subjects/{id}/erase        {"at"}             -> erasure receipt
//
// The event endpoint negotiates by request content type: XML in, minimal
// verdict XML out; JSON in, full verdict JSON out. Events for one instance
// are processed strictly in arrival order.
class Gateway {
public:
    Gateway(InstanceManager& mgr, GatewayConfig config);
    ~Gateway();

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    // Binds and serves on a background thread; throws StorageFailure when
    // the port cannot be bound.
    void start();
    void stop();

    int port() const { return port_; }

private:
    struct Impl;
    void clock_loop();

    InstanceManager& mgr_;
    GatewayConfig config_;
    std::unique_ptr<Impl> impl_;
    std::thread server_thread_;
    std::thread clock_thread_;
    std::atomic<bool> running_{false};
    int port_ = 0;
};

}  // namespace pacta
