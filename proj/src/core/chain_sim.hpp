#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "core/rop.hpp"

namespace pacta {

using Gas = std::int64_t;

// Defaults follow the Ethereum mainnet figures of late Feb 2019: an
// 8,001,071-gas block limit, 21,000 base transaction cost, 8,156 gas per
// loop iteration of the reference contract, ~13s blocks, and a 20-block
// confirmation depth.
struct SimConfig {
    Duration block_interval_ms = 13'000;
    Gas block_gas_limit = 8'001'071;
    Gas base_tx_cost = 21'000;
    std::map<std::string, Gas> per_action_gas;  // operation label -> gas
    Gas default_action_gas = 50'000;            // fallback for unlisted operations
    Gas per_iteration_gas = 8'156;
    double reorg_probability = 0.0;  // per produced block
    int max_reorg_depth = 0;
    int finality_depth = 20;
    std::uint64_t seed = 0;
    bool drop_on_reorg = false;  // true: reverted txs are not re-mined
};

enum class TxStatus { Pending, Included, Final, Rejected, Orphaned };

const char* tx_status_name(TxStatus status);

struct SimTx {
    std::uint64_t id = 0;
    std::string from;
    std::uint64_t nonce = 0;
    Gas gas_price = 1;
    Gas gas_limit = 0;
    Gas gas_used = 0;  // base + action + loop_count * per_iteration
    std::string payload_op;
    std::int64_t loop_count = 0;
    Timestamp submitted_at = 0;
    TxStatus status = TxStatus::Pending;
    std::uint64_t inclusion_height = 0;  // 0 while not on the canonical chain
    Timestamp included_at = -1;
    Timestamp finalized_at = -1;
};

struct Block {
    std::uint64_t height = 0;  // dense from 1
    std::uint64_t id = 0;      // unique across competing blocks
    std::uint64_t parent_id = 0;
    std::vector<std::uint64_t> txs;
    Gas gas_used = 0;
    Gas gas_limit = 0;
    Timestamp produced_at = 0;
};

struct ReorgReport {
    bool occurred = false;
    int depth = 0;
    std::vector<std::uint64_t> reverted_txs;
};

// floor((block_gas_limit - base_tx_cost) / per_iteration_gas): how many loop
// iterations fit in one block.
Gas max_loop_iterations(Gas block_gas_limit, Gas base_tx_cost, Gas per_iteration_gas);

// floor(block_gas_limit / txs_per_block): gas share of an average tx.
Gas avg_gas_per_tx(Gas block_gas_limit, Gas txs_per_block);

// Discrete-time single-chain simulator. Blocks are produced on a fixed
// interval; pending transactions are selected by descending gas price under
// the per-account nonce (FOFI) constraint; reorganizations replace the last
// d canonical blocks with empty competitors and return their transactions to
// the mempool. Deterministic for a given config, seed, and call sequence.
class ChainSim {
public:
    explicit ChainSim(SimConfig config);

    const SimConfig& config() const { return config_; }

    Gas action_gas(const std::string& op, std::int64_t loop_count) const;

    // Validates and queues a transaction. Throws GasLimitExceedsBlockLimit
    // when it could never fit a block, NonceInPast on replayed nonces,
    // InvalidArgument when the gas limit cannot cover the computed gas use.
    std::uint64_t submit_tx(const std::string& from, std::uint64_t nonce, Gas gas_price,
                            Gas gas_limit, const std::string& payload_op,
                            std::int64_t loop_count = 0);

    // Convenience wrapper: next nonce for the account, price 1, exact limit.
    std::uint64_t submit_event_tx(const std::string& from, const std::string& op);

    const Block& produce_block();

    ReorgReport maybe_reorg();

    // Depth of the canonical block containing the tx (1 = tip); 0 while
    // pending or orphaned.
    std::int64_t confirmations(std::uint64_t tx_id) const;
    bool is_final(std::uint64_t tx_id) const;

    const SimTx& tx(std::uint64_t tx_id) const;
    std::vector<std::uint64_t> pending_txs() const;
    std::uint64_t height() const { return chain_.size(); }
    Timestamp now() const { return clock_; }
    const std::vector<Block>& chain() const { return chain_; }

    // Transactions that were reverted by a reorg and are back on the
    // canonical chain.
    std::uint64_t reverted_then_remined() const;
    std::uint64_t final_reverts() const { return final_reverts_; }
    std::uint64_t orphaned_blocks() const { return orphaned_blocks_; }

private:
    std::uint64_t chain_nonce(const std::string& account) const;
    void refresh_finality();

    SimConfig config_;
    std::mt19937_64 rng_;
    std::map<std::uint64_t, SimTx> txs_;
    std::vector<Block> chain_;
    std::map<std::string, std::uint64_t> next_submit_nonce_;
    std::map<std::string, std::uint64_t> included_count_;  // canonical txs per account
    std::map<std::uint64_t, std::uint64_t> remine_count_;  // tx id -> times reverted
    Timestamp clock_ = 0;
    std::uint64_t next_tx_id_ = 1;
    std::uint64_t next_block_id_ = 1;
    std::uint64_t final_reverts_ = 0;
    std::uint64_t orphaned_blocks_ = 0;
};

}  // namespace pacta
