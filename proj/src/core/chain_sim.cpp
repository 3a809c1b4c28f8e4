#include "core/chain_sim.hpp"

#include <algorithm>
#include <set>

#include "core/errors.hpp"

namespace pacta {

const char* tx_status_name(TxStatus status) {
    switch (status) {
        case TxStatus::Pending: return "pending";
        case TxStatus::Included: return "included";
        case TxStatus::Final: return "final";
        case TxStatus::Rejected: return "rejected";
        case TxStatus::Orphaned: return "orphaned";
    }
    return "unknown";
}

Gas max_loop_iterations(Gas block_gas_limit, Gas base_tx_cost, Gas per_iteration_gas) {
    if (per_iteration_gas <= 0) {
        fail(ErrorCode::InvalidArgument, "per-iteration gas must be positive");
    }
    Gas budget = block_gas_limit - base_tx_cost;
    if (budget < 0) return 0;
    return budget / per_iteration_gas;
}

Gas avg_gas_per_tx(Gas block_gas_limit, Gas txs_per_block) {
    if (txs_per_block <= 0) {
        fail(ErrorCode::InvalidArgument, "txs per block must be positive");
    }
    return block_gas_limit / txs_per_block;
}

ChainSim::ChainSim(SimConfig config) : config_(std::move(config)), rng_(config_.seed) {
    if (config_.block_gas_limit <= config_.base_tx_cost) {
        fail(ErrorCode::InvalidArgument, "block gas limit must exceed the base tx cost");
    }
    if (config_.reorg_probability < 0.0 || config_.reorg_probability > 1.0) {
        fail(ErrorCode::InvalidArgument, "reorg probability must be in [0, 1]");
    }
    if (config_.max_reorg_depth < 0 || config_.finality_depth < 1) {
        fail(ErrorCode::InvalidArgument, "bad reorg/finality depth");
    }
}

Gas ChainSim::action_gas(const std::string& op, std::int64_t loop_count) const {
    auto it = config_.per_action_gas.find(op);
    Gas action = it != config_.per_action_gas.end() ? it->second : config_.default_action_gas;
    return config_.base_tx_cost + action + loop_count * config_.per_iteration_gas;
}

std::uint64_t ChainSim::chain_nonce(const std::string& account) const {
    auto it = included_count_.find(account);
    return it == included_count_.end() ? 0 : it->second;
}

std::uint64_t ChainSim::submit_tx(const std::string& from, std::uint64_t nonce, Gas gas_price,
                                  Gas gas_limit, const std::string& payload_op,
                                  std::int64_t loop_count) {
    if (from.empty()) fail(ErrorCode::InvalidArgument, "tx needs a sender account");
    if (gas_limit > config_.block_gas_limit) {
        fail(ErrorCode::GasLimitExceedsBlockLimit,
             "tx gas limit " + std::to_string(gas_limit) + " exceeds block gas limit " +
                 std::to_string(config_.block_gas_limit) + "; it can never be mined");
    }
    if (nonce < chain_nonce(from)) {
        fail(ErrorCode::NonceInPast, "nonce " + std::to_string(nonce) + " already used by '" +
                                         from + "' (next is " +
                                         std::to_string(chain_nonce(from)) + ")");
    }
    for (const auto& [id, tx] : txs_) {
        if (tx.status == TxStatus::Pending && tx.from == from && tx.nonce == nonce) {
            fail(ErrorCode::NonceInPast,
                 "nonce " + std::to_string(nonce) + " already pending for '" + from + "'");
        }
    }
    Gas used = action_gas(payload_op, loop_count);
    if (used > gas_limit) {
        fail(ErrorCode::InvalidArgument, "tx gas limit " + std::to_string(gas_limit) +
                                             " is below the computed gas use " +
                                             std::to_string(used));
    }

    SimTx tx;
    tx.id = next_tx_id_++;
    tx.from = from;
    tx.nonce = nonce;
    tx.gas_price = gas_price;
    tx.gas_limit = gas_limit;
    tx.gas_used = used;
    tx.payload_op = payload_op;
    tx.loop_count = loop_count;
    tx.submitted_at = clock_;
    auto& next = next_submit_nonce_[from];
    next = std::max(next, nonce + 1);
    std::uint64_t id = tx.id;
    txs_.emplace(id, std::move(tx));
    return id;
}

std::uint64_t ChainSim::submit_event_tx(const std::string& from, const std::string& op) {
    std::uint64_t nonce = std::max(next_submit_nonce_[from], chain_nonce(from));
    Gas used = action_gas(op, 0);
    return submit_tx(from, nonce, 1, used, op, 0);
}

const Block& ChainSim::produce_block() {
    clock_ += config_.block_interval_ms;
    Block block;
    block.height = chain_.size() + 1;
    block.id = next_block_id_++;
    block.parent_id = chain_.empty() ? 0 : chain_.back().id;
    block.gas_limit = config_.block_gas_limit;
    block.produced_at = clock_;

    // Greedy fill by descending gas price. An account's transactions are
    // only eligible in nonce order; when its next one does not fit, the
    // whole account stalls for this block.
    std::map<std::string, std::uint64_t> selected;
    std::set<std::string> stalled;
    Gas remaining = config_.block_gas_limit;
    for (;;) {
        SimTx* best = nullptr;
        for (auto& [id, tx] : txs_) {
            if (tx.status != TxStatus::Pending) continue;
            if (stalled.count(tx.from)) continue;
            std::uint64_t expected = chain_nonce(tx.from) + selected[tx.from];
            if (tx.nonce != expected) continue;
            if (!best || tx.gas_price > best->gas_price) best = &tx;
        }
        if (!best) break;
        if (best->gas_used > remaining) {
            stalled.insert(best->from);
            continue;
        }
        remaining -= best->gas_used;
        block.gas_used += best->gas_used;
        block.txs.push_back(best->id);
        selected[best->from] += 1;
        best->status = TxStatus::Included;
        best->inclusion_height = block.height;
        best->included_at = clock_;
    }
    for (std::uint64_t id : block.txs) {
        included_count_[txs_.at(id).from] += 1;
    }
    chain_.push_back(std::move(block));
    refresh_finality();
    return chain_.back();
}

void ChainSim::refresh_finality() {
    std::uint64_t tip = chain_.size();
    for (auto& [id, tx] : txs_) {
        if (tx.status != TxStatus::Included) continue;
        std::int64_t depth = static_cast<std::int64_t>(tip - tx.inclusion_height) + 1;
        if (depth >= config_.finality_depth) {
            tx.status = TxStatus::Final;
            tx.finalized_at = clock_;
        }
    }
}

ReorgReport ChainSim::maybe_reorg() {
    ReorgReport report;
    if (config_.max_reorg_depth == 0 || config_.reorg_probability == 0.0 || chain_.empty()) {
        return report;
    }
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng_) >= config_.reorg_probability) return report;

    int max_depth = static_cast<int>(
        std::min<std::uint64_t>(config_.max_reorg_depth, chain_.size()));
    std::uniform_int_distribution<int> depth_dist(1, max_depth);
    int depth = depth_dist(rng_);

    report.occurred = true;
    report.depth = depth;
    std::vector<Block> victims;
    for (int i = 0; i < depth; ++i) {
        victims.push_back(chain_.back());
        chain_.pop_back();
        ++orphaned_blocks_;
    }
    std::reverse(victims.begin(), victims.end());
    for (const Block& victim : victims) {
        for (std::uint64_t id : victim.txs) {
            SimTx& tx = txs_.at(id);
            if (tx.status == TxStatus::Final) ++final_reverts_;
            included_count_[tx.from] -= 1;
            tx.inclusion_height = 0;
            tx.included_at = -1;
            tx.finalized_at = -1;
            tx.status = config_.drop_on_reorg ? TxStatus::Orphaned : TxStatus::Pending;
            if (!config_.drop_on_reorg) remine_count_[id] += 1;
            report.reverted_txs.push_back(id);
        }
        // Empty competitor block at the same height; the chain never shrinks.
        Block competitor;
        competitor.height = victim.height;
        competitor.id = next_block_id_++;
        competitor.parent_id = chain_.empty() ? 0 : chain_.back().id;
        competitor.produced_at = victim.produced_at;
        competitor.gas_limit = victim.gas_limit;
        chain_.push_back(std::move(competitor));
    }
    return report;
}

std::int64_t ChainSim::confirmations(std::uint64_t tx_id) const {
    auto it = txs_.find(tx_id);
    if (it == txs_.end()) fail(ErrorCode::UnknownTx, "unknown tx " + std::to_string(tx_id));
    const SimTx& tx = it->second;
    if (tx.status != TxStatus::Included && tx.status != TxStatus::Final) return 0;
    return static_cast<std::int64_t>(chain_.size() - tx.inclusion_height) + 1;
}

bool ChainSim::is_final(std::uint64_t tx_id) const {
    return confirmations(tx_id) >= config_.finality_depth;
}

const SimTx& ChainSim::tx(std::uint64_t tx_id) const {
    auto it = txs_.find(tx_id);
    if (it == txs_.end()) fail(ErrorCode::UnknownTx, "unknown tx " + std::to_string(tx_id));
    return it->second;
}

std::vector<std::uint64_t> ChainSim::pending_txs() const {
    std::vector<std::uint64_t> out;
    for (const auto& [id, tx] : txs_) {
        if (tx.status == TxStatus::Pending) out.push_back(id);
    }
    return out;
}

std::uint64_t ChainSim::reverted_then_remined() const {
    std::uint64_t count = 0;
    for (const auto& [id, reverts] : remine_count_) {
        const SimTx& tx = txs_.at(id);
        if (reverts > 0 && (tx.status == TxStatus::Included || tx.status == TxStatus::Final)) {
            ++count;
        }
    }
    return count;
}

}  // namespace pacta
