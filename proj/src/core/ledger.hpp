#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "core/rop.hpp"

namespace pacta {

using Digest = std::array<std::uint8_t, 32>;

enum class EntryKind : std::uint8_t {
    Event = 1,
    Verdict = 2,
    Violation = 3,
    Creation = 4,
    Termination = 5,
    Erasure = 6,
};

const char* entry_kind_name(EntryKind kind);

struct LedgerField {
    std::string name;
    std::string value;     // plaintext on append; never persisted for personal fields
    bool personal = false;
};

struct DecodedField {
    std::string name;
    bool personal = false;
    bool erased = false;   // personal field whose subject key was destroyed
    std::string subject;   // subject-key id, personal fields only
    std::string value;     // plaintext; "[erased]" marker when erased
};

struct DecodedEntry {
    std::uint64_t seq = 0;
    Timestamp timestamp = 0;
    EntryKind kind = EntryKind::Event;
    std::vector<DecodedField> fields;
    Digest prev_hash{};
    Digest entry_hash{};
};

struct VerifyReport {
    bool ok = true;
    std::optional<std::uint64_t> first_bad_seq;  // 0 = header corruption
    std::uint64_t entries = 0;
};

struct ErasureReceipt {
    std::string subject;
    Timestamp destroyed_at = 0;
    std::uint64_t erasure_seq = 0;
};

// Hash-chained append-only audit log.
//
// On-disk layout (all integers little-endian):
//   header   : "PACTALOG" | u32 format-version (1) | u32 hash-alg id (1 = SHA-256)
//   entry    : u32 body-len | prev-hash(32) | body | entry-hash(32)
//   body     : u64 seq | i64 timestamp | u8 kind | u32 nfields | field...
//   field    : u16 name-len | name | u8 personal | u32 value-len | value
//
// Personal field values hold, in place of the plaintext:
//   u16 subject-len | subject-key id | nonce(12) | AES-256-GCM ciphertext+tag
// entry-hash = SHA-256(prev-hash || body); the genesis prev-hash is 32 zero
// bytes. The subject key store lives next to the log in "<path>.keys";
// destroying a key zeroes its slot and leaves every ciphertext in place.
class Ledger {
public:
    static std::unique_ptr<Ledger> open(const std::string& path);
    static std::unique_ptr<Ledger> in_memory();
    ~Ledger();

    Ledger(const Ledger&) = delete;
    Ledger& operator=(const Ledger&) = delete;

    // Appends one entry, encrypting personal fields under the subject key
    // (created on first use). The entry is chained and flushed before return.
    std::uint64_t append(EntryKind kind, Timestamp timestamp, std::vector<LedgerField> fields,
                         const std::string& subject = "");

    // Recomputes every hash link over the persisted bytes.
    VerifyReport verify() const;

    DecodedEntry read_entry(std::uint64_t seq) const;

    // Destroys the subject's key material and appends an erasure entry. All
    // of the subject's prior ciphertexts become permanently undecryptable.
    ErasureReceipt erase_subject(const std::string& subject, Timestamp now);

    bool subject_known(const std::string& subject) const;
    bool subject_erased(const std::string& subject) const;

    std::uint64_t size() const;

    // Entire persisted byte image (header + entries); file-backed ledgers
    // re-read the file so callers can scan exactly what is on disk.
    std::vector<std::uint8_t> raw_bytes() const;

    const std::string& path() const { return path_; }  // empty when in-memory

private:
    Ledger() = default;

    void load_existing();
    void persist(const std::vector<std::uint8_t>& record);
    void save_keys_locked();
    DecodedEntry decode_locked(std::uint64_t seq) const;

    struct StoredEntry {
        std::vector<std::uint8_t> record;  // exactly the bytes persisted
        Digest entry_hash{};
    };

    struct SubjectKey {
        std::array<std::uint8_t, 32> key{};
        bool destroyed = false;
        Timestamp destroyed_at = 0;
    };

    mutable std::mutex mutex_;
    std::string path_;       // empty for in-memory ledgers
    std::string keys_path_;
    std::vector<StoredEntry> entries_;
    std::map<std::string, SubjectKey> keys_;
};

}  // namespace pacta
