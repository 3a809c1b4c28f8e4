#include "core/ledger.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "core/errors.hpp"

namespace pacta {

namespace {

constexpr char kLogMagic[8] = {'P', 'A', 'C', 'T', 'A', 'L', 'O', 'G'};
constexpr char kKeyMagic[8] = {'P', 'A', 'C', 'T', 'A', 'K', 'E', 'Y'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kHashAlgSha256 = 1;
constexpr std::size_t kNonceLen = 12;
constexpr std::size_t kTagLen = 16;
constexpr const char* kErasedMarker = "[erased]";

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_bytes(std::vector<std::uint8_t>& out, const void* data, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out.insert(out.end(), p, p + len);
}

// Bounds-checked little-endian reader; parse failures surface as nullopt so
// verify() can report the bad sequence number instead of throwing.
struct Reader {
    const std::uint8_t* data;
    std::size_t len;
    std::size_t pos = 0;

    bool take(void* out, std::size_t n) {
        if (pos + n > len) return false;
        std::memcpy(out, data + pos, n);
        pos += n;
        return true;
    }
    std::optional<std::uint16_t> u16() {
        std::uint8_t b[2];
        if (!take(b, 2)) return std::nullopt;
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }
    std::optional<std::uint32_t> u32() {
        std::uint8_t b[4];
        if (!take(b, 4)) return std::nullopt;
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }
    std::optional<std::uint64_t> u64() {
        std::uint8_t b[8];
        if (!take(b, 8)) return std::nullopt;
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }
    std::optional<std::string> str(std::size_t n) {
        if (pos + n > len) return std::nullopt;
        std::string s(reinterpret_cast<const char*>(data + pos), n);
        pos += n;
        return s;
    }
};

Digest sha256(const std::uint8_t* data, std::size_t len) {
    Digest out{};
    unsigned int out_len = 0;
    if (EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) != 1 ||
        out_len != out.size()) {
        fail(ErrorCode::Internal, "SHA-256 failed");
    }
    return out;
}

// Nonce = entry seq || field index. A subject key never sees the same
// (seq, index) pair twice, so GCM nonce uniqueness holds per key.
std::array<std::uint8_t, kNonceLen> make_nonce(std::uint64_t seq, std::uint32_t field_index) {
    std::array<std::uint8_t, kNonceLen> nonce{};
    for (int i = 0; i < 8; ++i) nonce[i] = static_cast<std::uint8_t>(seq >> (8 * i));
    for (int i = 0; i < 4; ++i) nonce[8 + i] = static_cast<std::uint8_t>(field_index >> (8 * i));
    return nonce;
}

std::string gcm_encrypt(const std::array<std::uint8_t, 32>& key,
                        const std::array<std::uint8_t, kNonceLen>& nonce,
                        const std::string& plaintext) {
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (!ctx) fail(ErrorCode::Internal, "cipher ctx alloc failed");
    std::string out;
    out.resize(plaintext.size() + kTagLen);
    int len = 0;
    int ok = EVP_EncryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, key.data(), nonce.data());
    if (ok == 1 && !plaintext.empty()) {
        ok = EVP_EncryptUpdate(ctx, reinterpret_cast<std::uint8_t*>(out.data()), &len,
                               reinterpret_cast<const std::uint8_t*>(plaintext.data()),
                               static_cast<int>(plaintext.size()));
    }
    int fin_len = 0;
    if (ok == 1) {
        ok = EVP_EncryptFinal_ex(ctx, reinterpret_cast<std::uint8_t*>(out.data()) + len, &fin_len);
    }
    if (ok == 1) {
        ok = EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_GET_TAG, kTagLen,
                                 out.data() + plaintext.size());
    }
    EVP_CIPHER_CTX_free(ctx);
    if (ok != 1) fail(ErrorCode::Internal, "AES-GCM encrypt failed");
    return out;
}

std::string gcm_decrypt(const std::array<std::uint8_t, 32>& key,
                        const std::array<std::uint8_t, kNonceLen>& nonce,
                        const std::string& ciphertext_and_tag) {
    if (ciphertext_and_tag.size() < kTagLen) {
        fail(ErrorCode::AuthenticationFailure, "ciphertext shorter than tag");
    }
    std::size_t ct_len = ciphertext_and_tag.size() - kTagLen;
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (!ctx) fail(ErrorCode::Internal, "cipher ctx alloc failed");
    std::string out;
    out.resize(ct_len);
    int len = 0;
    int ok = EVP_DecryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, key.data(), nonce.data());
    if (ok == 1 && ct_len > 0) {
        ok = EVP_DecryptUpdate(ctx, reinterpret_cast<std::uint8_t*>(out.data()), &len,
                               reinterpret_cast<const std::uint8_t*>(ciphertext_and_tag.data()),
                               static_cast<int>(ct_len));
    }
    if (ok == 1) {
        std::uint8_t tag[kTagLen];
        std::memcpy(tag, ciphertext_and_tag.data() + ct_len, kTagLen);
        ok = EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_TAG, kTagLen, tag);
    }
    int fin_len = 0;
    if (ok == 1) {
        ok = EVP_DecryptFinal_ex(ctx, reinterpret_cast<std::uint8_t*>(out.data()) + len, &fin_len);
    }
    EVP_CIPHER_CTX_free(ctx);
    if (ok != 1) {
        fail(ErrorCode::AuthenticationFailure, "AES-GCM authentication failed");
    }
    out.resize(static_cast<std::size_t>(len + fin_len));
    return out;
}

std::vector<std::uint8_t> header_bytes() {
    std::vector<std::uint8_t> out;
    put_bytes(out, kLogMagic, sizeof(kLogMagic));
    put_u32(out, kFormatVersion);
    put_u32(out, kHashAlgSha256);
    return out;
}

struct ParsedEntry {
    std::uint64_t seq;
    Timestamp timestamp;
    std::uint8_t kind;
    Digest prev_hash;
    Digest entry_hash;
    std::vector<std::uint8_t> body;
    std::size_t record_len;  // total bytes consumed from the stream
};

// Parses one `u32 body-len | prev | body | hash` record at reader position.
std::optional<ParsedEntry> parse_entry(Reader& r) {
    auto body_len = r.u32();
    if (!body_len) return std::nullopt;
    ParsedEntry e{};
    if (!r.take(e.prev_hash.data(), e.prev_hash.size())) return std::nullopt;
    auto body = r.str(*body_len);
    if (!body) return std::nullopt;
    e.body.assign(body->begin(), body->end());
    if (!r.take(e.entry_hash.data(), e.entry_hash.size())) return std::nullopt;
    Reader br{e.body.data(), e.body.size()};
    auto seq = br.u64();
    auto ts = br.u64();
    std::uint8_t kind = 0;
    if (!seq || !ts || !br.take(&kind, 1)) return std::nullopt;
    e.seq = *seq;
    e.timestamp = static_cast<Timestamp>(*ts);
    e.kind = kind;
    e.record_len = 4 + 32 + *body_len + 32;
    return e;
}

}  // namespace

const char* entry_kind_name(EntryKind kind) {
    switch (kind) {
        case EntryKind::Event: return "event";
        case EntryKind::Verdict: return "verdict";
        case EntryKind::Violation: return "violation";
        case EntryKind::Creation: return "creation";
        case EntryKind::Termination: return "termination";
        case EntryKind::Erasure: return "erasure";
    }
    return "unknown";
}

std::unique_ptr<Ledger> Ledger::open(const std::string& path) {
    auto ledger = std::unique_ptr<Ledger>(new Ledger());
    ledger->path_ = path;
    ledger->keys_path_ = path + ".keys";
    ledger->load_existing();
    return ledger;
}

std::unique_ptr<Ledger> Ledger::in_memory() { return std::unique_ptr<Ledger>(new Ledger()); }

Ledger::~Ledger() {
    for (auto& [subject, key] : keys_) {
        OPENSSL_cleanse(key.key.data(), key.key.size());
    }
}

void Ledger::load_existing() {
    namespace fs = std::filesystem;
    if (!path_.empty() && fs::exists(path_)) {
        std::ifstream in(path_, std::ios::binary);
        if (!in) fail(ErrorCode::StorageFailure, "cannot open ledger file " + path_);
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
        auto header = header_bytes();
        if (bytes.size() < header.size() ||
            std::memcmp(bytes.data(), header.data(), header.size()) != 0) {
            fail(ErrorCode::StorageFailure, "ledger header mismatch in " + path_);
        }
        Reader r{bytes.data(), bytes.size()};
        r.pos = header.size();
        std::size_t good_end = r.pos;
        while (r.pos < r.len) {
            std::size_t start = r.pos;
            auto e = parse_entry(r);
            if (!e) {
                // Torn tail from an interrupted append; drop it.
                r.pos = start;
                break;
            }
            StoredEntry stored;
            stored.record.assign(bytes.begin() + start, bytes.begin() + start + e->record_len);
            stored.entry_hash = e->entry_hash;
            entries_.push_back(std::move(stored));
            good_end = r.pos;
        }
        if (good_end != bytes.size()) {
            fs::resize_file(path_, good_end);
        }
    } else if (!path_.empty()) {
        std::ofstream out(path_, std::ios::binary);
        if (!out) fail(ErrorCode::StorageFailure, "cannot create ledger file " + path_);
        auto header = header_bytes();
        out.write(reinterpret_cast<const char*>(header.data()),
                  static_cast<std::streamsize>(header.size()));
        if (!out) fail(ErrorCode::StorageFailure, "cannot write ledger header");
    }

    if (!keys_path_.empty() && fs::exists(keys_path_)) {
        std::ifstream in(keys_path_, std::ios::binary);
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
        Reader r{bytes.data(), bytes.size()};
        char magic[8];
        if (!r.take(magic, 8) || std::memcmp(magic, kKeyMagic, 8) != 0 || !r.u32()) {
            fail(ErrorCode::StorageFailure, "key store header mismatch in " + keys_path_);
        }
        while (r.pos < r.len) {
            auto name_len = r.u16();
            if (!name_len) fail(ErrorCode::StorageFailure, "truncated key store");
            auto subject = r.str(*name_len);
            if (!subject) fail(ErrorCode::StorageFailure, "truncated key store");
            auto destroyed_at = r.u64();
            std::uint8_t status = 0;
            SubjectKey key;
            if (!destroyed_at || !r.take(&status, 1) || !r.take(key.key.data(), key.key.size())) {
                fail(ErrorCode::StorageFailure, "truncated key store");
            }
            key.destroyed = status == 2;
            key.destroyed_at = static_cast<Timestamp>(*destroyed_at);
            keys_[*subject] = key;
        }
    }
}

void Ledger::persist(const std::vector<std::uint8_t>& record) {
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) fail(ErrorCode::StorageFailure, "cannot append to ledger file " + path_);
    out.write(reinterpret_cast<const char*>(record.data()),
              static_cast<std::streamsize>(record.size()));
    out.flush();
    if (!out) fail(ErrorCode::StorageFailure, "ledger append failed");
}

void Ledger::save_keys_locked() {
    if (keys_path_.empty()) return;
    std::vector<std::uint8_t> bytes;
    put_bytes(bytes, kKeyMagic, sizeof(kKeyMagic));
    put_u32(bytes, kFormatVersion);
    for (const auto& [subject, key] : keys_) {
        put_u16(bytes, static_cast<std::uint16_t>(subject.size()));
        put_bytes(bytes, subject.data(), subject.size());
        put_u64(bytes, static_cast<std::uint64_t>(key.destroyed_at));
        bytes.push_back(key.destroyed ? 2 : 1);
        put_bytes(bytes, key.key.data(), key.key.size());
    }
    std::string tmp = keys_path_ + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::StorageFailure, "cannot write key store " + tmp);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    }
    std::filesystem::rename(tmp, keys_path_);
}

std::uint64_t Ledger::append(EntryKind kind, Timestamp timestamp, std::vector<LedgerField> fields,
                             const std::string& subject) {
    std::lock_guard lock(mutex_);
    bool has_personal = false;
    for (const auto& f : fields) has_personal |= f.personal;
    if (has_personal && subject.empty()) {
        fail(ErrorCode::InvalidArgument, "personal fields require a subject id");
    }

    const SubjectKey* key = nullptr;
    if (has_personal) {
        auto it = keys_.find(subject);
        if (it != keys_.end() && it->second.destroyed) {
            fail(ErrorCode::SubjectKeyDestroyed,
                 "subject '" + subject + "' was erased; no further personal data accepted");
        }
        if (it == keys_.end()) {
            SubjectKey fresh;
            if (RAND_bytes(fresh.key.data(), static_cast<int>(fresh.key.size())) != 1) {
                fail(ErrorCode::Internal, "key generation failed");
            }
            it = keys_.emplace(subject, fresh).first;
            save_keys_locked();
        }
        key = &it->second;
    }

    std::uint64_t seq = entries_.size() + 1;
    std::vector<std::uint8_t> body;
    put_u64(body, seq);
    put_u64(body, static_cast<std::uint64_t>(timestamp));
    body.push_back(static_cast<std::uint8_t>(kind));
    put_u32(body, static_cast<std::uint32_t>(fields.size()));
    std::uint32_t field_index = 0;
    for (const auto& f : fields) {
        put_u16(body, static_cast<std::uint16_t>(f.name.size()));
        put_bytes(body, f.name.data(), f.name.size());
        body.push_back(f.personal ? 1 : 0);
        if (f.personal) {
            auto nonce = make_nonce(seq, field_index);
            std::string ct = gcm_encrypt(key->key, nonce, f.value);
            std::vector<std::uint8_t> value;
            put_u16(value, static_cast<std::uint16_t>(subject.size()));
            put_bytes(value, subject.data(), subject.size());
            put_bytes(value, nonce.data(), nonce.size());
            put_bytes(value, ct.data(), ct.size());
            put_u32(body, static_cast<std::uint32_t>(value.size()));
            put_bytes(body, value.data(), value.size());
        } else {
            put_u32(body, static_cast<std::uint32_t>(f.value.size()));
            put_bytes(body, f.value.data(), f.value.size());
        }
        ++field_index;
    }

    Digest prev{};
    if (!entries_.empty()) prev = entries_.back().entry_hash;
    std::vector<std::uint8_t> hashed;
    put_bytes(hashed, prev.data(), prev.size());
    put_bytes(hashed, body.data(), body.size());
    Digest entry_hash = sha256(hashed.data(), hashed.size());

    StoredEntry stored;
    put_u32(stored.record, static_cast<std::uint32_t>(body.size()));
    put_bytes(stored.record, prev.data(), prev.size());
    put_bytes(stored.record, body.data(), body.size());
    put_bytes(stored.record, entry_hash.data(), entry_hash.size());
    stored.entry_hash = entry_hash;

    persist(stored.record);
    entries_.push_back(std::move(stored));
    return seq;
}

std::vector<std::uint8_t> Ledger::raw_bytes() const {
    std::lock_guard lock(mutex_);
    if (!path_.empty()) {
        std::ifstream in(path_, std::ios::binary);
        if (!in) fail(ErrorCode::StorageFailure, "cannot read ledger file " + path_);
        return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
    }
    std::vector<std::uint8_t> bytes = header_bytes();
    for (const auto& e : entries_) {
        bytes.insert(bytes.end(), e.record.begin(), e.record.end());
    }
    return bytes;
}

VerifyReport Ledger::verify() const {
    std::vector<std::uint8_t> bytes = raw_bytes();
    VerifyReport report;
    auto header = header_bytes();
    if (bytes.size() < header.size() ||
        std::memcmp(bytes.data(), header.data(), header.size()) != 0) {
        report.ok = false;
        report.first_bad_seq = 0;
        return report;
    }
    Reader r{bytes.data(), bytes.size()};
    r.pos = header.size();
    Digest prev{};
    std::uint64_t expect_seq = 1;
    while (r.pos < r.len) {
        auto e = parse_entry(r);
        if (!e) {
            report.ok = false;
            report.first_bad_seq = expect_seq;
            return report;
        }
        std::vector<std::uint8_t> hashed;
        put_bytes(hashed, e->prev_hash.data(), e->prev_hash.size());
        put_bytes(hashed, e->body.data(), e->body.size());
        Digest recomputed = sha256(hashed.data(), hashed.size());
        if (e->seq != expect_seq || e->prev_hash != prev || recomputed != e->entry_hash) {
            report.ok = false;
            report.first_bad_seq = expect_seq;
            return report;
        }
        prev = e->entry_hash;
        ++expect_seq;
        ++report.entries;
    }
    return report;
}

DecodedEntry Ledger::read_entry(std::uint64_t seq) const {
    std::lock_guard lock(mutex_);
    return decode_locked(seq);
}

DecodedEntry Ledger::decode_locked(std::uint64_t seq) const {
    if (seq == 0 || seq > entries_.size()) {
        fail(ErrorCode::OutOfRange, "entry " + std::to_string(seq) + " out of range");
    }
    const StoredEntry& stored = entries_[seq - 1];
    Reader r{stored.record.data(), stored.record.size()};
    auto e = parse_entry(r);
    if (!e) fail(ErrorCode::StorageFailure, "stored entry is corrupt");

    DecodedEntry out;
    out.seq = e->seq;
    out.timestamp = e->timestamp;
    out.kind = static_cast<EntryKind>(e->kind);
    out.prev_hash = e->prev_hash;
    out.entry_hash = e->entry_hash;

    Reader br{e->body.data(), e->body.size()};
    br.pos = 8 + 8 + 1;  // seq, timestamp, kind
    auto nfields = br.u32();
    if (!nfields) fail(ErrorCode::StorageFailure, "stored entry is corrupt");
    for (std::uint32_t i = 0; i < *nfields; ++i) {
        auto name_len = br.u16();
        auto name = name_len ? br.str(*name_len) : std::nullopt;
        std::uint8_t personal = 0;
        if (!name || !br.take(&personal, 1)) {
            fail(ErrorCode::StorageFailure, "stored entry is corrupt");
        }
        auto value_len = br.u32();
        auto raw = value_len ? br.str(*value_len) : std::nullopt;
        if (!raw) fail(ErrorCode::StorageFailure, "stored entry is corrupt");

        DecodedField field;
        field.name = *name;
        field.personal = personal != 0;
        if (!field.personal) {
            field.value = *raw;
            out.fields.push_back(std::move(field));
            continue;
        }
        Reader vr{reinterpret_cast<const std::uint8_t*>(raw->data()), raw->size()};
        auto subject_len = vr.u16();
        auto subject = subject_len ? vr.str(*subject_len) : std::nullopt;
        std::array<std::uint8_t, kNonceLen> nonce{};
        if (!subject || !vr.take(nonce.data(), nonce.size())) {
            fail(ErrorCode::StorageFailure, "stored entry is corrupt");
        }
        std::string ct(reinterpret_cast<const char*>(vr.data + vr.pos), vr.len - vr.pos);
        field.subject = *subject;
        auto key_it = keys_.find(*subject);
        if (key_it == keys_.end() || key_it->second.destroyed) {
            field.erased = true;
            field.value = kErasedMarker;
        } else {
            field.value = gcm_decrypt(key_it->second.key, nonce, ct);
        }
        out.fields.push_back(std::move(field));
    }
    return out;
}

ErasureReceipt Ledger::erase_subject(const std::string& subject, Timestamp now) {
    {
        std::lock_guard lock(mutex_);
        auto it = keys_.find(subject);
        if (it == keys_.end()) {
            fail(ErrorCode::UnknownSubject, "no personal data recorded for '" + subject + "'");
        }
        if (it->second.destroyed) {
            fail(ErrorCode::AlreadyErased, "subject '" + subject + "' already erased");
        }
        OPENSSL_cleanse(it->second.key.data(), it->second.key.size());
        it->second.key.fill(0);
        it->second.destroyed = true;
        it->second.destroyed_at = now;
        save_keys_locked();
    }
    ErasureReceipt receipt;
    receipt.subject = subject;
    receipt.destroyed_at = now;
    receipt.erasure_seq = append(EntryKind::Erasure, now, {{"subject", subject, false}});
    return receipt;
}

bool Ledger::subject_known(const std::string& subject) const {
    std::lock_guard lock(mutex_);
    return keys_.count(subject) > 0;
}

bool Ledger::subject_erased(const std::string& subject) const {
    std::lock_guard lock(mutex_);
    auto it = keys_.find(subject);
    return it != keys_.end() && it->second.destroyed;
}

std::uint64_t Ledger::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

}  // namespace pacta
