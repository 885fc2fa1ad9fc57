#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairswap/crypto.hpp"
#include "fairswap/random.hpp"
#include "fairswap/types.hpp"

namespace fairswap::protocol {

enum class Protocol : std::uint8_t {
    L2L,     // two leechers swap sealed pieces, then swap keys
    L2S,     // a seeder seals one piece per leecher and withholds its key until the relay is acknowledged
    Secure,  // symmetric data keys delivered wrapped under the receiver's public key
};

enum class MessageKind : std::uint8_t { Req, Data, Exc, Ack };

enum class PartyRole : std::uint8_t { Leecher, Seeder };

std::string_view to_string(Protocol protocol) noexcept;
std::string_view to_string(MessageKind kind) noexcept;

struct ProtocolMessage {
    MessageKind kind = MessageKind::Req;
    NodeId sender;
    NodeId receiver;
    std::vector<PieceId> piece_refs;
    std::optional<crypto::CipherEnvelope> envelope;
    std::optional<Bytes> key_material;
    SessionId session_id = 0;

    bool operator==(const ProtocolMessage&) const = default;
};

/// Shape check: REQ and ACK carry piece refs only, DATA carries an envelope,
/// EXC carries either clear key material or a wrapped key envelope.
bool well_formed(const ProtocolMessage& message);

/// Inter-node payload size as reported in transcripts.
std::size_t payload_len(const ProtocolMessage& message);

struct Party {
    NodeId id;
    PartyRole role = PartyRole::Leecher;
    std::vector<PieceId> wants;
};

/// Where a scripted message takes its piece refs from.
struct PieceSelector {
    enum class Source : std::uint8_t { None, WantsOf, SharedFirst, SharedSecond, SharedBoth };
    Source source = Source::None;
    std::size_t slot = 0;
};

enum class PayloadKind : std::uint8_t {
    None,        // REQ / ACK
    SealData,    // owner encrypts the referenced pieces under its data key
    Forward,     // sender relays the envelope it received in message `forward_of`
    ReleaseKey,  // owner's data decryption key, in the clear
    PublicKey,   // owner's public key
    WrappedKey,  // owner's symmetric data key sealed for the receiver's public key
};

struct ScriptEntry {
    MessageKind kind;
    std::size_t sender;    // party slot
    std::size_t receiver;  // party slot
    PieceSelector pieces;
    PayloadKind payload;
    std::size_t owner = 0;       // key / data owner slot for the payload
    std::size_t forward_of = 0;  // script index of the relayed DATA message
    int trigger = -1;            // script index whose delivery makes the sender emit this; -1 opens the session
    std::string_view awaiting;   // name of the phase that waits for this message
};

/// Message script for a protocol with the given number of parties (2, or 3
/// for seeder sessions). Slot 0 is the responder / seeder.
std::span<const ScriptEntry> script(Protocol protocol, std::size_t party_count);

class Phase {
public:
    Phase() = default;
    Phase(std::size_t index, std::string_view name) : index_(index), name_(name) {}

    /// Number of messages delivered so far.
    [[nodiscard]] std::size_t index() const noexcept { return index_; }
    [[nodiscard]] std::string_view name() const noexcept { return name_; }

    bool operator==(const Phase& other) const noexcept { return index_ == other.index_; }

private:
    std::size_t index_ = 0;
    std::string_view name_ = "AwaitQ1";
};

struct PartyLedger {
    NodeId node;
    std::int64_t bytes_uploaded = 0;      // plaintext bytes carried by DATA envelopes this party sent
    std::int64_t bytes_decryptable = 0;   // plaintext bytes this party can open
    std::vector<KeyId> keys_released;
    std::vector<PieceId> decrypted_pieces;
    std::optional<std::size_t> first_upload_step;   // 1-based transcript position
    std::optional<std::size_t> first_decrypt_step;
};

struct ExchangeLedger {
    std::vector<PartyLedger> parties;
    std::optional<Phase> aborted_at;

    [[nodiscard]] const PartyLedger& of(NodeId node) const;
};

struct SessionOptions {
    std::size_t piece_size = 64;
    std::uint64_t content_seed = 0;
    crypto::KeygenOptions keygen;
};

/// Deterministic stand-in for the shared file's content.
Bytes piece_content(PieceId piece, std::size_t piece_size, std::uint64_t content_seed);

class ExchangeSession {
public:
    [[nodiscard]] SessionId id() const noexcept { return id_; }
    [[nodiscard]] Protocol protocol() const noexcept { return protocol_; }
    [[nodiscard]] const std::vector<Party>& parties() const noexcept { return parties_; }
    [[nodiscard]] Phase phase() const;
    [[nodiscard]] bool complete() const noexcept;
    [[nodiscard]] bool aborted() const noexcept { return ledger_.aborted_at.has_value(); }
    [[nodiscard]] const std::vector<ProtocolMessage>& transcript() const noexcept { return transcript_; }
    [[nodiscard]] const ExchangeLedger& ledger() const noexcept { return ledger_; }
    [[nodiscard]] std::span<const ScriptEntry> steps() const { return script(protocol_, parties_.size()); }
    [[nodiscard]] std::size_t slot_of(NodeId node) const;

    /// Messages that open the session before anything is delivered.
    [[nodiscard]] std::vector<ProtocolMessage> opening_messages() const;

    /// In-place form of step(): deliver one message and return what the
    /// receiver sends in response.
    std::vector<ProtocolMessage> deliver(const ProtocolMessage& message);

    /// Marks the session abandoned at its current phase.
    void abort();

    /// The secret keys this session generated (for tests that play eavesdropper).
    [[nodiscard]] std::vector<crypto::KeyMaterial> secret_keys() const;

private:
    friend ExchangeSession start_session(Protocol, std::vector<Party>, Rng&, SessionId, const SessionOptions&);

    struct HeldEnvelope {
        std::vector<PieceId> pieces;
        crypto::CipherEnvelope envelope;
        std::size_t step = 0;
        bool opened = false;
    };

    struct PartyKeys {
        std::optional<crypto::KeyPair> data;      // TWO_KEY (basic) or SYMMETRIC (secure)
        std::optional<crypto::KeyPair> exchange;  // ASYMMETRIC, secure only
    };

    struct PartyView {
        std::vector<HeldEnvelope> envelopes;
        std::vector<std::optional<crypto::EncryptionKey>> peer_public;  // indexed by slot
    };

    ProtocolMessage build(std::size_t index) const;
    void apply(std::size_t index, const ProtocolMessage& message);
    void open_with(std::size_t slot, const crypto::DecryptionKey& key);
    [[nodiscard]] std::vector<PieceId> select(const PieceSelector& selector) const;

    SessionId id_ = 0;
    Protocol protocol_ = Protocol::L2L;
    std::vector<Party> parties_;
    std::vector<PieceId> shared_wants_;
    SessionOptions options_;
    std::vector<PartyKeys> keys_;
    std::vector<PartyView> views_;
    std::vector<ProtocolMessage> transcript_;
    ExchangeLedger ledger_;
};

/// Creates a session with fresh per-session keys.
///
/// L2L: two leechers; slot 0 holds what slot 1 wants and vice versa; slot 1
/// opens the exchange. L2S: one seeder and two leechers that want the same
/// two pieces. Secure: either shape, keys wrapped under public keys.
ExchangeSession start_session(Protocol protocol, std::vector<Party> parties, Rng& rng, SessionId id = 1,
                              const SessionOptions& options = {});

struct StepResult {
    ExchangeSession session;
    std::vector<ProtocolMessage> outgoing;
};

/// Pure transition: the input session is left untouched.
StepResult step(ExchangeSession session, const ProtocolMessage& message);

struct RunResult {
    std::vector<ProtocolMessage> transcript;
    ExchangeLedger ledger;
};

/// Delivers messages in emission order until nothing is left in flight.
RunResult run_to_completion(ExchangeSession session);

/// Runs honestly until `after_phase` messages are delivered, then `party`
/// sends nothing more. Throws Error(UnreachablePhase) past the last message.
RunResult inject_abort(ExchangeSession session, NodeId party, std::size_t after_phase);

/// bytes_decryptable - bytes_uploaded for one party.
std::int64_t betrayal_payoff(const ExchangeLedger& ledger, NodeId party);

/// One line per message:
/// `session=<id> step=<n> kind=<K> from=<node> to=<node> pieces=<a,b|-> payload_len=<n>`.
std::string format_transcript_line(const ProtocolMessage& message, std::size_t step);
std::string format_transcript(std::span<const ProtocolMessage> transcript);

}  // namespace fairswap::protocol
