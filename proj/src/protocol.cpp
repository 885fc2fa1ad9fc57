#include "fairswap/protocol.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <sstream>

#include "fairswap/error.hpp"

namespace fairswap::protocol {

namespace {

using Source = PieceSelector::Source;

constexpr PieceSelector kNoPieces{};
constexpr PieceSelector wants_of(std::size_t slot) { return {Source::WantsOf, slot}; }
constexpr PieceSelector kFirst{Source::SharedFirst, 0};
constexpr PieceSelector kSecond{Source::SharedSecond, 0};
constexpr PieceSelector kBoth{Source::SharedBoth, 0};

// Slots: 0 = n1 (holds what n2 asks for), 1 = n2 (opens the exchange).
constexpr std::array<ScriptEntry, 6> kLeecherToLeecher{{
    {MessageKind::Req, 1, 0, wants_of(1), PayloadKind::None, 0, 0, -1, "AwaitQ1"},
    {MessageKind::Req, 0, 1, wants_of(0), PayloadKind::None, 0, 0, 0, "AwaitQ2"},
    {MessageKind::Data, 0, 1, wants_of(1), PayloadKind::SealData, 0, 0, 0, "AwaitQ3"},
    {MessageKind::Data, 1, 0, wants_of(0), PayloadKind::SealData, 1, 0, 2, "AwaitQ4"},
    {MessageKind::Exc, 0, 1, kNoPieces, PayloadKind::ReleaseKey, 0, 0, 3, "AwaitQ5"},
    {MessageKind::Exc, 1, 0, kNoPieces, PayloadKind::ReleaseKey, 1, 0, 4, "AwaitQ6"},
}};

// Slots: 0 = seeder, 1 = n1, 2 = n2; both leechers want {X1, X2}.
constexpr std::array<ScriptEntry, 10> kLeecherToSeeder{{
    {MessageKind::Req, 1, 0, kBoth, PayloadKind::None, 0, 0, -1, "AwaitRequests"},
    {MessageKind::Req, 2, 0, kBoth, PayloadKind::None, 0, 0, -1, "AwaitSecondRequest"},
    {MessageKind::Data, 0, 1, kFirst, PayloadKind::SealData, 0, 0, 1, "AwaitData1"},
    {MessageKind::Data, 0, 2, kSecond, PayloadKind::SealData, 0, 0, 1, "AwaitData2"},
    {MessageKind::Data, 1, 2, kFirst, PayloadKind::Forward, 0, 2, 2, "AwaitRelay1"},
    {MessageKind::Data, 2, 1, kSecond, PayloadKind::Forward, 0, 3, 3, "AwaitRelay2"},
    {MessageKind::Ack, 2, 0, kFirst, PayloadKind::None, 0, 0, 4, "AwaitAck1"},
    {MessageKind::Exc, 0, 1, kNoPieces, PayloadKind::ReleaseKey, 0, 0, 6, "AwaitKey1"},
    {MessageKind::Ack, 1, 0, kSecond, PayloadKind::None, 0, 0, 7, "AwaitAck2"},
    {MessageKind::Exc, 0, 2, kNoPieces, PayloadKind::ReleaseKey, 0, 0, 8, "AwaitKey2"},
}};

// Slots: 0 = A (holds what B asks for), 1 = B (opens the exchange).
constexpr std::array<ScriptEntry, 7> kSecurePair{{
    {MessageKind::Req, 1, 0, wants_of(1), PayloadKind::None, 0, 0, -1, "AwaitQ1"},
    {MessageKind::Exc, 0, 1, kNoPieces, PayloadKind::PublicKey, 0, 0, 0, "AwaitQ2"},
    {MessageKind::Exc, 1, 0, kNoPieces, PayloadKind::PublicKey, 1, 0, 1, "AwaitQ3"},
    {MessageKind::Data, 0, 1, wants_of(1), PayloadKind::SealData, 0, 0, 2, "AwaitQ4"},
    {MessageKind::Data, 1, 0, wants_of(0), PayloadKind::SealData, 1, 0, 3, "AwaitQ5"},
    {MessageKind::Exc, 0, 1, kNoPieces, PayloadKind::WrappedKey, 0, 0, 4, "AwaitQ6"},
    {MessageKind::Exc, 1, 0, kNoPieces, PayloadKind::WrappedKey, 1, 0, 5, "AwaitQ7"},
}};

// Seeder ordering with the data key delivered wrapped: leechers announce
// their public keys up front, the seeder seals under its symmetric key.
constexpr std::array<ScriptEntry, 12> kSecureSeeder{{
    {MessageKind::Req, 1, 0, kBoth, PayloadKind::None, 0, 0, -1, "AwaitRequests"},
    {MessageKind::Req, 2, 0, kBoth, PayloadKind::None, 0, 0, -1, "AwaitSecondRequest"},
    {MessageKind::Exc, 1, 0, kNoPieces, PayloadKind::PublicKey, 1, 0, -1, "AwaitPublicKey1"},
    {MessageKind::Exc, 2, 0, kNoPieces, PayloadKind::PublicKey, 2, 0, -1, "AwaitPublicKey2"},
    {MessageKind::Data, 0, 1, kFirst, PayloadKind::SealData, 0, 0, 3, "AwaitData1"},
    {MessageKind::Data, 0, 2, kSecond, PayloadKind::SealData, 0, 0, 3, "AwaitData2"},
    {MessageKind::Data, 1, 2, kFirst, PayloadKind::Forward, 0, 4, 4, "AwaitRelay1"},
    {MessageKind::Data, 2, 1, kSecond, PayloadKind::Forward, 0, 5, 5, "AwaitRelay2"},
    {MessageKind::Ack, 2, 0, kFirst, PayloadKind::None, 0, 0, 6, "AwaitAck1"},
    {MessageKind::Exc, 0, 1, kNoPieces, PayloadKind::WrappedKey, 0, 0, 8, "AwaitKey1"},
    {MessageKind::Ack, 1, 0, kSecond, PayloadKind::None, 0, 0, 9, "AwaitAck2"},
    {MessageKind::Exc, 0, 2, kNoPieces, PayloadKind::WrappedKey, 0, 0, 10, "AwaitKey2"},
}};

std::vector<PieceId> sorted_copy(std::vector<PieceId> pieces) {
    std::sort(pieces.begin(), pieces.end());
    return pieces;
}

bool has_duplicates(const std::vector<PieceId>& pieces) {
    const auto sorted = sorted_copy(pieces);
    return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

Bytes concat_content(const std::vector<PieceId>& pieces, const SessionOptions& options) {
    Bytes out;
    for (const PieceId piece : pieces) {
        const Bytes content = piece_content(piece, options.piece_size, options.content_seed);
        out.insert(out.end(), content.begin(), content.end());
    }
    return out;
}

void validate_pair(const std::vector<Party>& parties) {
    if (parties.size() != 2 || parties[0].role != PartyRole::Leecher || parties[1].role != PartyRole::Leecher ||
        parties[0].id == parties[1].id) {
        throw Error(ErrorCode::BadRoleAssignment, "a pairwise exchange needs two distinct leechers");
    }
    for (const Party& party : parties) {
        if (party.wants.empty()) throw Error(ErrorCode::EmptyWants, "each leecher must want something");
        if (has_duplicates(party.wants)) throw Error(ErrorCode::MismatchedWants, "duplicate piece in wants");
    }
    for (const PieceId piece : parties[0].wants) {
        if (std::find(parties[1].wants.begin(), parties[1].wants.end(), piece) != parties[1].wants.end()) {
            throw Error(ErrorCode::MismatchedWants, "pairwise wants must be disjoint");
        }
    }
}

std::vector<Party> seeder_first(std::vector<Party> parties) {
    if (parties.size() != 3) {
        throw Error(ErrorCode::BadRoleAssignment, "a seeder exchange needs one seeder and two leechers");
    }
    const auto seeders = std::count_if(parties.begin(), parties.end(),
                                       [](const Party& p) { return p.role == PartyRole::Seeder; });
    if (seeders != 1) {
        throw Error(ErrorCode::BadRoleAssignment, "a seeder exchange needs exactly one seeder");
    }
    std::stable_partition(parties.begin(), parties.end(), [](const Party& p) { return p.role == PartyRole::Seeder; });
    if (parties[0].id == parties[1].id || parties[0].id == parties[2].id || parties[1].id == parties[2].id) {
        throw Error(ErrorCode::BadRoleAssignment, "parties must be distinct nodes");
    }
    for (std::size_t slot = 1; slot < 3; ++slot) {
        if (parties[slot].wants.empty()) throw Error(ErrorCode::EmptyWants, "each leecher must want something");
    }
    if (parties[1].wants.size() != 2 || has_duplicates(parties[1].wants) ||
        sorted_copy(parties[1].wants) != sorted_copy(parties[2].wants)) {
        throw Error(ErrorCode::MismatchedWants, "both leechers must want the same two pieces");
    }
    return parties;
}

}  // namespace

std::string_view to_string(Protocol protocol) noexcept {
    switch (protocol) {
        case Protocol::L2L: return "L2L";
        case Protocol::L2S: return "L2S";
        case Protocol::Secure: return "SECURE";
    }
    return "?";
}

std::string_view to_string(MessageKind kind) noexcept {
    switch (kind) {
        case MessageKind::Req: return "REQ";
        case MessageKind::Data: return "DATA";
        case MessageKind::Exc: return "EXC";
        case MessageKind::Ack: return "ACK";
    }
    return "?";
}

bool well_formed(const ProtocolMessage& message) {
    const bool refs = !message.piece_refs.empty();
    const bool env = message.envelope.has_value();
    const bool key = message.key_material.has_value();
    switch (message.kind) {
        case MessageKind::Req:
        case MessageKind::Ack: return refs && !env && !key;
        case MessageKind::Data: return env && !key;
        case MessageKind::Exc: return env != key;
    }
    return false;
}

std::size_t payload_len(const ProtocolMessage& message) {
    if (message.envelope) return message.envelope->payload.size();
    if (message.key_material) return message.key_material->size();
    return 0;
}

std::span<const ScriptEntry> script(Protocol protocol, std::size_t party_count) {
    switch (protocol) {
        case Protocol::L2L: return kLeecherToLeecher;
        case Protocol::L2S: return kLeecherToSeeder;
        case Protocol::Secure:
            if (party_count == 3) return kSecureSeeder;
            return kSecurePair;
    }
    return {};
}

Bytes piece_content(PieceId piece, std::size_t piece_size, std::uint64_t content_seed) {
    Bytes out(piece_size);
    std::uint64_t state = content_seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(piece) + 1));
    for (std::size_t i = 0; i < piece_size; ++i) {
        if (i % 8 == 0) {
            state += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = state;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            state ^= z ^ (z >> 31);
        }
        out[i] = static_cast<std::uint8_t>(state >> (8 * (i % 8)));
    }
    return out;
}

const PartyLedger& ExchangeLedger::of(NodeId node) const {
    for (const PartyLedger& party : parties) {
        if (party.node == node) return party;
    }
    throw Error(ErrorCode::BadRoleAssignment, "node is not a party to this exchange");
}

// ---------------------------------------------------------------------------

ExchangeSession start_session(Protocol protocol, std::vector<Party> parties, Rng& rng, SessionId id,
                              const SessionOptions& options) {
    if (options.piece_size == 0) {
        throw Error(ErrorCode::InvalidConfig, "piece_size must be positive");
    }
    const bool three_party = protocol == Protocol::L2S || (protocol == Protocol::Secure && parties.size() == 3);
    if (three_party) {
        parties = seeder_first(std::move(parties));
    } else {
        validate_pair(parties);
    }

    ExchangeSession session;
    session.id_ = id;
    session.protocol_ = protocol;
    session.parties_ = std::move(parties);
    session.options_ = options;
    if (three_party) session.shared_wants_ = session.parties_[1].wants;

    const std::size_t n = session.parties_.size();
    session.keys_.resize(n);
    session.views_.resize(n);
    for (auto& view : session.views_) view.peer_public.resize(n);
    for (std::size_t slot = 0; slot < n; ++slot) {
        PartyLedger entry;
        entry.node = session.parties_[slot].id;
        session.ledger_.parties.push_back(std::move(entry));
    }

    using crypto::KeyScheme;
    switch (protocol) {
        case Protocol::L2L:
            for (auto& keys : session.keys_) keys.data = crypto::keygen(KeyScheme::TwoKey, rng, options.keygen);
            break;
        case Protocol::L2S:
            session.keys_[0].data = crypto::keygen(KeyScheme::TwoKey, rng, options.keygen);
            break;
        case Protocol::Secure:
            for (std::size_t slot = 0; slot < n; ++slot) {
                const bool seeder = three_party && slot == 0;
                const bool leecher_of_seeder = three_party && slot != 0;
                if (!leecher_of_seeder) {
                    session.keys_[slot].data = crypto::keygen(KeyScheme::Symmetric, rng, options.keygen);
                }
                if (!seeder) {
                    session.keys_[slot].exchange = crypto::keygen(KeyScheme::Asymmetric, rng, options.keygen);
                }
            }
            break;
    }
    return session;
}

Phase ExchangeSession::phase() const {
    const auto entries = steps();
    const std::size_t index = transcript_.size();
    return Phase(index, index < entries.size() ? entries[index].awaiting : std::string_view("Complete"));
}

bool ExchangeSession::complete() const noexcept {
    return transcript_.size() == steps().size();
}

std::size_t ExchangeSession::slot_of(NodeId node) const {
    for (std::size_t slot = 0; slot < parties_.size(); ++slot) {
        if (parties_[slot].id == node) return slot;
    }
    throw Error(ErrorCode::BadRoleAssignment, "node is not a party to this exchange");
}

std::vector<PieceId> ExchangeSession::select(const PieceSelector& selector) const {
    switch (selector.source) {
        case Source::None: return {};
        case Source::WantsOf: return parties_[selector.slot].wants;
        case Source::SharedFirst: return {shared_wants_[0]};
        case Source::SharedSecond: return {shared_wants_[1]};
        case Source::SharedBoth: return shared_wants_;
    }
    return {};
}

std::vector<ProtocolMessage> ExchangeSession::opening_messages() const {
    std::vector<ProtocolMessage> out;
    const auto entries = steps();
    for (std::size_t index = 0; index < entries.size(); ++index) {
        if (entries[index].trigger < 0) out.push_back(build(index));
    }
    return out;
}

ProtocolMessage ExchangeSession::build(std::size_t index) const {
    const ScriptEntry& entry = steps()[index];
    ProtocolMessage message;
    message.kind = entry.kind;
    message.sender = parties_[entry.sender].id;
    message.receiver = parties_[entry.receiver].id;
    message.piece_refs = select(entry.pieces);
    message.session_id = id_;

    switch (entry.payload) {
        case PayloadKind::None: break;
        case PayloadKind::SealData:
            message.envelope = crypto::encrypt(concat_content(message.piece_refs, options_), keys_[entry.owner].data->enc_key);
            break;
        case PayloadKind::Forward: {
            const auto& held = views_[entry.sender].envelopes;
            const auto it = std::find_if(held.begin(), held.end(),
                                         [&](const HeldEnvelope& h) { return h.step == entry.forward_of + 1; });
            if (it == held.end()) throw Error(ErrorCode::OutOfOrderMessage, "nothing to relay yet");
            message.envelope = it->envelope;
            break;
        }
        case PayloadKind::ReleaseKey:
            message.key_material = crypto::encode_key(keys_[entry.owner].data->dec_key.material);
            break;
        case PayloadKind::PublicKey:
            message.key_material = crypto::encode_key(keys_[entry.owner].exchange->enc_key.material);
            break;
        case PayloadKind::WrappedKey: {
            const auto& recipient_key = views_[entry.owner].peer_public[entry.receiver];
            if (!recipient_key) throw Error(ErrorCode::OutOfOrderMessage, "receiver's public key not known yet");
            message.envelope = crypto::wrap_key(keys_[entry.owner].data->dec_key.material, *recipient_key);
            break;
        }
    }
    return message;
}

void ExchangeSession::open_with(std::size_t slot, const crypto::DecryptionKey& key) {
    PartyLedger& ledger = ledger_.parties[slot];
    for (HeldEnvelope& held : views_[slot].envelopes) {
        if (held.opened) continue;
        Bytes plain;
        try {
            plain = crypto::decrypt(held.envelope, key);
        } catch (const Error&) {
            continue;
        }
        if (plain != concat_content(held.pieces, options_)) continue;
        held.opened = true;
        ledger.bytes_decryptable += static_cast<std::int64_t>(plain.size());
        ledger.decrypted_pieces.insert(ledger.decrypted_pieces.end(), held.pieces.begin(), held.pieces.end());
        if (!ledger.first_decrypt_step) ledger.first_decrypt_step = transcript_.size() + 1;
    }
}

void ExchangeSession::apply(std::size_t index, const ProtocolMessage& message) {
    const std::size_t step_no = index + 1;
    const std::size_t from = slot_of(message.sender);
    const std::size_t to = slot_of(message.receiver);

    switch (message.kind) {
        case MessageKind::Req:
        case MessageKind::Ack: break;
        case MessageKind::Data: {
            views_[to].envelopes.push_back(HeldEnvelope{message.piece_refs, *message.envelope, step_no});
            PartyLedger& sender = ledger_.parties[from];
            sender.bytes_uploaded += static_cast<std::int64_t>(message.envelope->plaintext_len);
            if (!sender.first_upload_step) sender.first_upload_step = step_no;
            break;
        }
        case MessageKind::Exc: {
            if (message.envelope) {
                const auto& own = keys_[to].exchange;
                if (!own) throw Error(ErrorCode::OutOfOrderMessage, "receiver holds no private key");
                const crypto::KeyMaterial data_key = crypto::unwrap_key(*message.envelope, own->dec_key);
                ledger_.parties[from].keys_released.push_back(data_key.key_id);
                open_with(to, crypto::DecryptionKey{data_key});
                break;
            }
            const crypto::KeyMaterial key = crypto::decode_key(*message.key_material);
            if (key.scheme == crypto::KeyScheme::Asymmetric) {
                views_[to].peer_public[from] = crypto::EncryptionKey{key};
            } else {
                ledger_.parties[from].keys_released.push_back(key.key_id);
                open_with(to, crypto::DecryptionKey{key});
            }
            break;
        }
    }
}

std::vector<ProtocolMessage> ExchangeSession::deliver(const ProtocolMessage& message) {
    if (message.session_id != id_) {
        throw Error(ErrorCode::UnknownSession, "message belongs to session " + std::to_string(message.session_id));
    }
    if (aborted() || complete()) {
        throw Error(ErrorCode::OutOfOrderMessage, "session is no longer accepting messages");
    }
    const std::size_t index = transcript_.size();
    const ScriptEntry& expected = steps()[index];
    const bool matches = message.kind == expected.kind && message.sender == parties_[expected.sender].id &&
                         message.receiver == parties_[expected.receiver].id &&
                         message.piece_refs == select(expected.pieces) && well_formed(message);
    if (!matches) {
        abort();
        throw Error(ErrorCode::OutOfOrderMessage, std::string(to_string(message.kind)) + " is not legal in phase " +
                                                      std::string(expected.awaiting));
    }

    transcript_.push_back(message);
    apply(index, transcript_.back());

    std::vector<ProtocolMessage> outgoing;
    const auto entries = steps();
    for (std::size_t next = index + 1; next < entries.size(); ++next) {
        if (entries[next].trigger == static_cast<int>(index)) outgoing.push_back(build(next));
    }
    return outgoing;
}

void ExchangeSession::abort() {
    if (!ledger_.aborted_at && !complete()) ledger_.aborted_at = phase();
}

std::vector<crypto::KeyMaterial> ExchangeSession::secret_keys() const {
    std::vector<crypto::KeyMaterial> out;
    for (const PartyKeys& keys : keys_) {
        if (keys.data) out.push_back(keys.data->dec_key.material);
        if (keys.exchange) out.push_back(keys.exchange->dec_key.material);
    }
    return out;
}

// ---------------------------------------------------------------------------

StepResult step(ExchangeSession session, const ProtocolMessage& message) {
    auto outgoing = session.deliver(message);
    return StepResult{std::move(session), std::move(outgoing)};
}

RunResult run_to_completion(ExchangeSession session) {
    auto opening = session.opening_messages();
    std::deque<ProtocolMessage> in_flight(opening.begin(), opening.end());
    while (!in_flight.empty()) {
        ProtocolMessage next = std::move(in_flight.front());
        in_flight.pop_front();
        for (auto& reply : session.deliver(next)) in_flight.push_back(std::move(reply));
    }
    session.abort();  // no-op when complete
    return RunResult{session.transcript(), session.ledger()};
}

RunResult inject_abort(ExchangeSession session, NodeId party, std::size_t after_phase) {
    if (after_phase > session.steps().size()) {
        throw Error(ErrorCode::UnreachablePhase,
                    "phase " + std::to_string(after_phase) + " is past the end of the " +
                        std::string(to_string(session.protocol())) + " exchange");
    }
    (void)session.slot_of(party);

    auto opening = session.opening_messages();
    std::deque<ProtocolMessage> in_flight(opening.begin(), opening.end());
    while (!in_flight.empty()) {
        ProtocolMessage next = std::move(in_flight.front());
        in_flight.pop_front();
        if (session.phase().index() >= after_phase && next.sender == party) break;
        for (auto& reply : session.deliver(next)) in_flight.push_back(std::move(reply));
    }
    session.abort();
    return RunResult{session.transcript(), session.ledger()};
}

std::int64_t betrayal_payoff(const ExchangeLedger& ledger, NodeId party) {
    const PartyLedger& entry = ledger.of(party);
    return entry.bytes_decryptable - entry.bytes_uploaded;
}

std::string format_transcript_line(const ProtocolMessage& message, std::size_t step) {
    std::ostringstream out;
    out << "session=" << message.session_id << " step=" << step << " kind=" << to_string(message.kind)
        << " from=" << message.sender.value << " to=" << message.receiver.value << " pieces=";
    if (message.piece_refs.empty()) {
        out << '-';
    } else {
        for (std::size_t i = 0; i < message.piece_refs.size(); ++i) {
            if (i != 0) out << ',';
            out << message.piece_refs[i];
        }
    }
    out << " payload_len=" << payload_len(message);
    return out.str();
}

std::string format_transcript(std::span<const ProtocolMessage> transcript) {
    std::string out;
    for (std::size_t i = 0; i < transcript.size(); ++i) {
        out += format_transcript_line(transcript[i], i + 1);
        out += '\n';
    }
    return out;
}

}  // namespace fairswap::protocol
