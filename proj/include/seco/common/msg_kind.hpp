#pragma once

#include <cstdint>

namespace seco {

// Message kinds carried in frame headers. One list for every module so transcripts
// can be audited by kind.
enum class MsgKind : uint16_t {
    // setup
    CommonSeed = 0x0001,   // A -> B, C: seed for the shared p1
    PartyPublicKey,        // B, C -> A
    CommonPublicKey,       // A -> B, C (and to the user in preprocessing)
    BaseOtSetup,           // OT base phase, either direction
    BaseOtReply,
    BaseOtPayload,         // chosen messages under the base OT keys

    // distributed decryption
    DisdecCiphertext = 0x0100,  // A -> B, C
    DisdecPartial,              // B, C -> A

    // preprocessing
    UserPublicKey = 0x0200,  // user -> A, A -> B, C
    UserGaloisKeys,          // user -> A
    MaskCiphertext,          // encrypted r (gateway: user -> A; remote: contributors -> A)
    MaskCiphertextSum,       // A -> B, C
    LinearResult,            // ciphertext results of a linear layer
    LinearShare,             // decrypted share to its owner (A -> user for gateway layers)
    GarbledTables,           // garbler -> evaluator
    GarblerLabels,           // garbler's own input labels
    OtExtension,             // IKNP messages, either direction
    OtExtensionReply,
    ForwardedLabels,         // A -> C: labels A obtained by OT
    OutputDecoding,          // decode bits for an output wire set
    ModelShare,              // test-only model distribution, not used by the protocol

    // online
    MaskedInput = 0x0300,  // user -> A: x1 - r1
    TransitionInput,       // A -> B, C: x_{l+1} - r_{l+1}
    EvaluatorLabels,       // labels for online inputs
    MaskedOutput,          // evaluator -> next holder: masked ReLU output
    OutputCiphertext,      // B, C -> A, A -> user
    PlainOutput,           // A -> user when l = L
};

inline uint16_t kind(MsgKind k) { return static_cast<uint16_t>(k); }

}  // namespace seco
