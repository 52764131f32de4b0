#pragma once

#include <cstdint>
#include <unordered_map>

#include "nasdag/hash.hpp"

namespace nasdag {

/// Stand-in for an asymmetric signature: the tag is a keyed digest of the
/// payload under the signer's secret, checkable only through a KeyRegistry.
struct ModeledSignature {
    Address signer{};
    Digest payload{};
    Digest tag{};

    bool operator==(const ModeledSignature&) const = default;
};

Address address_of_secret(const Digest& secret);
Digest signature_tag(const Digest& secret, const Digest& payload);

class Signer {
public:
    explicit Signer(const Digest& secret) : secret_(secret), address_(address_of_secret(secret)) {}

    const Address& address() const { return address_; }
    ModeledSignature sign(const Digest& payload) const {
        return ModeledSignature{address_, payload, signature_tag(secret_, payload)};
    }

private:
    Digest secret_;
    Address address_;
};

/// Public-key directory of the simulation. Secrets never leave it; callers
/// only learn whether a signature verifies.
class KeyRegistry {
public:
    Address add(const Digest& secret);
    bool known(const Address& a) const { return secrets_.count(a) != 0; }
    bool verify(const ModeledSignature& sig) const;

private:
    std::unordered_map<Address, Digest> secrets_;
};

/// Counts verifications as the CPU-cost proxy.
class Verifier {
public:
    explicit Verifier(const KeyRegistry& reg) : reg_(&reg) {}

    bool verify(const ModeledSignature& sig, const Address& expected_signer,
                const Digest& expected_payload) {
        ++count_;
        return sig.signer == expected_signer && sig.payload == expected_payload && reg_->verify(sig);
    }
    std::uint64_t count() const { return count_; }

private:
    const KeyRegistry* reg_;
    std::uint64_t count_ = 0;
};

/// Deterministic secret for a named identity under a scenario seed.
Digest derive_secret(const Digest& seed, std::string_view name, std::uint64_t counter = 0);

}  // namespace nasdag
