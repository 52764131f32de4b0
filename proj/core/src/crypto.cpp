#include "nasdag/crypto.hpp"

namespace nasdag {

Address address_of_secret(const Digest& secret) {
    return retag<Address>(Sha256().update("addr").update(secret).finish());
}

Digest signature_tag(const Digest& secret, const Digest& payload) {
    return Sha256().update("sig").update(secret).update(payload).finish();
}

Address KeyRegistry::add(const Digest& secret) {
    Address a = address_of_secret(secret);
    secrets_.emplace(a, secret);
    return a;
}

bool KeyRegistry::verify(const ModeledSignature& sig) const {
    auto it = secrets_.find(sig.signer);
    if (it == secrets_.end()) return false;
    return signature_tag(it->second, sig.payload) == sig.tag;
}

Digest derive_secret(const Digest& seed, std::string_view name, std::uint64_t counter) {
    return Sha256().update("secret").update(seed).update(name).update_u64(counter).finish();
}

}  // namespace nasdag
