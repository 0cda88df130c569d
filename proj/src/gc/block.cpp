#include "seco/gc/block.hpp"

#include <openssl/evp.h>

#include <memory>
#include <vector>

#include "seco/common/error.hpp"

namespace seco::gc {

namespace {

constexpr unsigned char kFixedKey[16] = {0x61, 0x7e, 0x8d, 0xa2, 0xa0, 0x51, 0x1e, 0x96,
                                         0x5e, 0x41, 0xc2, 0x9b, 0x15, 0x3f, 0xc7, 0x7a};

struct CtxDeleter {
    void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};

EVP_CIPHER_CTX* thread_ctx() {
    thread_local std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter> ctx = [] {
        std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter> c(EVP_CIPHER_CTX_new());
        if (!c || EVP_EncryptInit_ex(c.get(), EVP_aes_128_ecb(), nullptr, kFixedKey, nullptr) != 1)
            throw Error("AES context initialisation failed");
        EVP_CIPHER_CTX_set_padding(c.get(), 0);
        return c;
    }();
    return ctx.get();
}

}  // namespace

void aes_fixed_key(const Block* in, Block* out, size_t n) {
    EVP_CIPHER_CTX* ctx = thread_ctx();
    constexpr size_t kChunk = 1 << 20;  // blocks per call, keeps the int length in range
    for (size_t off = 0; off < n; off += kChunk) {
        const size_t m = std::min(kChunk, n - off);
        int len = 0;
        if (EVP_EncryptUpdate(ctx, reinterpret_cast<unsigned char*>(out + off), &len,
                              reinterpret_cast<const unsigned char*>(in + off), static_cast<int>(m * 16)) != 1)
            throw Error("AES encryption failed");
    }
}

void hash_blocks(Block* x, size_t n) {
    thread_local std::vector<Block> tmp;
    tmp.resize(n);
    aes_fixed_key(x, tmp.data(), n);
    for (size_t i = 0; i < n; ++i) x[i] ^= tmp[i];
}

}  // namespace seco::gc
