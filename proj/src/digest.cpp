#include "sparseprov/digest.hpp"

#include "sparseprov/errors.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <memory>

namespace sparseprov {

namespace {

struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

// Digest contexts are reused per thread; allocating one per call costs more
// than the compression itself for the short inputs used here.
EVP_MD_CTX* thread_ctx()
{
    thread_local std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
    return ctx.get();
}

// Explicitly fetched once: EVP_sha256() triggers a provider lookup on every
// EVP_DigestInit_ex call under OpenSSL 3.
const EVP_MD* sha256_md()
{
    static EVP_MD* md = [] {
        EVP_MD* fetched = EVP_MD_fetch(nullptr, "SHA256", nullptr);
        return fetched ? fetched : const_cast<EVP_MD*>(EVP_sha256());
    }();
    return md;
}

} // namespace

Digest sha256(std::initializer_list<std::span<const std::uint8_t>> parts)
{
    EVP_MD_CTX* ctx = thread_ctx();
    EVP_DigestInit_ex(ctx, sha256_md(), nullptr);
    for (const auto& part : parts)
        EVP_DigestUpdate(ctx, part.data(), part.size());
    Digest out{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, out.data(), &len);
    return out;
}

Digest sha256(std::span<const std::uint8_t> data)
{
    return sha256({data});
}

Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message)
{
    Digest out{};
    unsigned int len = 0;
    HMAC(sha256_md(), key.data(), static_cast<int>(key.size()), message.data(), message.size(),
         out.data(), &len);
    return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

Bytes from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0)
        throw ConfigError("hex string has odd length");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw ConfigError(std::string("invalid hex character '") + c + "'");
    };
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    return out;
}

} // namespace sparseprov
