#include "sparseprov/digest.hpp"
#include "sparseprov/errors.hpp"

#include <doctest.h>

#include <string>

using namespace sparseprov;

namespace {

std::span<const std::uint8_t> bytes_of(const std::string& s)
{
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

} // namespace

TEST_SUITE("digest")
{
    TEST_CASE("sha256 known answer")
    {
        CHECK(to_hex(sha256(bytes_of("abc"))) ==
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        CHECK(to_hex(sha256(bytes_of(""))) ==
              "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    TEST_CASE("multi-part hashing equals hashing the concatenation")
    {
        const std::string a = "hello ", b = "world";
        CHECK(sha256({bytes_of(a), bytes_of(b)}) == sha256(bytes_of(a + b)));
    }

    TEST_CASE("hmac-sha256, RFC 4231 case 2")
    {
        CHECK(to_hex(hmac_sha256(bytes_of("Jefe"), bytes_of("what do ya want for nothing?"))) ==
              "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
    }

    TEST_CASE("hex round trip and errors")
    {
        const Bytes b = {0x00, 0x7f, 0xff, 0x10};
        CHECK(to_hex(b) == "007fff10");
        CHECK(from_hex("007FFF10") == b);
        CHECK_THROWS_AS(from_hex("abc"), ConfigError);
        CHECK_THROWS_AS(from_hex("zz"), ConfigError);
    }

    TEST_CASE("big-endian helpers")
    {
        CHECK(be16(0x1234) == std::array<std::uint8_t, 2>{0x12, 0x34});
        CHECK(be32(0x01020304) == std::array<std::uint8_t, 4>{1, 2, 3, 4});
        Bytes out;
        append_be16(out, 0xabcd);
        append_be32(out, 0x01020304);
        CHECK(out == Bytes{0xab, 0xcd, 1, 2, 3, 4});
    }
}
