#include "sparseprov/bloom_filter.hpp"
#include "sparseprov/errors.hpp"

#include <doctest.h>

#include <numeric>

using namespace sparseprov;

namespace {

Bytes item_bytes(std::uint64_t x)
{
    Bytes b;
    append_be32(b, static_cast<std::uint32_t>(x >> 32));
    append_be32(b, static_cast<std::uint32_t>(x));
    return b;
}

} // namespace

TEST_SUITE("filter")
{
    TEST_CASE("derive_index known answers")
    {
        Bytes item(32);
        std::iota(item.begin(), item.end(), 0);
        CHECK(derive_index(item, 0x01020304, 1000, 1) == 435);
        CHECK(derive_index(item, 0x01020304, 1000, 2) == 602);
        CHECK(derive_index(item, 0x01020304, 1000, 3) == 306);
        CHECK(derive_index(item, 0x01020304, 20, 1) == 15);
        CHECK(derive_index(item, 0x01020304, 20, 2) == 2);
        CHECK(derive_index(item, 0x01020304, 20, 3) == 6);

        const auto idx = derive_indices(item, 0x01020304, 1000, 3);
        CHECK(idx.indices == std::vector<std::uint32_t>{435, 602, 306});
    }

    TEST_CASE("parameter validation")
    {
        CHECK_THROWS_AS(BloomFilter(0, 1), ConfigError);
        CHECK_THROWS_AS(BloomFilter(8, 0), ConfigError);
        CHECK_THROWS_AS(BloomFilter(8, 9), ConfigError);
        Bytes item = {1, 2, 3};
        CHECK_THROWS_AS(derive_indices(item, 0, 4, 5), ConfigError);
        BloomFilter f(16, 2);
        CHECK_THROWS_AS(f.insert({{3, 16}}), ConfigError);
    }

    TEST_CASE("no false negatives")
    {
        BloomFilter f(4096, 5);
        for (std::uint64_t x = 0; x < 100000; ++x) {
            const auto b = item_bytes(x);
            f.insert_item(b, 77);
        }
        bool all = true;
        for (std::uint64_t x = 0; x < 100000; ++x)
            all = all && f.contains_item(item_bytes(x), 77);
        CHECK(all);

        BloomFilter g(64, 3);
        for (std::uint64_t x = 0; x < 10; ++x) {
            const auto idx = derive_indices(item_bytes(x), 5, 64, 3);
            g.insert(idx);
            CHECK(g.contains(idx));
        }
    }

    TEST_CASE("lazy and eager membership agree")
    {
        BloomFilter f(48, 4);
        for (std::uint64_t x = 0; x < 6; ++x)
            f.insert_item(item_bytes(x), 9);
        for (std::uint64_t x = 0; x < 2000; ++x) {
            const auto b = item_bytes(x);
            CHECK(f.contains_item(b, 9) == f.contains(derive_indices(b, 9, 48, 4)));
        }
    }

    TEST_CASE("indices are uniform")
    {
        // 64 cells, 64000 draws, chi-square with 63 degrees of freedom.
        // 103.4 is the 0.999 quantile; inputs are fixed so the outcome is too.
        const std::uint32_t m = 64;
        std::vector<double> count(m, 0);
        const std::size_t draws = 64000;
        for (std::uint64_t x = 0; x < draws / 2; ++x)
            for (std::uint16_t r = 1; r <= 2; ++r)
                count[derive_index(item_bytes(x), 3, m, r)] += 1;
        const double expect = static_cast<double>(draws) / m;
        double chi2 = 0;
        for (double c : count)
            chi2 += (c - expect) * (c - expect) / expect;
        CHECK(chi2 < 103.4);
    }

    TEST_CASE("sequence numbers change the positions")
    {
        const auto b = item_bytes(42);
        CHECK(derive_indices(b, 1, 1u << 20, 4).indices !=
              derive_indices(b, 2, 1u << 20, 4).indices);
    }

    TEST_CASE("bit layout and wire format")
    {
        BloomFilter f(12, 2);
        f.set(0);
        f.set(9);
        const auto w = f.serialize();
        REQUIRE(w.size() == 4 + 2 + 2);
        CHECK(w == Bytes{0, 0, 0, 12, 0, 2, 0x80, 0x40});
        CHECK(BloomFilter::deserialize(w) == f);
        CHECK(f.popcount() == 2);

        BloomFilter big(1000, 7);
        for (std::uint64_t x = 0; x < 50; ++x)
            big.insert_item(item_bytes(x), 1);
        auto wire = big.serialize();
        wire.push_back(0xee);
        std::size_t used = 0;
        CHECK(BloomFilter::deserialize(wire, &used) == big);
        CHECK(used == wire.size() - 1);
    }

    TEST_CASE("deserialize rejects bad input")
    {
        CHECK_THROWS_AS(BloomFilter::deserialize(Bytes{0, 0, 0}), ConfigError);
        CHECK_THROWS_AS(BloomFilter::deserialize(Bytes{0, 0, 0, 12, 0, 2, 0x80}), ConfigError);
        CHECK_THROWS_AS(BloomFilter::deserialize(Bytes{0, 0, 0, 12, 0, 2, 0x80, 0x41}), ConfigError);
        CHECK_THROWS_AS(BloomFilter::deserialize(Bytes{0, 0, 0, 0, 0, 1}), ConfigError);
        CHECK_THROWS_AS(BloomFilter::deserialize(Bytes{0, 0, 0, 4, 0, 5, 0}), ConfigError);
    }

    TEST_CASE("saturated filter accepts everything")
    {
        BloomFilter f(33, 3);
        f.saturate();
        CHECK(f.popcount() == 33);
        CHECK(f.contains_item(item_bytes(123456), 0));
        CHECK(BloomFilter::deserialize(f.serialize()) == f);
    }
}
