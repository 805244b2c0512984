#pragma once

#include <array>
#include <cstdint>

namespace thincount {

//! Identifies one reproducible random stream.
struct RngSpec
{
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    friend bool operator==(RngSpec const&, RngSpec const&) = default;
};

//! Independent child stream for replication `index`, tagged by `purpose`.
RngSpec substream(RngSpec base, std::uint64_t index, std::uint32_t purpose = 0) noexcept;

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

//! Philox4x32 with 10 rounds (Salmon et al., SC'11).
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

//---------------------------------------------------------------------------//
/*!
 * Counter-based generator: the seed is the Philox key and the stream id fills
 * the upper half of the counter, so distinct streams never overlap and the
 * output depends only on (seed, stream, position).
 */
class CounterRng
{
public:
    explicit CounterRng(RngSpec spec) noexcept;

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;
    //! Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;

    RngSpec spec() const noexcept { return spec_; }
    std::uint64_t blocks_used() const noexcept { return block_; }

private:
    void refill() noexcept;

    RngSpec spec_;
    PhiloxKey key_;
    std::uint64_t block_ = 0;
    PhiloxCounter buffer_{};
    unsigned pos_ = 4;
};

}  // namespace thincount
