#include "thincount/rng.hpp"

namespace thincount {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
    std::uint64_t const product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

RngSpec substream(RngSpec base, std::uint64_t index, std::uint32_t purpose) noexcept
{
    std::uint64_t h = splitmix64(base.stream);
    h = splitmix64(h ^ index);
    h = splitmix64(h ^ purpose);
    return {base.seed, h};
}

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept
{
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

CounterRng::CounterRng(RngSpec spec) noexcept
    : spec_(spec),
      key_{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32)}
{
}

void CounterRng::refill() noexcept
{
    PhiloxCounter const counter{static_cast<std::uint32_t>(block_),
                                static_cast<std::uint32_t>(block_ >> 32),
                                static_cast<std::uint32_t>(spec_.stream),
                                static_cast<std::uint32_t>(spec_.stream >> 32)};
    buffer_ = philox4x32_10(counter, key_);
    ++block_;
    pos_ = 0;
}

std::uint32_t CounterRng::next_u32() noexcept
{
    if (pos_ == 4) refill();
    return buffer_[pos_++];
}

std::uint64_t CounterRng::next_u64() noexcept
{
    std::uint64_t const lo = next_u32();
    std::uint64_t const hi = next_u32();
    return (hi << 32) | lo;
}

double CounterRng::uniform() noexcept
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

}  // namespace thincount
