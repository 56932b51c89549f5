#pragma once

#include <cstdint>
#include <initializer_list>

namespace tlamm {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent child seed for a unit of work identified by `path`
/// (e.g. {cell id, rep}). Stable across platforms and thread counts.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept
{
    std::uint64_t s = mix64(master);
    for (auto id : path) {
        s = mix64(s ^ mix64(id + 0x632be59bd9b4e019ULL));
    }
    return s;
}

} // namespace tlamm
