#include "dmapx/rng.hpp"

#include <algorithm>
#include <numeric>

namespace dmapx::rng {

std::vector<std::size_t> sample_indices(std::size_t total, std::size_t n, std::uint64_t seed) {
    if (n >= total) {
        std::vector<std::size_t> all(total);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }
    std::vector<std::size_t> pool(total);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    CounterRng gen(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(gen.uniform_below(total - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace dmapx::rng
