#include "dnnreg/random.hpp"

#include <vector>

namespace dnnreg {

Rng substream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::vector<std::uint32_t> words;
    words.reserve(2 * (path.size() + 1));
    auto push = [&words](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(master);
    for (std::uint64_t label : path) push(label);
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

}  // namespace dnnreg
