#include "dnnreg/architecture.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dnnreg {

void Architecture::validate() const {
    if (blocks == 0 || width == 0 || input_dim == 0) {
        throw std::invalid_argument("architecture: blocks, width and input_dim must be positive");
    }
    if (depth < 2) {
        throw std::invalid_argument("architecture: depth must be at least 2");
    }
}

void InitBounds::validate() const {
    if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw std::invalid_argument("init bounds must be finite and nonnegative");
    }
}

std::size_t block_param_count(const Architecture& arch) {
    const std::size_t r = arch.width;
    const std::size_t d = arch.input_dim;
    const std::size_t L = arch.depth;
    return 1 + (r + 1) + (L - 2) * r * (r + 1) + r * (d + 1);
}

std::size_t param_count(const Architecture& arch) {
    arch.validate();
    return arch.blocks * block_param_count(arch);
}

std::size_t level_rows(const Architecture& arch, std::size_t level) {
    if (level > arch.depth) throw std::out_of_range("level exceeds depth");
    return level + 1 >= arch.depth ? 1 : arch.width;
}

std::size_t level_fan_in(const Architecture& arch, std::size_t level) {
    if (level > arch.depth) throw std::out_of_range("level exceeds depth");
    if (level == 0) return arch.input_dim;
    if (level == arch.depth) return 1;
    return arch.width;
}

namespace {

// Row stride of a level: fan-in plus bias, except the biasless output level.
std::size_t row_stride(const Architecture& arch, std::size_t level) {
    return level == arch.depth ? 1 : level_fan_in(arch, level) + 1;
}

}  // namespace

std::size_t level_offset(const Architecture& arch, std::size_t level) {
    if (level > arch.depth) throw std::out_of_range("level exceeds depth");
    std::size_t offset = 0;
    for (std::size_t l = 0; l < level; ++l) {
        offset += level_rows(arch, l) * row_stride(arch, l);
    }
    return offset;
}

std::size_t flat_index(const Architecture& arch, const StructuredIndex& idx) {
    if (idx.block >= arch.blocks || idx.level > arch.depth ||
        idx.neuron >= level_rows(arch, idx.level)) {
        throw std::out_of_range("structured weight index out of range");
    }
    std::size_t column = idx.input;
    if (idx.level == arch.depth) {
        if (idx.input != 1) throw std::out_of_range("output weight has input index 1");
        column = 0;
    } else if (idx.input > level_fan_in(arch, idx.level)) {
        throw std::out_of_range("structured weight input index out of range");
    }
    return idx.block * block_param_count(arch) + level_offset(arch, idx.level) +
           idx.neuron * row_stride(arch, idx.level) + column;
}

StructuredIndex locate(const Architecture& arch, std::size_t flat) {
    if (flat >= param_count(arch)) throw std::out_of_range("flat weight index out of range");
    const std::size_t per_block = block_param_count(arch);
    StructuredIndex idx;
    idx.block = flat / per_block;
    std::size_t rest = flat % per_block;
    for (std::size_t l = 0; l <= arch.depth; ++l) {
        const std::size_t stride = row_stride(arch, l);
        const std::size_t size = level_rows(arch, l) * stride;
        if (rest < size) {
            idx.level = l;
            idx.neuron = rest / stride;
            idx.input = l == arch.depth ? 1 : rest % stride;
            return idx;
        }
        rest -= size;
    }
    throw std::logic_error("weight layout is inconsistent");
}

std::string to_string(const Architecture& arch) {
    std::ostringstream os;
    os << "K=" << arch.blocks << " L=" << arch.depth << " r=" << arch.width << " d=" << arch.input_dim;
    return os.str();
}

}  // namespace dnnreg
