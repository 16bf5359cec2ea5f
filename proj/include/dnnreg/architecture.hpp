#pragma once

#include <cstddef>
#include <string>

namespace dnnreg {

/// Shape of the parallel-block network: `blocks` independent fully connected
/// sub-networks of depth `depth`, each with `width` neurons on levels
/// 1..depth-1 and a single neuron on level `depth`, combined linearly by one
/// output weight per block.
struct Architecture {
    std::size_t blocks = 1;     // K
    std::size_t depth = 2;      // L, at least 2
    std::size_t width = 1;      // r
    std::size_t input_dim = 1;  // d

    /// Throws std::invalid_argument unless all fields are positive and depth >= 2.
    void validate() const;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Bounds of the uniform initialization: input-level weights on [-a, a],
/// all weights on levels 1..L-1 on [-b, b].
struct InitBounds {
    double a = 0.0;
    double b = 0.0;

    void validate() const;

    friend bool operator==(const InitBounds&, const InitBounds&) = default;
};

/// Weight w^{(level)}_{block, neuron, input}.
///
/// Levels run 0..depth. For levels below `depth`, `neuron` is 0-based and
/// `input` 0 is the bias, 1..fan_in the incoming connections. The output
/// level holds one weight per block, addressed as (block, depth, 0, 1).
struct StructuredIndex {
    std::size_t block = 0;
    std::size_t level = 0;
    std::size_t neuron = 0;
    std::size_t input = 0;

    friend bool operator==(const StructuredIndex&, const StructuredIndex&) = default;
};

std::size_t param_count(const Architecture& arch);

/// Number of weights inside one block (param_count / blocks).
std::size_t block_param_count(const Architecture& arch);

/// Neurons computed by `level` (level L-1 and the output level have one).
std::size_t level_rows(const Architecture& arch, std::size_t level);

/// Incoming connections per neuron at `level`, bias excluded.
std::size_t level_fan_in(const Architecture& arch, std::size_t level);

/// Offset of the first weight of `level` relative to the start of its block.
std::size_t level_offset(const Architecture& arch, std::size_t level);

/// Flat position of a structured weight. Blocks are stored one after another,
/// levels in increasing order within a block, and each level row-major over
/// (neuron, input) with the bias first. Throws std::out_of_range on invalid
/// indices.
std::size_t flat_index(const Architecture& arch, const StructuredIndex& idx);

/// Inverse of flat_index.
StructuredIndex locate(const Architecture& arch, std::size_t flat);

std::string to_string(const Architecture& arch);

}  // namespace dnnreg
