#include "dnnreg/architecture.hpp"

#include <gtest/gtest.h>

#include <set>
#include <stdexcept>

using namespace dnnreg;

TEST(Architecture, ParamCountExamples) {
    EXPECT_EQ(param_count({1, 4, 8, 1}), 170u);
    EXPECT_EQ(param_count({800, 4, 8, 1}), 136000u);
    EXPECT_EQ(param_count({1, 2, 1, 1}), 5u);
}

TEST(Architecture, ParamCountFormula) {
    for (std::size_t k : {1u, 3u}) {
        for (std::size_t l : {2u, 3u, 5u}) {
            for (std::size_t r : {1u, 4u}) {
                for (std::size_t d : {1u, 2u, 7u}) {
                    const std::size_t expect =
                        k * (1 + (r + 1) + (l - 2) * r * (r + 1) + r * (d + 1));
                    EXPECT_EQ(param_count({k, l, r, d}), expect);
                }
            }
        }
    }
}

TEST(Architecture, RejectsInvalidShapes) {
    EXPECT_THROW((Architecture{0, 4, 8, 1}.validate()), std::invalid_argument);
    EXPECT_THROW((Architecture{1, 1, 8, 1}.validate()), std::invalid_argument);
    EXPECT_THROW((Architecture{1, 4, 0, 1}.validate()), std::invalid_argument);
    EXPECT_THROW((Architecture{1, 4, 8, 0}.validate()), std::invalid_argument);
    EXPECT_THROW((InitBounds{-1.0, 0.0}.validate()), std::invalid_argument);
}

TEST(Architecture, FlatIndexIsBijection) {
    for (const Architecture arch : {Architecture{2, 3, 2, 2}, Architecture{3, 4, 3, 1},
                                    Architecture{1, 2, 1, 1}, Architecture{2, 5, 2, 3}}) {
        std::set<std::size_t> seen;
        for (std::size_t k = 0; k < arch.blocks; ++k) {
            for (std::size_t l = 0; l <= arch.depth; ++l) {
                const std::size_t rows = level_rows(arch, l);
                const std::size_t fan = level_fan_in(arch, l);
                for (std::size_t i = 0; i < rows; ++i) {
                    const std::size_t first = l == arch.depth ? 1 : 0;
                    for (std::size_t j = first; j <= fan; ++j) {
                        const StructuredIndex idx{k, l, i, j};
                        const std::size_t flat = flat_index(arch, idx);
                        EXPECT_TRUE(seen.insert(flat).second);
                        EXPECT_EQ(locate(arch, flat), idx);
                    }
                }
            }
        }
        EXPECT_EQ(seen.size(), param_count(arch));
        EXPECT_EQ(*seen.rbegin(), param_count(arch) - 1);
    }
}

TEST(Architecture, LayoutOrder) {
    const Architecture arch{2, 3, 2, 1};
    // level 0 of block 0 starts the vector, bias first
    EXPECT_EQ(flat_index(arch, {0, 0, 0, 0}), 0u);
    EXPECT_EQ(flat_index(arch, {0, 0, 0, 1}), 1u);
    EXPECT_EQ(flat_index(arch, {0, 0, 1, 0}), 2u);
    // output weight closes the block
    EXPECT_EQ(flat_index(arch, {0, 3, 0, 1}), block_param_count(arch) - 1);
    EXPECT_EQ(flat_index(arch, {1, 0, 0, 0}), block_param_count(arch));
}

TEST(Architecture, OutOfRangeIndex) {
    const Architecture arch{2, 3, 2, 1};
    EXPECT_THROW(flat_index(arch, {2, 0, 0, 0}), std::out_of_range);
    EXPECT_THROW(flat_index(arch, {0, 4, 0, 0}), std::out_of_range);
    EXPECT_THROW(flat_index(arch, {0, 0, 2, 0}), std::out_of_range);
    EXPECT_THROW(flat_index(arch, {0, 0, 0, 2}), std::out_of_range);
    EXPECT_THROW(flat_index(arch, {0, 3, 0, 0}), std::out_of_range);
    EXPECT_THROW(locate(arch, param_count(arch)), std::out_of_range);
}
