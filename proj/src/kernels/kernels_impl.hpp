#pragma once

#include "dnnreg/kernels.hpp"

namespace dnnreg::kernels::detail {

extern const LayerKernels kScalarTable;

#if defined(DNNREG_HAVE_AVX2)
extern const LayerKernels kAvx2Table;
#endif

}  // namespace dnnreg::kernels::detail
