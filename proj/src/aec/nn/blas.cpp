#include "aec/nn/blas.hpp"

extern "C" void openblas_set_num_threads(int);

namespace aec::nn {

void blas_set_single_threaded() { openblas_set_num_threads(1); }

namespace {
struct BlasInit {
    BlasInit() { blas_set_single_threaded(); }
};
const BlasInit g_blas_init;
}  // namespace

}  // namespace aec::nn
