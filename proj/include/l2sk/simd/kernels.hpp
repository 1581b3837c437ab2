#pragma once

#include <cstddef>
#include <vector>

namespace l2sk::simd {

// ---------------------------------------------------------------------------
// Data-parallel inner kernels for the circular-model (xi = 0, D = 0) flow
// under a held control, used by the MPC prediction/sensitivity path.
//
// Two kernels:
//   flow_batch   - N independent lanes, each with its own state and held
//                  control, advanced together (SoA layout). Powers the
//                  batched finite-difference sensitivity pass.
//   flow_tangent - one nominal state plus the tangent block M = [Phi | Psi]
//                  (d state / d initial state, d state / d control) advanced
//                  by the variational equations alongside the state. Powers
//                  the analytic sensitivity pass.
//
// Every variant of a kernel performs the same floating-point operations in
// the same order per lane, so scalar/AVX2/NEON results are bit-identical;
// the equivalence test asserts exact equality.
// ---------------------------------------------------------------------------

// Lane padding quantum. Batches are processed in groups of this many lanes
// regardless of the active variant, so results do not depend on dispatch.
inline constexpr std::size_t kLaneQuantum = 4;

inline std::size_t padded_lanes(std::size_t n) {
    return ((n + kLaneQuantum - 1) / kLaneQuantum) * kLaneQuantum;
}

// Tangent block: 6 rows x kTangentCols columns, row-major. Columns 0..5 are
// d q / d q0, columns 6..8 are d q / d u; columns 9..11 are padding.
inline constexpr int kTangentCols = 12;

/// q: six arrays (x y z vx vy vz), u: three arrays, each padded_lanes(n) long
/// with finite pad values. Advances `steps` classical RK4 steps of size h
/// in place with the per-lane control held.
using FlowBatchFn = void (*)(double* const q[6], const double* const u[3],
                             std::size_t n_padded, double mu, double h, int steps);

/// q: 6 doubles, m: 6*kTangentCols doubles row-major. Advances state and
/// tangent block together, control held at u (3 doubles).
using FlowTangentFn = void (*)(double* q, double* m, const double* u,
                               double mu, double h, int steps);

struct KernelSet {
    const char* name;
    FlowBatchFn flow_batch;
    FlowTangentFn flow_tangent;
};

/// Kernel set selected at runtime from cpu capabilities. The environment
/// variable L2SK_SIMD=scalar|avx2|neon forces a specific variant (falls back
/// to scalar if unavailable).
const KernelSet& active_kernels();

/// All variants usable on this machine (scalar first). For equivalence tests.
std::vector<KernelSet> available_kernels();

// Variant entry points (defined in their own translation units).
void flow_batch_scalar(double* const q[6], const double* const u[3],
                       std::size_t n_padded, double mu, double h, int steps);
void flow_tangent_scalar(double* q, double* m, const double* u,
                         double mu, double h, int steps);
#if defined(L2SK_BUILD_AVX2)
void flow_batch_avx2(double* const q[6], const double* const u[3],
                     std::size_t n_padded, double mu, double h, int steps);
void flow_tangent_avx2(double* q, double* m, const double* u,
                       double mu, double h, int steps);
#endif
#if defined(L2SK_BUILD_NEON)
void flow_batch_neon(double* const q[6], const double* const u[3],
                     std::size_t n_padded, double mu, double h, int steps);
void flow_tangent_neon(double* q, double* m, const double* u,
                       double mu, double h, int steps);
#endif

} // namespace l2sk::simd
