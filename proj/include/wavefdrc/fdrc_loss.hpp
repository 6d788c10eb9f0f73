#pragma once
/**
 * @file fdrc_loss.hpp
 * @brief Finite-difference residual constraint: pointwise residuals of the
 *        discrete PML wave equations evaluated on a predicted next state, the
 *        mean-square loss, and its exact gradient with respect to the
 *        prediction.
 *
 * Given the previous state (u, v, p) and a prediction (u^, v^, p^):
 *   r_u = (u^ - u)/dt + sigma u^ + (p(i) - p(i-1)) / (rho0 dx)
 *   r_v = (v^ - v)/dt + sigma v^ + (p(j) - p(j-1)) / (rho0 dy)
 *   r_p = (p^ - p)/dt + sigma p^ + rho0 c^2 ((u^(i+1) - u^(i))/dx + (v^(j+1) - v^(j))/dy)
 * The velocity residuals use the previous pressure; the pressure residual
 * uses the predicted velocities. All three vanish exactly at fdm_step(prev).
 */

#include "wavefdrc/grid.hpp"

namespace wavefdrc {

struct ResidualSet {
    FieldGrid r_u;
    FieldGrid r_v;
    FieldGrid r_p;
    FieldGrid mask;  // 1 where the cell participates in the loss
};

struct FdrcLoss {
    double total = 0.0;
    double L_u = 0.0;
    double L_v = 0.0;
    double L_p = 0.0;
};

struct FieldGradient {
    FieldGrid u;
    FieldGrid v;
    FieldGrid p;
};

/// Throws if pred.step != prev.step + 1 or shapes disagree.
ResidualSet residuals(const WaveState& prev, const WaveState& pred, const SigmaField& sigma,
                      const DomainSpec& spec, const FieldGrid& mask);

/// Mean of squared residuals over mask=1 cells per term; total is their sum.
FdrcLoss fdrc_loss(const ResidualSet& res);

/// Gradient of fdrc_loss(residuals(prev, pred, ...)).total with respect to pred's fields.
FieldGradient loss_grad_wrt_pred(const WaveState& prev, const WaveState& pred,
                                 const SigmaField& sigma, const DomainSpec& spec,
                                 const FieldGrid& mask);

}  // namespace wavefdrc
