#include "wavefdrc/fdrc_loss.hpp"

#include "wavefdrc/stencil.hpp"

namespace wavefdrc {

namespace {

void check_inputs(const WaveState& prev, const WaveState& pred, const SigmaField& sigma,
                  const DomainSpec& spec, const FieldGrid& mask) {
    if (pred.step != prev.step + 1)
        throw Error("residuals: prediction step " + std::to_string(pred.step) +
                    " does not follow previous step " + std::to_string(prev.step));
    const FieldGrid& ref = prev.p;
    if (ref.nx() != spec.nx || ref.ny() != spec.ny || !prev.consistent() || !pred.consistent() ||
        !pred.p.same_shape(ref) || !sigma.sigma.same_shape(ref) || !mask.same_shape(ref))
        throw Error("residuals: field shapes do not match the domain");
}

double mask_count(const FieldGrid& mask) {
    double n = 0.0;
    for (double m : mask.values()) n += m;
    return n;
}

}  // namespace

ResidualSet residuals(const WaveState& prev, const WaveState& pred, const SigmaField& sigma,
                      const DomainSpec& spec, const FieldGrid& mask) {
    check_inputs(prev, pred, sigma, spec, mask);

    const auto dpdx = DifferenceKernel::backward(Axis::x, spec.dx).apply(prev.p);
    const auto dpdy = DifferenceKernel::backward(Axis::y, spec.dy).apply(prev.p);
    const auto dudx = DifferenceKernel::forward(Axis::x, spec.dx).apply(pred.u);
    const auto dvdy = DifferenceKernel::forward(Axis::y, spec.dy).apply(pred.v);

    ResidualSet res{FieldGrid(spec.nx, spec.ny), FieldGrid(spec.nx, spec.ny),
                    FieldGrid(spec.nx, spec.ny), mask};
    const double inv_dt = 1.0 / spec.dt;
    const double inv_rho = 1.0 / spec.rho0;
    const double k = spec.rho0 * spec.c * spec.c;
    const auto sig = sigma.sigma.values();
    for (std::size_t n = 0; n < res.r_u.size(); ++n) {
        const double s = sig[n];
        const double uh = pred.u.values()[n];
        const double vh = pred.v.values()[n];
        const double ph = pred.p.values()[n];
        res.r_u.values()[n] = (uh - prev.u.values()[n]) * inv_dt + s * uh + dpdx.values()[n] * inv_rho;
        res.r_v.values()[n] = (vh - prev.v.values()[n]) * inv_dt + s * vh + dpdy.values()[n] * inv_rho;
        res.r_p.values()[n] = (ph - prev.p.values()[n]) * inv_dt + s * ph +
                              k * (dudx.values()[n] + dvdy.values()[n]);
    }
    return res;
}

FdrcLoss fdrc_loss(const ResidualSet& res) {
    const double count = mask_count(res.mask);
    if (!(count > 0.0)) throw Error("fdrc_loss: mask selects no cells");
    double su = 0.0, sv = 0.0, sp = 0.0;
    const auto m = res.mask.values();
    for (std::size_t n = 0; n < m.size(); ++n) {
        if (m[n] == 0.0) continue;
        const double ru = res.r_u.values()[n];
        const double rv = res.r_v.values()[n];
        const double rp = res.r_p.values()[n];
        su += m[n] * ru * ru;
        sv += m[n] * rv * rv;
        sp += m[n] * rp * rp;
    }
    FdrcLoss out;
    out.L_u = su / count;
    out.L_v = sv / count;
    out.L_p = sp / count;
    out.total = out.L_u + out.L_v + out.L_p;
    return out;
}

FieldGradient loss_grad_wrt_pred(const WaveState& prev, const WaveState& pred,
                                 const SigmaField& sigma, const DomainSpec& spec,
                                 const FieldGrid& mask) {
    const ResidualSet res = residuals(prev, pred, sigma, spec, mask);
    const double count = mask_count(mask);
    if (!(count > 0.0)) throw Error("loss_grad_wrt_pred: mask selects no cells");

    // dL/dr_q = 2 m r_q / M
    const double scale = 2.0 / count;
    FieldGrid wu(spec.nx, spec.ny), wv(spec.nx, spec.ny), wp(spec.nx, spec.ny);
    for (std::size_t n = 0; n < wu.size(); ++n) {
        const double m = mask.values()[n] * scale;
        wu.values()[n] = m * res.r_u.values()[n];
        wv.values()[n] = m * res.r_v.values()[n];
        wp.values()[n] = m * res.r_p.values()[n];
    }

    const double k = spec.rho0 * spec.c * spec.c;
    const auto du_from_p = DifferenceKernel::forward(Axis::x, spec.dx).apply_transpose(wp);
    const auto dv_from_p = DifferenceKernel::forward(Axis::y, spec.dy).apply_transpose(wp);

    FieldGradient g{FieldGrid(spec.nx, spec.ny), FieldGrid(spec.nx, spec.ny),
                    FieldGrid(spec.nx, spec.ny)};
    const double inv_dt = 1.0 / spec.dt;
    const auto sig = sigma.sigma.values();
    for (std::size_t n = 0; n < wu.size(); ++n) {
        const double diag = inv_dt + sig[n];
        g.u.values()[n] = diag * wu.values()[n] + k * du_from_p.values()[n];
        g.v.values()[n] = diag * wv.values()[n] + k * dv_from_p.values()[n];
        g.p.values()[n] = diag * wp.values()[n];
    }
    return g;
}

}  // namespace wavefdrc
