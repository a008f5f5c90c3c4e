// SPDX-License-Identifier: Apache-2.0
#include "sparray/psf.hpp"

#include <complex>
#include <vector>

namespace sparray {

double PulseModel::pulse_sigma(double fc_hz, double frac_bandwidth) {
  if (!(fc_hz > 0.0) || !(frac_bandwidth > 0.0) || !(frac_bandwidth < 2.0))
    throw ContractViolation("pulse_sigma: need f_c > 0 and fractional bandwidth in (0, 2)");
  return std::sqrt(2.0 * std::log(2.0)) / (M_PI * frac_bandwidth * fc_hz);
}

namespace {

using cd = std::complex<double>;

// Geometry shared by forward and backward passes. All phases are kept in
// 64-bit regardless of the global precision mode; at mm path lengths and
// MHz carriers, float phase would wrap visibly.
struct SynthPlan {
  int ne = 0, na = 0, crop = 0;
  double sigma_t = 0, fc = 0;
  std::vector<cd> t;          // na x ne transmit phasors t_ae
  std::vector<double> pw;     // na x crop^2 plane-wave delays at pixels
  std::vector<double> sph;    // ne x crop^2 spherical delays at pixels
  std::vector<double> c_ae;   // na x ne constant tau_pw(a,r0) + tau_sph(e,r0)

  double env(double tau) const { return std::exp(-tau * tau / (2.0 * sigma_t * sigma_t)); }
  cd phasor(double tau) const {
    const double ph = -2.0 * M_PI * fc * tau;
    return env(tau) * cd(std::cos(ph), std::sin(ph));
  }
  cd recv(int a, int e, int r) const {
    const double delta = c_ae[static_cast<std::size_t>(a) * ne + e] -
                         (pw[static_cast<std::size_t>(a) * crop * crop + r] +
                          sph[static_cast<std::size_t>(e) * crop * crop + r]);
    return phasor(delta);
  }
};

SynthPlan build_plan(const ProbeSpec& probe, const GridSpec& grid, const AngleSet& angles,
                     const PulseModel& pulse) {
  SynthPlan plan;
  plan.ne = probe.n_elements;
  plan.na = angles.count;
  plan.crop = grid.crop;
  plan.sigma_t = pulse.sigma_t();
  plan.fc = pulse.fc_hz;
  if (grid.crop > grid.nx || grid.crop > grid.nz)
    throw ContractViolation("synth_psf: crop exceeds grid size");

  const double c = probe.c_mps;
  const double z0 = grid.center_depth_m(probe);
  const auto xe = probe.element_x();
  const auto th = angles.angles_rad();
  const int crop = grid.crop;
  const int x0 = grid.nx / 2 - crop / 2;
  const int z0i = grid.nz / 2 - crop / 2;

  // Transmit residuals, centered by the full-aperture mean so the centering
  // stays constant in w.
  plan.t.resize(static_cast<std::size_t>(plan.na) * plan.ne);
  plan.c_ae.resize(static_cast<std::size_t>(plan.na) * plan.ne);
  for (int a = 0; a < plan.na; ++a) {
    const double tau_pw0 = z0 * std::cos(th[static_cast<std::size_t>(a)]) / c;
    std::vector<double> eps(static_cast<std::size_t>(plan.ne));
    double mean_eps = 0.0;
    for (int e = 0; e < plan.ne; ++e) {
      const double x = xe[static_cast<std::size_t>(e)];
      const double d_e = x * std::sin(th[static_cast<std::size_t>(a)]) / c;
      const double tau_sph0 = std::hypot(x, z0) / c;
      eps[static_cast<std::size_t>(e)] = d_e + tau_sph0 - tau_pw0;
      mean_eps += eps[static_cast<std::size_t>(e)];
      plan.c_ae[static_cast<std::size_t>(a) * plan.ne + e] = tau_pw0 + tau_sph0;
    }
    mean_eps /= plan.ne;
    for (int e = 0; e < plan.ne; ++e)
      plan.t[static_cast<std::size_t>(a) * plan.ne + e] =
          plan.phasor(eps[static_cast<std::size_t>(e)] - mean_eps);
  }

  // Per-pixel delays over the crop window only; everything outside it is
  // discarded by the crop anyway.
  plan.pw.resize(static_cast<std::size_t>(plan.na) * crop * crop);
  plan.sph.resize(static_cast<std::size_t>(plan.ne) * crop * crop);
  for (int iz = 0; iz < crop; ++iz)
    for (int ix = 0; ix < crop; ++ix) {
      const int r = iz * crop + ix;
      const double x = grid.pixel_x(x0 + ix, probe);
      const double z = grid.pixel_z(z0i + iz, probe);
      for (int a = 0; a < plan.na; ++a)
        plan.pw[static_cast<std::size_t>(a) * crop * crop + r] =
            (x * std::sin(th[static_cast<std::size_t>(a)]) +
             z * std::cos(th[static_cast<std::size_t>(a)])) / c;
      for (int e = 0; e < plan.ne; ++e)
        plan.sph[static_cast<std::size_t>(e) * crop * crop + r] =
            std::hypot(x - xe[static_cast<std::size_t>(e)], z) / c;
    }
  return plan;
}

}  // namespace

CTensor synth_psf_raw(const Tensor& w, const ProbeSpec& probe, const GridSpec& grid,
                      const AngleSet& angles, const PulseModel& pulse) {
  if (w.size() != probe.n_elements)
    throw ContractViolation("synth_psf: weight vector length must equal N_e");
  auto plan = std::make_shared<SynthPlan>(build_plan(probe, grid, angles, pulse));
  const int ne = plan->ne, na = plan->na, crop = plan->crop;
  const int npix = crop * crop;

  std::vector<double> out_re(static_cast<std::size_t>(npix), 0.0);
  std::vector<double> out_im(static_cast<std::size_t>(npix), 0.0);
  std::vector<cd> ta(static_cast<std::size_t>(na));
  for (int a = 0; a < na; ++a) {
    cd s = 0.0;
    for (int e = 0; e < ne; ++e) s += w[e] * plan->t[static_cast<std::size_t>(a) * ne + e];
    ta[static_cast<std::size_t>(a)] = s;
  }
  for (int a = 0; a < na; ++a) {
    for (int e = 0; e < ne; ++e) {
      const double we = w[e];
      if (we == 0.0) continue;
      const cd scale = ta[static_cast<std::size_t>(a)] * we;
      for (int r = 0; r < npix; ++r) {
        const cd v = scale * plan->recv(a, e, r);
        out_re[static_cast<std::size_t>(r)] += v.real();
        out_im[static_cast<std::size_t>(r)] += v.imag();
      }
    }
  }

  const bool rg = w.requires_grad();
  CTensor y(Tensor({crop, crop}, std::move(out_re), rg),
            Tensor({crop, crop}, std::move(out_im), rg));
  if (rg && Tape::active()) {
    Tensor wc = w;
    CTensor yc = y;
    Tape::active()->record([wc, yc, plan, ne, na, npix]() mutable {
      if (!yc.re.has_grad() && !yc.im.has_grad()) return;
      const auto& gre = yc.re.grad_or_zeros();
      const auto& gim = yc.im.grad_or_zeros();
      auto& gw = wc.grad();

      // Recompute transmit factors and receive fields; caching them across
      // the step would cost O(N_a * N_e * crop^2) memory.
      std::vector<cd> ta(static_cast<std::size_t>(na));
      for (int a = 0; a < na; ++a) {
        cd s = 0.0;
        for (int e = 0; e < ne; ++e) s += wc[e] * plan->t[static_cast<std::size_t>(a) * ne + e];
        ta[static_cast<std::size_t>(a)] = s;
      }
      for (int a = 0; a < na; ++a) {
        // R_a over the crop plus the two pullback contractions:
        //   S_a       = sum_r R_a(r) conj(g(r))         (transmit path)
        //   G_ae      = sum_r recv(a,e,r) conj(g(r))    (receive path)
        std::vector<cd> recv_sum(static_cast<std::size_t>(ne), 0.0);
        std::vector<cd> ra(static_cast<std::size_t>(npix), 0.0);
        for (int e = 0; e < ne; ++e) {
          cd gsum = 0.0;
          for (int r = 0; r < npix; ++r) {
            const cd ph = plan->recv(a, e, r);
            ra[static_cast<std::size_t>(r)] += wc[e] * ph;
            gsum += ph * cd(gre[static_cast<std::size_t>(r)], -gim[static_cast<std::size_t>(r)]);
          }
          recv_sum[static_cast<std::size_t>(e)] = gsum;
        }
        cd sa = 0.0;
        for (int r = 0; r < npix; ++r)
          sa += ra[static_cast<std::size_t>(r)] *
                cd(gre[static_cast<std::size_t>(r)], -gim[static_cast<std::size_t>(r)]);
        for (int e = 0; e < ne; ++e) {
          const cd d = plan->t[static_cast<std::size_t>(a) * ne + e] * sa +
                       ta[static_cast<std::size_t>(a)] * recv_sum[static_cast<std::size_t>(e)];
          gw[static_cast<std::size_t>(e)] += d.real();
        }
      }
    });
  }
  return y;
}

PSFKernel synth_psf(const Tensor& w, const ProbeSpec& probe, const GridSpec& grid,
                    const AngleSet& angles, const PulseModel& pulse) {
  CTensor raw = synth_psf_raw(w, probe, grid, angles, pulse);
  Tensor energy = csumsq(raw);
  if (energy.item() <= 0.0) throw DegenerateApertureError();
  Tensor inv_norm = 1.0 / sqrt(energy);
  PSFKernel kernel;
  kernel.values = cscale(raw, inv_norm);
  kernel.crop = grid.crop;
  kernel.pixel_pitch_m = grid.pixel_pitch_m(probe);
  kernel.z0_m = grid.center_depth_m(probe);
  return kernel;
}

PSFKernel reference_psf(const ProbeSpec& probe, const GridSpec& grid, const AngleSet& angles,
                        const PulseModel& pulse) {
  std::vector<double> apod = probe.apodization;
  if (apod.empty()) apod.assign(static_cast<std::size_t>(probe.n_elements), 1.0);
  Tensor w({probe.n_elements}, apod, false);
  return synth_psf(w, probe, grid, angles, pulse);
}

}  // namespace sparray
