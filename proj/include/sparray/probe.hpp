// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

namespace sparray {

/// Probe geometry and acoustic constants. Derived quantities (wavelength,
/// element positions) are always recomputed from primitives.
struct ProbeSpec {
  int n_elements = 64;
  double pitch_m = 0.30e-3;   // element spacing; not stated by the probe preset docs, configurable
  double fc_hz = 3.5e6;
  double c_mps = 1540.0;
  double fs_hz = 14.0e6;
  std::vector<double> apodization;  // length n_elements, defaults to all-ones

  double wavelength_m() const { return c_mps / fc_hz; }

  /// Element x positions, centered: x[i] = (i - (N_e-1)/2) * pitch.
  std::vector<double> element_x() const {
    std::vector<double> x(static_cast<std::size_t>(n_elements));
    for (int i = 0; i < n_elements; ++i)
      x[static_cast<std::size_t>(i)] = (i - (n_elements - 1) / 2.0) * pitch_m;
    return x;
  }

  /// Element z positions (all zero for a linear probe).
  std::vector<double> element_z() const {
    return std::vector<double>(static_cast<std::size_t>(n_elements), 0.0);
  }
};

/// Imaging grid. x spans [-p*nx/2, p*nx/2], z spans [0, p*nz].
struct GridSpec {
  int nx = 400;
  int nz = 400;
  int crop = 128;  // square kernel crop, <= min(nx, nz)

  double pixel_pitch_m(const ProbeSpec& probe) const {
    return (probe.c_mps / probe.fs_hz) / 4.0;
  }
  double pixel_x(int ix, const ProbeSpec& probe) const {
    return (ix - nx / 2) * pixel_pitch_m(probe);
  }
  double pixel_z(int iz, const ProbeSpec& probe) const {
    return iz * pixel_pitch_m(probe);
  }
  /// Depth of the centered scatterer: grid center, p * nz / 2.
  double center_depth_m(const ProbeSpec& probe) const {
    return pixel_pitch_m(probe) * nz / 2.0;
  }
};

/// Plane-wave steering angles, uniformly spaced over [-span, span].
struct AngleSet {
  int count = 7;
  double span_deg = 10.0;

  std::vector<double> angles_rad() const {
    std::vector<double> a(static_cast<std::size_t>(count));
    if (count == 1) {
      a[0] = 0.0;
      return a;
    }
    const double lo = -span_deg * M_PI / 180.0;
    const double hi = span_deg * M_PI / 180.0;
    for (int i = 0; i < count; ++i)
      a[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    return a;
  }
};

/// Paper-scale probe: 64 elements, 3.5 MHz, 1540 m/s, 14 MHz sampling.
ProbeSpec make_paper_probe();

/// Desk-scale profile: 32 elements (k = 16 of them active in training),
/// 64x64 grid with full-size crop, 3 angles, same acoustic constants.
struct DeskProfile {
  ProbeSpec probe;
  GridSpec grid;
  AngleSet angles;
  int k = 16;
};
DeskProfile make_desk_profile();

struct PaperProfile {
  ProbeSpec probe;
  GridSpec grid;
  AngleSet angles;
  int k = 32;
};
PaperProfile make_paper_profile();

}  // namespace sparray
