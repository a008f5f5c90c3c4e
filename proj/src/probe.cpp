// SPDX-License-Identifier: Apache-2.0
#include "sparray/probe.hpp"

namespace sparray {

ProbeSpec make_paper_probe() {
  ProbeSpec p;
  p.n_elements = 64;
  p.pitch_m = 0.30e-3;
  p.fc_hz = 3.5e6;
  p.c_mps = 1540.0;
  p.fs_hz = 14.0e6;
  p.apodization.assign(static_cast<std::size_t>(p.n_elements), 1.0);
  return p;
}

PaperProfile make_paper_profile() {
  PaperProfile prof;
  prof.probe = make_paper_probe();
  prof.grid = GridSpec{400, 400, 128};
  prof.angles = AngleSet{7, 10.0};
  prof.k = 32;
  return prof;
}

DeskProfile make_desk_profile() {
  DeskProfile prof;
  prof.probe = make_paper_probe();
  prof.probe.n_elements = 32;
  prof.probe.apodization.assign(32, 1.0);
  prof.grid = GridSpec{64, 64, 64};
  prof.angles = AngleSet{3, 10.0};
  prof.k = 16;
  return prof;
}

}  // namespace sparray
