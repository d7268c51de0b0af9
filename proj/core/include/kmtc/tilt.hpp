#pragma once

#include "kmtc/grid.hpp"

namespace kmtc {

// log E exp(z xi) for the tabulated law, evaluated in shifted log-space so
// large z stay finite; log_mgf(p, 0) == 0 exactly by construction.
double log_mgf(const GridDensity& p, double z);

// Conjugate (exponentially tilted) law: e^{h x} p(x) / E e^{h xi}. Throws
// RangeError with a required-radius hint when the tilted mass near the grid
// edges exceeds 1e-10 of the total.
GridDensity tilt(const GridDensity& p, double h);

// Mean of the tilted law (the numeric counterpart of d/dh log_mgf).
double tilted_mean(const GridDensity& p, double h);

}  // namespace kmtc
