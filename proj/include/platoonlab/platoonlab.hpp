#ifndef PLATOONLAB_PLATOONLAB_HPP
#define PLATOONLAB_PLATOONLAB_HPP

#include "platoonlab/cubic.hpp"
#include "platoonlab/harness.hpp"
#include "platoonlab/laplacian.hpp"
#include "platoonlab/optimize.hpp"
#include "platoonlab/params.hpp"
#include "platoonlab/simulate.hpp"
#include "platoonlab/spectral.hpp"
#include "platoonlab/system.hpp"
#include "platoonlab/trace_io.hpp"
#include "platoonlab/transient.hpp"
#include "platoonlab/version.hpp"

#endif
