// Umbrella header.
#pragma once

#include "agtv/config.hpp"
#include "agtv/errors.hpp"
#include "agtv/fbp.hpp"
#include "agtv/fft.hpp"
#include "agtv/image.hpp"
#include "agtv/io.hpp"
#include "agtv/metrics.hpp"
#include "agtv/numeric.hpp"
#include "agtv/patch_graph.hpp"
#include "agtv/phantom.hpp"
#include "agtv/projector.hpp"
#include "agtv/solvers.hpp"
#include "agtv/sparse.hpp"
#include "agtv/wavelet.hpp"
