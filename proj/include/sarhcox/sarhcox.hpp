#pragma once

#include "bspline.hpp"
#include "cox.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "fft.hpp"
#include "field_io.hpp"
#include "hilbert.hpp"
#include "idw.hpp"
#include "model.hpp"
#include "optimize.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "sarh_model.hpp"
#include "sarh_sim.hpp"
#include "series.hpp"
#include "spectral.hpp"
#include "synthetic.hpp"
#include "trend.hpp"
#include "whittle.hpp"
