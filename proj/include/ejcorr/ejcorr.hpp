#pragma once

#include "ejcorr/correction.hpp"
#include "ejcorr/dataio.hpp"
#include "ejcorr/ejgan.hpp"
#include "ejcorr/errors.hpp"
#include "ejcorr/estimators.hpp"
#include "ejcorr/experiment.hpp"
#include "ejcorr/judgment.hpp"
#include "ejcorr/learners.hpp"
#include "ejcorr/matrix.hpp"
#include "ejcorr/metrics.hpp"
#include "ejcorr/neural.hpp"
#include "ejcorr/scaling.hpp"
#include "ejcorr/synthdata.hpp"
