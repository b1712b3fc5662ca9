#pragma once

#include "gaitmp/dataset.hpp"
#include "gaitmp/detector.hpp"
#include "gaitmp/errors.hpp"
#include "gaitmp/evaluation.hpp"
#include "gaitmp/matrix_profile.hpp"
#include "gaitmp/signal.hpp"
#include "gaitmp/step_detection.hpp"
#include "gaitmp/time_series.hpp"
