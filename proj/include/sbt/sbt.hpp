#pragma once

#include "sbt/calibration.hpp"
#include "sbt/cavity.hpp"
#include "sbt/config.hpp"
#include "sbt/constants.hpp"
#include "sbt/detection.hpp"
#include "sbt/dynamics.hpp"
#include "sbt/error.hpp"
#include "sbt/estimators.hpp"
#include "sbt/format.hpp"
#include "sbt/levmar.hpp"
#include "sbt/params.hpp"
#include "sbt/rng.hpp"
#include "sbt/serialize.hpp"
#include "sbt/sideband_fit.hpp"
#include "sbt/sideband_model.hpp"
#include "sbt/spectrum.hpp"
#include "sbt/sweep.hpp"
#include "sbt/synth.hpp"
#include "sbt/thermo.hpp"
