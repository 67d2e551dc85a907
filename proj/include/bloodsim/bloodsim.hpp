// bloodsim.hpp - umbrella header.

#pragma once

#include "units.hpp"
#include "params.hpp"
#include "rng.hpp"
#include "device.hpp"
#include "occupancy.hpp"
#include "transduction.hpp"
#include "detection.hpp"
#include "engine.hpp"
#include "sweep.hpp"
#include "calibration.hpp"
#include "table.hpp"
#include "manifest.hpp"
