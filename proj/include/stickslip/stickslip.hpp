#pragma once

/// Umbrella header: event-driven simulation and periodic-orbit analysis of
/// planar Coulomb stick-slip dynamics driven by a periodically vibrating
/// contact surface.

#include "stickslip/vec2.hpp"
#include "stickslip/forcing.hpp"
#include "stickslip/friction.hpp"
#include "stickslip/integrator.hpp"
#include "stickslip/regularized.hpp"
#include "stickslip/periodic.hpp"
#include "stickslip/config.hpp"
#include "stickslip/io.hpp"
