#pragma once

#include "fharm/admissibility.hpp"
#include "fharm/core.hpp"
#include "fharm/functionals.hpp"
#include "fharm/manifold.hpp"
#include "fharm/profile.hpp"
#include "fharm/report.hpp"
#include "fharm/scenario.hpp"
#include "fharm/smooth_map.hpp"
#include "fharm/sphere_target.hpp"
#include "fharm/variation.hpp"
