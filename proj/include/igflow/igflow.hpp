#pragma once

#include "igflow/connections.hpp"
#include "igflow/dual.hpp"
#include "igflow/errors.hpp"
#include "igflow/fd.hpp"
#include "igflow/flows.hpp"
#include "igflow/geodesic.hpp"
#include "igflow/models.hpp"
#include "igflow/potential.hpp"
#include "igflow/tensor3.hpp"
#include "igflow/trajectory.hpp"
#include "igflow/types.hpp"
