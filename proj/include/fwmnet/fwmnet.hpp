#pragma once

#include "fwmnet/cluster.hpp"
#include "fwmnet/eigenmodes.hpp"
#include "fwmnet/errors.hpp"
#include "fwmnet/io.hpp"
#include "fwmnet/linalg.hpp"
#include "fwmnet/optimizer.hpp"
#include "fwmnet/report.hpp"
#include "fwmnet/rng.hpp"
#include "fwmnet/symplectic.hpp"
#include "fwmnet/synthesis.hpp"
