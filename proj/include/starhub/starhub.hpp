#pragma once

#include "starhub/error.hpp"
#include "starhub/exact.hpp"
#include "starhub/harness.hpp"
#include "starhub/hub_classing.hpp"
#include "starhub/instance.hpp"
#include "starhub/instance_io.hpp"
#include "starhub/lp.hpp"
#include "starhub/matrix.hpp"
#include "starhub/random.hpp"
#include "starhub/rounding.hpp"
#include "starhub/simplex.hpp"
#include "starhub/transport.hpp"
