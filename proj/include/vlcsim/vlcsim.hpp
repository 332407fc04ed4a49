#pragma once

#include "vlcsim/channel.hpp"
#include "vlcsim/core.hpp"
#include "vlcsim/geometry.hpp"
#include "vlcsim/metrics.hpp"
#include "vlcsim/receivers.hpp"
#include "vlcsim/scenario.hpp"
#include "vlcsim/sources.hpp"
#include "vlcsim/steering.hpp"
