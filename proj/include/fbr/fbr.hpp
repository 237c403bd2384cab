#pragma once

#include "fbr/gridworld.hpp"
#include "fbr/perception.hpp"
#include "fbr/frontier.hpp"
#include "fbr/decay.hpp"
#include "fbr/team.hpp"
#include "fbr/simulator.hpp"
#include "fbr/mapgen.hpp"
#include "fbr/harness.hpp"
