#pragma once

#include "usid/address.hpp"
#include "usid/analysis.hpp"
#include "usid/behaviors.hpp"
#include "usid/controller.hpp"
#include "usid/error.hpp"
#include "usid/fib.hpp"
#include "usid/packet.hpp"
#include "usid/scheme.hpp"
#include "usid/simnet.hpp"
#include "usid/topology.hpp"
