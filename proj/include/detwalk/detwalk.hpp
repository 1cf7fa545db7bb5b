#pragma once

#include "detwalk/analysis.hpp"
#include "detwalk/audit.hpp"
#include "detwalk/chain.hpp"
#include "detwalk/error.hpp"
#include "detwalk/instances.hpp"
#include "detwalk/io.hpp"
#include "detwalk/rational.hpp"
#include "detwalk/router.hpp"
#include "detwalk/simulator.hpp"
#include "detwalk/verify.hpp"
