#pragma once

// Convenience umbrella: the whole library in one include.

#include "tieout/capstate.hpp"
#include "tieout/captable.hpp"
#include "tieout/date.hpp"
#include "tieout/domain.hpp"
#include "tieout/evalkit.hpp"
#include "tieout/io.hpp"
#include "tieout/rational.hpp"
#include "tieout/replay.hpp"
#include "tieout/rng.hpp"
#include "tieout/synth.hpp"
#include "tieout/verify.hpp"
