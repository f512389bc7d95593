#pragma once

#include "stabilitykit/error.hpp"
#include "stabilitykit/rng.hpp"
#include "stabilitykit/image.hpp"
#include "stabilitykit/csv.hpp"
#include "stabilitykit/media_io.hpp"
#include "stabilitykit/motion.hpp"
#include "stabilitykit/classic_metrics.hpp"
#include "stabilitykit/features.hpp"
#include "stabilitykit/eval.hpp"
#include "stabilitykit/model.hpp"
#include "stabilitykit/mos.hpp"
#include "stabilitykit/synth.hpp"
