#pragma once

#include "mcpc/experiments.hpp"
#include "mcpc/features.hpp"
#include "mcpc/gradcheck.hpp"
#include "mcpc/image.hpp"
#include "mcpc/kernels.hpp"
#include "mcpc/model.hpp"
#include "mcpc/optim.hpp"
#include "mcpc/parallel.hpp"
#include "mcpc/render.hpp"
#include "mcpc/results.hpp"
#include "mcpc/rng.hpp"
#include "mcpc/serialize.hpp"
#include "mcpc/stats.hpp"
#include "mcpc/tape.hpp"
#include "mcpc/tensor.hpp"
#include "mcpc/testgen.hpp"
