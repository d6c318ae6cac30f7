#pragma once

#include "slfforge/accel.hpp"
#include "slfforge/common.hpp"
#include "slfforge/corpus.hpp"
#include "slfforge/dynamics.hpp"
#include "slfforge/generator.hpp"
#include "slfforge/jump.hpp"
#include "slfforge/problem.hpp"
#include "slfforge/serialize.hpp"
#include "slfforge/slf.hpp"
#include "slfforge/stability.hpp"
#include "slfforge/state.hpp"
