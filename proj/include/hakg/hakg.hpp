#pragma once

#include "hakg/autodiff.hpp"
#include "hakg/checkpoint.hpp"
#include "hakg/commands.hpp"
#include "hakg/config.hpp"
#include "hakg/data.hpp"
#include "hakg/error.hpp"
#include "hakg/evaluation.hpp"
#include "hakg/geometry.hpp"
#include "hakg/model.hpp"
#include "hakg/synthetic.hpp"
#include "hakg/training.hpp"
