#pragma once

#include "persuasion/bounds.hpp"
#include "persuasion/classic_lp.hpp"
#include "persuasion/error.hpp"
#include "persuasion/experiments.hpp"
#include "persuasion/io.hpp"
#include "persuasion/learning.hpp"
#include "persuasion/matrix.hpp"
#include "persuasion/model.hpp"
#include "persuasion/parallel.hpp"
#include "persuasion/random.hpp"
#include "persuasion/response.hpp"
#include "persuasion/robustify.hpp"
#include "persuasion/sampling.hpp"
#include "persuasion/simplex.hpp"
