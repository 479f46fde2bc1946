#pragma once

#include "cls/alignment.hpp"
#include "cls/density_estimation.hpp"
#include "cls/embedding.hpp"
#include "cls/errors.hpp"
#include "cls/experiments.hpp"
#include "cls/geometry.hpp"
#include "cls/likelihood.hpp"
#include "cls/link_model.hpp"
#include "cls/random.hpp"
#include "cls/serialization.hpp"
#include "cls/theory_bounds.hpp"
#include "cls/version.hpp"
