#pragma once

// Umbrella header for the ssg library.

#include "ssg/core.hpp"
#include "ssg/expr.hpp"
#include "ssg/finite_diff.hpp"
#include "ssg/geometry.hpp"
#include "ssg/identity_lab.hpp"
#include "ssg/jets.hpp"
#include "ssg/lagrangian.hpp"
#include "ssg/linalg.hpp"
#include "ssg/pseudo_euclid.hpp"
#include "ssg/rational.hpp"
#include "ssg/rescaling.hpp"
#include "ssg/rotsym.hpp"
#include "ssg/sampling.hpp"
