#pragma once

#include "dtdist/errors.hpp"
#include "dtdist/random.hpp"
#include "dtdist/point.hpp"
#include "dtdist/decision_tree.hpp"
#include "dtdist/dist_tree.hpp"
#include "dtdist/dense_pmf.hpp"
#include "dtdist/oracle.hpp"
#include "dtdist/influence.hpp"
#include "dtdist/builddt.hpp"
#include "dtdist/hypothesis.hpp"
#include "dtdist/learners.hpp"
#include "dtdist/lift.hpp"
#include "dtdist/testbed.hpp"
#include "dtdist/serialize.hpp"
