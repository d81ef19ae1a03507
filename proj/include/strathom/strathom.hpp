#pragma once

#include "strathom/constructions.hpp"
#include "strathom/dsl.hpp"
#include "strathom/error.hpp"
#include "strathom/experiments.hpp"
#include "strathom/gallery.hpp"
#include "strathom/grassmann.hpp"
#include "strathom/random.hpp"
#include "strathom/regularity.hpp"
#include "strathom/report.hpp"
#include "strathom/scene.hpp"
#include "strathom/strata.hpp"
