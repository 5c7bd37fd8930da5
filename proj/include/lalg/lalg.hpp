#pragma once

// Everything except the scenario / report layer (which needs nlohmann_json).

#include "lalg/jet.hpp"
#include "lalg/linalg.hpp"
#include "lalg/field.hpp"
#include "lalg/sampling.hpp"
#include "lalg/polynomial.hpp"
#include "lalg/context.hpp"
#include "lalg/algebroid.hpp"
#include "lalg/forms.hpp"
#include "lalg/prolong.hpp"
#include "lalg/connect.hpp"
#include "lalg/towers.hpp"
