#pragma once

#include "egame/engine.hpp"
#include "egame/error.hpp"
#include "egame/graph.hpp"
#include "egame/io.hpp"
#include "egame/kappa.hpp"
#include "egame/matrix.hpp"
#include "egame/prop1.hpp"
#include "egame/service.hpp"
