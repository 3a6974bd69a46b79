#pragma once

#include "gpva/bvn.hpp"
#include "gpva/common.hpp"
#include "gpva/corrkit.hpp"
#include "gpva/dataio.hpp"
#include "gpva/polychoric.hpp"
#include "gpva/pva.hpp"
#include "gpva/simgen.hpp"
