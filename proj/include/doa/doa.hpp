#pragma once

#include "doa/control.hpp"
#include "doa/error.hpp"
#include "doa/fractional.hpp"
#include "doa/fuzzy.hpp"
#include "doa/patient.hpp"
#include "doa/simloop.hpp"
#include "doa/tuning.hpp"
#include "doa/woa.hpp"
