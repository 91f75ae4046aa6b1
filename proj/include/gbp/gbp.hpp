#pragma once

// Umbrella header.

#include "gbp/adm.hpp"
#include "gbp/ar_sampler.hpp"
#include "gbp/csv.hpp"
#include "gbp/errors.hpp"
#include "gbp/fit.hpp"
#include "gbp/likelihood.hpp"
#include "gbp/method_check.hpp"
#include "gbp/model.hpp"
#include "gbp/report.hpp"
#include "gbp/svg.hpp"
