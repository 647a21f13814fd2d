#pragma once

#include "hound/coefficients.hpp"
#include "hound/compensated.hpp"
#include "hound/differentiator.hpp"
#include "hound/errors.hpp"
#include "hound/fit.hpp"
#include "hound/oracle.hpp"
#include "hound/oracle_checks.hpp"
#include "hound/signals.hpp"
#include "hound/state_io.hpp"
#include "hound/stream.hpp"
#include "hound/taylor.hpp"
#include "hound/variance.hpp"
