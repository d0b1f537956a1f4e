#pragma once

#include "homodyne/analysis.hpp"
#include "homodyne/config.hpp"
#include "homodyne/csv.hpp"
#include "homodyne/detector.hpp"
#include "homodyne/errors.hpp"
#include "homodyne/esa.hpp"
#include "homodyne/gaussian.hpp"
#include "homodyne/pump_chain.hpp"
#include "homodyne/rng.hpp"
#include "homodyne/units.hpp"
#include "homodyne/version.hpp"
