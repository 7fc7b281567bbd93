#pragma once

#include "vulnrel/autologistic.hpp"
#include "vulnrel/diagnostics.hpp"
#include "vulnrel/errors.hpp"
#include "vulnrel/experiment.hpp"
#include "vulnrel/markov.hpp"
#include "vulnrel/registry.hpp"
#include "vulnrel/report.hpp"
#include "vulnrel/safetydb.hpp"
#include "vulnrel/simulate.hpp"
#include "vulnrel/vectorize.hpp"
#include "vulnrel/version.hpp"
