#pragma once

// Umbrella header for the core library. config_json.hpp is excluded on
// purpose: it pulls in the vendored JSON parser, which most consumers
// do not need.

#include "hdlpboot/diagnostics.hpp"
#include "hdlpboot/distributions.hpp"
#include "hdlpboot/eigen.hpp"
#include "hdlpboot/errors.hpp"
#include "hdlpboot/estimators.hpp"
#include "hdlpboot/hdtest.hpp"
#include "hdlpboot/io.hpp"
#include "hdlpboot/lp_norm.hpp"
#include "hdlpboot/matrix.hpp"
#include "hdlpboot/op_norm.hpp"
#include "hdlpboot/rng.hpp"
#include "hdlpboot/simharness.hpp"
#include "hdlpboot/version.hpp"
