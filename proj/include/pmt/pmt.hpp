#pragma once

#include "pmt/axioms.hpp"
#include "pmt/error.hpp"
#include "pmt/fixtures.hpp"
#include "pmt/io.hpp"
#include "pmt/oracle.hpp"
#include "pmt/phi.hpp"
#include "pmt/series.hpp"
#include "pmt/solvers.hpp"
#include "pmt/spaces.hpp"
#include "pmt/trace.hpp"
#include "pmt/transforms.hpp"
#include "pmt/version.hpp"
