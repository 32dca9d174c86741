#pragma once

#include <glt/error.hpp>
#include <glt/expr.hpp>
#include <glt/trig_poly.hpp>
#include <glt/symbol.hpp>
#include <glt/linalg.hpp>
#include <glt/matgen.hpp>
#include <glt/parallel.hpp>
#include <glt/spectra.hpp>
#include <glt/acs.hpp>
#include <glt/normal_form.hpp>
