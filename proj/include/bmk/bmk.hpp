#pragma once

#include "bmk/errors.hpp"
#include "bmk/jet.hpp"
#include "bmk/chart.hpp"
#include "bmk/algebra.hpp"
#include "bmk/forms.hpp"
#include "bmk/parallel.hpp"
#include "bmk/bessel.hpp"
#include "bmk/catalog.hpp"
#include "bmk/grid.hpp"
#include "bmk/verify.hpp"
#include "bmk/reeb.hpp"
#include "bmk/orbit.hpp"
#include "bmk/field_spec.hpp"
#include "bmk/report.hpp"
