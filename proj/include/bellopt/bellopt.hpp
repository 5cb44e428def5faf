#pragma once

#include "bellopt/closed_form.hpp"
#include "bellopt/correlators.hpp"
#include "bellopt/fock.hpp"
#include "bellopt/inequalities.hpp"
#include "bellopt/lhv.hpp"
#include "bellopt/observables.hpp"
#include "bellopt/parallel.hpp"
#include "bellopt/scan.hpp"
