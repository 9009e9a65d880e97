#pragma once

#include "wgm/errors.hpp"
#include "wgm/params.hpp"
#include "wgm/fockspace.hpp"
#include "wgm/mode_response.hpp"
#include "wgm/umfpack_lu.hpp"
#include "wgm/th_solver.hpp"
#include "wgm/ae_solver.hpp"
#include "wgm/observables.hpp"
#include "wgm/dressed.hpp"
#include "wgm/config.hpp"
#include "wgm/scan.hpp"
#include "wgm/emit.hpp"
#include "wgm/acceptance.hpp"
