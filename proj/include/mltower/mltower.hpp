#pragma once

#include "mltower/baer.hpp"
#include "mltower/direct_system.hpp"
#include "mltower/fp_module.hpp"
#include "mltower/hom.hpp"
#include "mltower/json_io.hpp"
#include "mltower/matrix.hpp"
#include "mltower/purity.hpp"
#include "mltower/ring.hpp"
#include "mltower/snf.hpp"
#include "mltower/tower.hpp"
#include "mltower/version.hpp"
