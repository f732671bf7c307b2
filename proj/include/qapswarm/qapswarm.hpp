#pragma once

#include "assignment.hpp"
#include "engine.hpp"
#include "kernels.hpp"
#include "matrix.hpp"
#include "migration.hpp"
#include "qaplib_io.hpp"
#include "random.hpp"
#include "stats.hpp"
#include "worker_pool.hpp"
