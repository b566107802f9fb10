#pragma once

#include "grds/audits.hpp"
#include "grds/dynamics.hpp"
#include "grds/ensembles.hpp"
#include "grds/grassmann.hpp"
#include "grds/linalg.hpp"
#include "grds/lyapunov.hpp"
#include "grds/parallel.hpp"
#include "grds/partition.hpp"
#include "grds/perturbation.hpp"
#include "grds/rng.hpp"
#include "grds/serialize.hpp"
#include "grds/verification.hpp"
