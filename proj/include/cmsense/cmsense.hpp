#pragma once

#include "cmsense/adam.hpp"
#include "cmsense/channels.hpp"
#include "cmsense/evaluation.hpp"
#include "cmsense/experiment.hpp"
#include "cmsense/io.hpp"
#include "cmsense/kernels.hpp"
#include "cmsense/lbcs.hpp"
#include "cmsense/mmd.hpp"
#include "cmsense/omp.hpp"
#include "cmsense/phase_matrix.hpp"
#include "cmsense/rng.hpp"
#include "cmsense/sampling.hpp"
#include "cmsense/train.hpp"
