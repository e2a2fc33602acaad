#pragma once

#include "gazeconf/core.hpp"
#include "gazeconf/dataio.hpp"
#include "gazeconf/preprocess.hpp"
#include "gazeconf/augment.hpp"
#include "gazeconf/nn/params.hpp"
#include "gazeconf/nn/network.hpp"
#include "gazeconf/nn/adam.hpp"
#include "gazeconf/nn/gradcheck.hpp"
#include "gazeconf/nn/checkpoint.hpp"
#include "gazeconf/metrics.hpp"
#include "gazeconf/trainer.hpp"
#include "gazeconf/cv.hpp"
#include "gazeconf/config.hpp"
#include "gazeconf/report.hpp"
