#pragma once

#include "medtweet/backends.hpp"
#include "medtweet/data_io.hpp"
#include "medtweet/errors.hpp"
#include "medtweet/linker.hpp"
#include "medtweet/manifest.hpp"
#include "medtweet/metrics.hpp"
#include "medtweet/model.hpp"
#include "medtweet/nli.hpp"
#include "medtweet/preprocess.hpp"
#include "medtweet/sampling.hpp"
#include "medtweet/version.hpp"
