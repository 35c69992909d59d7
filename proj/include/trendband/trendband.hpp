#pragma once

#include "trendband/bands.hpp"
#include "trendband/bootstrap.hpp"
#include "trendband/csv.hpp"
#include "trendband/estimator.hpp"
#include "trendband/kernel.hpp"
#include "trendband/series.hpp"
#include "trendband/simulation.hpp"
#include "trendband/spectral.hpp"
#include "trendband/version.hpp"
