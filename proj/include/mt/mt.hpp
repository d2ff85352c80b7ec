#pragma once

// Umbrella header.

#include "mt/adapters.hpp"
#include "mt/codec.hpp"
#include "mt/conformance.hpp"
#include "mt/dataset.hpp"
#include "mt/geometry.hpp"
#include "mt/hash.hpp"
#include "mt/imaging.hpp"
#include "mt/landmarks.hpp"
#include "mt/makeup.hpp"
#include "mt/metrics.hpp"
#include "mt/mtcore.hpp"
#include "mt/raster.hpp"
