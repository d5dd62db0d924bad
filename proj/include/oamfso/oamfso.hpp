#pragma once

#include "oamfso/common.hpp"
#include "oamfso/rng.hpp"
#include "oamfso/fft.hpp"
#include "oamfso/grid.hpp"
#include "oamfso/lg.hpp"
#include "oamfso/turbulence.hpp"
#include "oamfso/propagation.hpp"
#include "oamfso/field_io.hpp"
#include "oamfso/channel_io.hpp"
#include "oamfso/ofdm_im.hpp"
#include "oamfso/link_sim.hpp"
#include "oamfso/parallel.hpp"
