#pragma once

#include "grainfield/audio_buffer.hpp"
#include "grainfield/cues.hpp"
#include "grainfield/diffuse.hpp"
#include "grainfield/direction.hpp"
#include "grainfield/errors.hpp"
#include "grainfield/fft.hpp"
#include "grainfield/filter.hpp"
#include "grainfield/fir_bridge.hpp"
#include "grainfield/gammatone.hpp"
#include "grainfield/grain.hpp"
#include "grainfield/hrir.hpp"
#include "grainfield/hrir_model.hpp"
#include "grainfield/layout.hpp"
#include "grainfield/noise.hpp"
#include "grainfield/parallel.hpp"
#include "grainfield/presets.hpp"
#include "grainfield/random.hpp"
#include "grainfield/render.hpp"
#include "grainfield/stats.hpp"
#include "grainfield/wav.hpp"
