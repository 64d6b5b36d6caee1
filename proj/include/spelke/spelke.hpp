#pragma once

// Umbrella header for the spelke-probe engine.

#include "spelke/codebook.hpp"
#include "spelke/common.hpp"
#include "spelke/context.hpp"
#include "spelke/epigraphy.hpp"
#include "spelke/fields.hpp"
#include "spelke/file_model.hpp"
#include "spelke/flow.hpp"
#include "spelke/flow_color.hpp"
#include "spelke/grid.hpp"
#include "spelke/image_io.hpp"
#include "spelke/metrics.hpp"
#include "spelke/model.hpp"
#include "spelke/oracle.hpp"
#include "spelke/probing.hpp"
#include "spelke/rng.hpp"
#include "spelke/scene.hpp"
#include "spelke/scene_gen.hpp"
#include "spelke/scene_io.hpp"
#include "spelke/segmentation.hpp"
#include "spelke/tensor_io.hpp"
#include "spelke/vocab.hpp"
