#pragma once

#include "texassoc/app.hpp"
#include "texassoc/association.hpp"
#include "texassoc/backend.hpp"
#include "texassoc/corpus.hpp"
#include "texassoc/error.hpp"
#include "texassoc/image.hpp"
#include "texassoc/labels.hpp"
#include "texassoc/onnx_model_info.hpp"
#include "texassoc/prediction_log.hpp"
#include "texassoc/preprocess.hpp"
#include "texassoc/report.hpp"
#include "texassoc/taxonomy.hpp"
