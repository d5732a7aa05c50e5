#pragma once

#include "turnback/corpus.hpp"
#include "turnback/corpus_io.hpp"
#include "turnback/default_templates.hpp"
#include "turnback/errors.hpp"
#include "turnback/eval.hpp"
#include "turnback/manifest.hpp"
#include "turnback/mixer.hpp"
#include "turnback/multiwoz.hpp"
#include "turnback/random.hpp"
#include "turnback/scenarios.hpp"
#include "turnback/templates.hpp"
#include "turnback/validate.hpp"
