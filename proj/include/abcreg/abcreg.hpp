#pragma once

//! Convenience umbrella: pulls in the whole library.

#include "abcreg/adjustment.hpp"
#include "abcreg/errors.hpp"
#include "abcreg/kernels.hpp"
#include "abcreg/pipeline.hpp"
#include "abcreg/posterior.hpp"
#include "abcreg/regression.hpp"
#include "abcreg/rejection.hpp"
#include "abcreg/rng.hpp"
#include "abcreg/table_io.hpp"
#include "abcreg/text.hpp"
#include "abcreg/toy_models.hpp"
#include "abcreg/transforms.hpp"
#include "abcreg/types.hpp"
#include "abcreg/validation.hpp"
