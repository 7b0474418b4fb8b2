#pragma once

#include "nmfem/baselines.hpp"
#include "nmfem/errors.hpp"
#include "nmfem/evaluation.hpp"
#include "nmfem/ingest.hpp"
#include "nmfem/io.hpp"
#include "nmfem/likelihood.hpp"
#include "nmfem/model.hpp"
#include "nmfem/nmf_em.hpp"
#include "nmfem/random.hpp"
#include "nmfem/selection.hpp"
#include "nmfem/simulate.hpp"
