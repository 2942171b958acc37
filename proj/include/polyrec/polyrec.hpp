#pragma once

// Convenience umbrella for the whole library.

#include "polyrec/analysis.hpp"
#include "polyrec/determinacy.hpp"
#include "polyrec/families.hpp"
#include "polyrec/io.hpp"
#include "polyrec/recurrence.hpp"
#include "polyrec/spectral.hpp"
#include "polyrec/three_term.hpp"
