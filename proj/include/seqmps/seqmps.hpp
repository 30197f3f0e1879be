#pragma once

#include "closed_form.hpp"
#include "error.hpp"
#include "fcs.hpp"
#include "format.hpp"
#include "jordan.hpp"
#include "mpo.hpp"
#include "mps.hpp"
#include "oracle.hpp"
#include "sequence.hpp"
#include "spec_document.hpp"
#include "statelib.hpp"
#include "types.hpp"
