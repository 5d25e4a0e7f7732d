#pragma once

// Umbrella header for the FLARE analysis library.

#include "flare/source.hpp"
#include "flare/lexer.hpp"
#include "flare/ast.hpp"
#include "flare/parser.hpp"
#include "flare/unparse.hpp"
#include "flare/symbols.hpp"
#include "flare/property_set.hpp"
#include "flare/elements.hpp"
#include "flare/properties.hpp"
#include "flare/bindings.hpp"
#include "flare/compose.hpp"
#include "flare/analysis.hpp"
#include "flare/runtime.hpp"
#include "flare/report.hpp"
