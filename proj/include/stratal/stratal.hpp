#ifndef STRATAL_STRATAL_HPP
#define STRATAL_STRATAL_HPP

// Umbrella header for the whole library.

#include "stratal/basics.hpp"
#include "stratal/context.hpp"
#include "stratal/corpus.hpp"
#include "stratal/decompose.hpp"
#include "stratal/parse.hpp"
#include "stratal/print.hpp"
#include "stratal/run.hpp"
#include "stratal/step.hpp"
#include "stratal/store.hpp"
#include "stratal/surface.hpp"
#include "stratal/term.hpp"
#include "stratal/transform.hpp"
#include "stratal/type.hpp"
#include "stratal/typing.hpp"

#endif // STRATAL_STRATAL_HPP
