// Umbrella header.
#pragma once

#include "rdi/export.hpp"
#include "rdi/generators.hpp"
#include "rdi/indicator.hpp"
#include "rdi/mesh.hpp"
#include "rdi/mesh_io.hpp"
#include "rdi/osus.hpp"
#include "rdi/testfns.hpp"
#include "rdi/wls.hpp"
