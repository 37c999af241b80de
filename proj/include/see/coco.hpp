#pragma once

#include <string>

#include "see/catalog.hpp"

namespace see {

// The benchmark's object-to-superclass grouping (the 79 MS-COCO object
// categories minus "person", arranged under 11 superclasses). The grouping is
// data, not derivable: it is compiled in here and also shipped as
// data/superclasses.json for diffing and external tooling.
const SuperclassTable& default_superclass_table();

// JSON document equivalent of the built-in table, for the checked-in file.
std::string default_superclass_table_json();

// Loads a {"superclasses": [{"name", "objects": [...]}, ...]} document.
SuperclassTable load_superclass_table(const std::string& path);

}  // namespace see
