#include <doctest.h>

TEST_CASE("placeholder nnkit") { CHECK(true); }
