#include <doctest.h>

TEST_CASE("placeholder resources") { CHECK(true); }
