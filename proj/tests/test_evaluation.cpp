#include <doctest.h>

TEST_CASE("placeholder evaluation") { CHECK(true); }
