#include <doctest.h>

TEST_CASE("placeholder corpus") { CHECK(true); }
