#include <doctest.h>

TEST_CASE("placeholder encoders") { CHECK(true); }
