#include <doctest.h>

TEST_CASE("placeholder noising") { CHECK(true); }
