#include <doctest.h>

TEST_CASE("placeholder synthetic") { CHECK(true); }
