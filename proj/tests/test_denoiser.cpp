#include <doctest.h>

TEST_CASE("placeholder denoiser") { CHECK(true); }
