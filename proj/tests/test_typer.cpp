#include <doctest.h>

TEST_CASE("placeholder typer") { CHECK(true); }
